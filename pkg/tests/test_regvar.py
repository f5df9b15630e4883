"""Radial laws, normalizing sequences, and the tail-asymptotics checkers."""

import math

import numpy as np
import pytest

import conelab as cl
from conelab.errors import DegenerateTail, IntegralDiverges, RegimeViolation, SpectralNormViolation
from conelab.regvar import (
    Constant,
    LogPower,
    build_spectral_sampler,
    karamata_branch,
    mean_norm,
    radial_quantile,
    second_moment,
    truncated_mean,
    truncated_moment,
)


class TestRadialLaw:
    def test_tail_is_capped_and_flat_below_t_min(self):
        spec = cl.RegVarSpec(alpha=1.5, t_min=2.0)
        assert cl.tail_prob(spec, 1.0) == 1.0
        assert cl.tail_prob(spec, 2.0) == 1.0
        assert cl.tail_prob(spec, 4.0) == pytest.approx(2.0 ** -1.5)

    def test_tail_monotone_nonincreasing(self):
        for sv in (Constant(0.7), LogPower(kappa=1.0), LogPower(kappa=-2.0)):
            spec = cl.RegVarSpec(alpha=1.0, slowly_varying=sv)
            t = np.geomspace(0.5, 1e8, 400)
            tp = cl.tail_prob(spec, t)
            assert np.all(np.diff(tp) <= 1e-16)
            assert np.all(tp <= 1.0)

    def test_kappa_above_alpha_rejected(self):
        with pytest.raises(ValueError):
            cl.RegVarSpec(alpha=1.0, slowly_varying=LogPower(kappa=2.0))

    def test_inverse_cdf_closed_forms(self):
        assert cl.sample_radial(cl.RegVarSpec(alpha=1.0), 0.5) == pytest.approx(2.0)
        assert cl.sample_radial(cl.RegVarSpec(alpha=2.0), 0.99) == pytest.approx(10.0, rel=1e-12)

    def test_logpower_bisection_residuals(self, rng):
        spec = cl.RegVarSpec(alpha=1.0, slowly_varying=LogPower(kappa=1.0))
        u = rng.random(1000)
        t = cl.sample_radial(spec, u)
        assert np.max(np.abs(cl.tail_prob(spec, t) - (1.0 - u))) <= 1e-12

    def test_empirical_tail_matches_law(self, rng):
        spec = cl.RegVarSpec(alpha=1.5)
        draws = cl.sample_radial(spec, rng.random(1_000_000))
        for level in (0.9, 0.99, 0.999):
            t = radial_quantile(spec, 1.0 - level)
            hits = int(np.count_nonzero(draws > t))
            lo, hi = cl.wilson_interval(hits, len(draws))
            assert lo <= 1.0 - level <= hi


class TestNormalizingSequences:
    def test_a_n_closed_form(self):
        assert cl.a_n(cl.RegVarSpec(alpha=2.0), 100) == pytest.approx(10.0)

    def test_tail_at_a_n_is_one_over_n(self):
        spec = cl.RegVarSpec(alpha=2.0)
        assert cl.tail_prob(spec, cl.a_n(spec, 100)) == pytest.approx(0.01, abs=1e-12)

    def test_logpower_a_n_bisection_consistency(self):
        spec = cl.RegVarSpec(alpha=1.0, slowly_varying=LogPower(kappa=1.0))
        for n in (10, 1000, 10**6):
            val = n * cl.tail_prob(spec, cl.a_n(spec, n))
            assert 1.0 - 1e-9 <= val <= 1.0 + 1e-12

    def test_regular_variation_of_quantiles(self):
        # n tail(a_n r) approaches r^(-alpha); exact for the pure power law
        spec = cl.RegVarSpec(alpha=1.5)
        for n in (100, 10**4, 10**6):
            for r in (0.5, 1.0, 2.0):
                val = n * cl.tail_prob(spec, cl.a_n(spec, n) * r)
                assert val == pytest.approx(r ** -1.5, rel=0.02)
        lp = cl.RegVarSpec(alpha=1.0, slowly_varying=LogPower(kappa=0.5))
        for n in (100, 10**4, 10**6):
            for r in (0.5, 1.0, 2.0):
                val = n * cl.tail_prob(lp, cl.a_n(lp, n) * r)
                assert val == pytest.approx(1.0 / r, rel=0.10)

    def test_gamma_n(self):
        spec = cl.RegVarSpec(alpha=1.5)
        # 1 / (100 * 100^-1.5) = 100^0.5
        assert cl.gamma_n(spec, 100, 100.0) == pytest.approx(10.0, rel=1e-12)
        lam = 37.0
        g = cl.gamma_n(spec, 55, lam)
        assert g * 55 * cl.tail_prob(spec, lam) == pytest.approx(1.0, rel=1e-12)

    def test_gamma_n_degenerate_tail(self):
        spec = cl.RegVarSpec(alpha=300.0)
        with pytest.raises(DegenerateTail):
            cl.gamma_n(spec, 10, 1e300)


class TestMuPolar:
    def test_normalization(self):
        spec = cl.RegVarSpec(alpha=1.0)
        assert cl.mu_polar(spec, cl.PolarEvent(r=1.0, predicate=cl.FullSphere()), 1.0) == 1.0
        assert cl.mu_polar(spec, cl.PolarEvent(r=2.0, predicate=cl.FullSphere()), 0.3) == pytest.approx(0.15)

    def test_scaling_law(self):
        spec = cl.RegVarSpec(alpha=1.7)
        ev = cl.PolarEvent(r=1.3, predicate=cl.FullSphere())
        base = cl.mu_polar(spec, ev, 0.8)
        for lam in (2.0, 5.0, 10.0):
            scaled = cl.mu_polar(spec, cl.PolarEvent(r=lam * ev.r, predicate=ev.predicate), 0.8)
            assert scaled == pytest.approx(lam ** -1.7 * base, rel=1e-12)

    def test_sigma_out_of_range(self):
        spec = cl.RegVarSpec(alpha=1.0)
        with pytest.raises(ValueError):
            cl.mu_polar(spec, cl.PolarEvent(r=1.0, predicate=cl.FullSphere()), 1.5)


class TestKaramata:
    def test_branch_i_power(self):
        q = cl.KaramataQuery(f=lambda t: t ** -1.5, rho=-1.5, beta=2.0, a=1.0)
        assert karamata_branch(q) == "i"
        assert cl.karamata_limit(q) == pytest.approx(1.5)
        assert cl.karamata_ratio(q, 1e6) == pytest.approx(1.5, rel=0.005)

    def test_branch_ii_power(self):
        q = cl.KaramataQuery(f=lambda t: t ** -3.0, rho=-3.0, beta=0.0, a=1.0)
        assert karamata_branch(q) == "ii"
        assert cl.karamata_limit(q) == pytest.approx(2.0)
        assert cl.karamata_ratio(q, 1e6) == pytest.approx(2.0, rel=0.005)

    def test_constant_integrand_closed_form(self):
        q = cl.KaramataQuery(f=lambda t: 1.0, rho=0.0, beta=0.0, a=1.0)
        assert cl.karamata_ratio(q, 10.0) == pytest.approx(10.0 / 9.0, rel=1e-9)

    def test_monotone_approach_to_limit(self):
        q = cl.KaramataQuery(f=lambda t: t ** -1.5, rho=-1.5, beta=2.0, a=1.0)
        xs = np.geomspace(10.0, 1e6, 6)
        gaps = [abs(cl.karamata_ratio(q, float(x)) - 1.5) for x in xs]
        assert all(b < a for a, b in zip(gaps, gaps[1:]))

    def test_branch_ii_convergent_case(self):
        q = cl.KaramataQuery(f=lambda t: t ** -1.0, rho=-1.0, beta=-0.5, a=1.0)
        assert karamata_branch(q) == "ii"
        assert cl.karamata_ratio(q, 1e4) == pytest.approx(0.5, rel=0.01)

    @pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
    def test_boundary_case_needs_integrability(self):
        # beta = -(rho+1): branch (i) by default, branch (ii) only with an
        # integrable tail; the plain power diverges there
        boundary = cl.KaramataQuery(f=lambda t: t ** -2.0, rho=-2.0, beta=1.0, a=1.0)
        assert karamata_branch(boundary) == "i"
        with pytest.raises(IntegralDiverges):
            cl.karamata_ratio(boundary, 100.0, branch="ii")
        log_damped = cl.KaramataQuery(
            f=lambda t: t ** -2.0 * (1.0 + np.log(t)) ** -2.0,
            rho=-2.0, beta=1.0, a=1.0, log_power=-2.0,
        )
        ratio = cl.karamata_ratio(log_damped, 1e5, branch="ii")
        # limit is -(beta+rho+1) = 0, approached like 1/(1+log x)
        assert ratio == pytest.approx(1.0 / (1.0 + math.log(1e5)), rel=0.05)
        assert cl.karamata_limit(log_damped, branch="ii") == 0.0

    def test_x_must_exceed_a(self):
        q = cl.KaramataQuery(f=lambda t: 1.0, rho=0.0, beta=0.0, a=1.0)
        with pytest.raises(ValueError):
            cl.karamata_ratio(q, 0.5)


class TestTruncatedMoments:
    def test_alpha1_gamma2_closed_form(self):
        spec = cl.RegVarSpec(alpha=1.0)
        t_max = 1e4
        assert truncated_moment(spec, 2.0, t_max) == pytest.approx(2 * t_max - 1.0, rel=1e-12)
        assert cl.truncated_moment_ratio(spec, 2.0, t_max) == pytest.approx(2.0, rel=0.01)

    def test_limit_matches_index_arithmetic(self):
        spec = cl.RegVarSpec(alpha=1.5)
        assert cl.truncated_moment_ratio(spec, 2.0, 1e6) == pytest.approx(4.0, rel=0.01)

    def test_ratio_positive_and_continuous_sweep(self):
        spec = cl.RegVarSpec(alpha=1.2, slowly_varying=LogPower(kappa=0.5))
        ratios = [cl.truncated_moment_ratio(spec, 2.0, float(t)) for t in np.geomspace(2.0, 1e5, 25)]
        assert all(r > 0 for r in ratios)
        assert all(abs(b - a) < 0.8 for a, b in zip(ratios, ratios[1:]))

    def test_truncated_mean_against_quadrature(self):
        spec = cl.RegVarSpec(alpha=1.0)
        t_max = 100.0
        # E(zeta 1{zeta <= T}) = t_min ln(T / t_min) for the unit Pareto law
        assert truncated_mean(spec, t_max) == pytest.approx(math.log(t_max), rel=1e-10)

    def test_moments(self):
        spec = cl.RegVarSpec(alpha=2.5)
        assert mean_norm(spec) == pytest.approx(1.0 + 1.0 / 1.5, rel=1e-12)
        assert second_moment(spec) == pytest.approx(1.0 + 2.0 / 0.5, rel=1e-12)
        assert math.isinf(mean_norm(cl.RegVarSpec(alpha=1.0)))
        assert math.isinf(second_moment(cl.RegVarSpec(alpha=2.0)))


class TestSchedulesAndRegimes:
    def test_theorem1_valid(self):
        spec = cl.RegVarSpec(alpha=1.5)
        report = cl.validate_regime(cl.PowerSchedule(1.4), spec, "theorem1", (10, 100))
        assert report.valid and report.threshold == 1.0

    def test_theorem1_violation(self):
        spec = cl.RegVarSpec(alpha=1.5)
        with pytest.raises(RegimeViolation):
            cl.validate_regime(cl.PowerSchedule(0.9), spec, "theorem1", (10, 100))

    def test_alpha_below_one_needs_steeper_growth(self):
        spec = cl.RegVarSpec(alpha=0.5)
        with pytest.raises(RegimeViolation):
            cl.validate_regime(cl.PowerSchedule(1.5), spec, "theorem1", (10, 100))
        report = cl.validate_regime(cl.PowerSchedule(2.1), spec, "theorem1", (10, 100))
        assert report.valid

    def test_theorem2_threshold(self):
        spec = cl.RegVarSpec(alpha=2.5)
        report = cl.validate_regime(cl.PowerSchedule(0.75), spec, "theorem2", (10, 100))
        assert report.valid and report.threshold == 0.5
        with pytest.raises(RegimeViolation):
            cl.validate_regime(cl.PowerSchedule(0.45), spec, "theorem2", (10, 100))

    def test_theorem2_rejects_alpha_below_one(self):
        with pytest.raises(RegimeViolation):
            cl.validate_regime(cl.PowerSchedule(2.5), cl.RegVarSpec(alpha=0.8), "theorem2", (10,))

    def test_theorem2_alpha_one_warns(self):
        report = cl.validate_regime(cl.PowerSchedule(1.6), cl.RegVarSpec(alpha=1.0), "theorem2", (10,))
        assert report.warnings

    def test_alpha1_extra_condition_column(self):
        spec = cl.RegVarSpec(alpha=1.0)
        report = cl.validate_regime(cl.PowerSchedule(1.4), spec, "theorem1", (10, 100, 1000))
        col = [v for _, v in report.extra_condition]
        assert all(b < a for a, b in zip(col, col[1:]))


class TestSpectralSampling:
    def test_point_mass_on_max_cone(self, rng):
        cone = cl.max_cone()
        spec = cl.RegVarSpec(alpha=1.5)
        x = cl.sample_element(spec, cone, rng)
        assert x >= spec.t_min

    def test_unit_norms_across_presets(self, rng):
        cases = [
            (cl.max_cone(), cl.SpectralSpec("point-mass-direction")),
            (cl.convex_bodies_cone(), cl.SpectralSpec("rotated-segment")),
            (cl.convex_bodies_cone(metric="lp"), cl.SpectralSpec("rotated-segment")),
            (cl.convex_bodies_cone(), cl.SpectralSpec("random-triangle")),
            (cl.functions_cone(), cl.SpectralSpec("hat-function")),
        ]
        for cone, spectral in cases:
            sampler = build_spectral_sampler(spectral, cone)
            for _ in range(10):
                eta = sampler(rng)
                assert cl.norm(cone, eta) == pytest.approx(1.0, abs=1e-9)

    def test_sample_element_norm_equals_radial_draw(self, rng):
        cone = cl.functions_cone()
        spec = cl.RegVarSpec(alpha=2.5, spectral=cl.SpectralSpec("hat-function"))
        sampler = build_spectral_sampler(spec.spectral, cone)
        for _ in range(200):
            state = rng.bit_generator.state
            u = rng.random()
            zeta = cl.sample_radial(spec, u)
            rng.bit_generator.state = state
            x = cl.sample_element(spec, cone, rng, sampler)
            assert cl.norm(cone, x) == pytest.approx(zeta, rel=1e-9)

    def test_spectral_norm_violation_detected(self, rng):
        cone = cl.max_cone()
        spec = cl.RegVarSpec(alpha=1.0, spectral=cl.SpectralSpec("point-mass-direction", {"value": 2.0}))
        with pytest.raises(SpectralNormViolation):
            cl.sample_element(spec, cone, rng)

    def test_mismatched_preset_and_cone(self):
        with pytest.raises(ValueError):
            build_spectral_sampler(cl.SpectralSpec("hat-function"), cl.max_cone())


class TestSigmaEstimate:
    def test_full_sphere_is_one(self):
        spec = cl.RegVarSpec(alpha=1.5, spectral=cl.SpectralSpec("point-mass-direction"))
        est, (lo, hi) = cl.sigma_estimate(spec, cl.max_cone(), cl.FullSphere(), 500, seed=1)
        assert est == 1.0 and hi == 1.0

    def test_never_true_is_zero(self):
        spec = cl.RegVarSpec(alpha=1.5, spectral=cl.SpectralSpec("point-mass-direction"))
        est, (lo, hi) = cl.sigma_estimate(spec, cl.max_cone(), cl.CoordinateThreshold(c=2.0), 500, seed=1)
        assert est == 0.0 and lo == 0.0

    def test_coverage_of_analytic_angular_mass(self):
        # segment direction uniform on the circle: mass of {h(u0) >= c} is acos(c)/pi
        cone = cl.convex_bodies_cone()
        spec = cl.RegVarSpec(alpha=1.5, spectral=cl.SpectralSpec("rotated-segment"))
        pred = cl.SupportThreshold(u0=(1.0, 0.0), c=0.5)
        truth = math.acos(0.5) / math.pi
        covered = 0
        for seed in range(60):
            est, (lo, hi) = cl.sigma_estimate(spec, cone, pred, 800, seed=seed)
            covered += lo <= truth <= hi
        assert covered >= 54  # ~95% nominal coverage, wide slack


class TestWilson:
    def test_edge_cases(self):
        lo, hi = cl.wilson_interval(0, 100)
        assert lo == 0.0 and hi > 0.0
        lo, hi = cl.wilson_interval(100, 100)
        assert hi == 1.0 and lo < 1.0

    def test_contains_point_estimate(self):
        lo, hi = cl.wilson_interval(37, 1000)
        assert lo < 0.037 < hi
