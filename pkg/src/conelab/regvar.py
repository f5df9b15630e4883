"""Heavy-tailed radial laws, polar sampling, and tail-asymptotics checkers.

A regularly varying cone element is built polar-style: a scalar radius with
tail P(zeta > t) = min(1, c (t/t_min)^(-alpha) L(t/t_min)) times an
independent unit-norm direction from a named spectral sampler.  The radius
is bounded below by t_min, which keeps every sample away from the origin.

The numerical checkers (tail-integral ratios, truncated moments) integrate
the tail function with adaptive quadrature and compare against the exact
limits predicted by the index arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
from scipy.integrate import quad

from .cone import ConeStructure, norm
from .errors import DegenerateTail, IntegralDiverges, RegimeViolation, SpectralNormViolation

#: two-sided 95% normal quantile used by all Wilson intervals
Z95 = 1.959963984540054

_QUAD_OPTS = dict(epsabs=0.0, epsrel=1e-10, limit=400)


# ---------------------------------------------------------------------------
# slowly varying factors and the radial law
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Constant:
    """L = 1 with front factor c: a pure Pareto-type tail."""

    c: float = 1.0

    def factor(self, s):
        return np.ones_like(np.asarray(s, dtype=float))


@dataclass(frozen=True)
class LogPower:
    """L(s) = (1 + log s)^kappa; kappa <= alpha keeps the tail monotone."""

    kappa: float
    c: float = 1.0

    def factor(self, s):
        return (1.0 + np.log(np.asarray(s, dtype=float))) ** self.kappa


SlowlyVarying = Union[Constant, LogPower]


@dataclass(frozen=True)
class SpectralSpec:
    """Named preset for the direction sampler, serializable into configs."""

    preset: str
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class RegVarSpec:
    """Radial tail law plus a spectral sampler for directions."""

    alpha: float
    t_min: float = 1.0
    slowly_varying: SlowlyVarying = Constant(1.0)
    spectral: SpectralSpec = SpectralSpec("point-mass-direction")

    def __post_init__(self):
        if not (self.alpha > 0.0):
            raise ValueError("tail index alpha must be positive")
        if not (self.t_min > 0.0):
            raise ValueError("radial scale t_min must be positive")
        c = self.slowly_varying.c
        if not (0.0 < c <= 1.0):
            raise ValueError("tail front factor c must lie in (0, 1]")
        if isinstance(self.slowly_varying, LogPower) and self.slowly_varying.kappa > self.alpha:
            raise ValueError("LogPower with kappa > alpha gives a non-monotone tail")


def tail_prob(spec: RegVarSpec, t):
    """P(||xi|| > t) = P(zeta > t), exactly from the law (vectorized)."""
    t = np.asarray(t, dtype=float)
    s = np.maximum(t / spec.t_min, 1.0)
    raw = spec.slowly_varying.c * s ** (-spec.alpha) * spec.slowly_varying.factor(s)
    out = np.where(t < spec.t_min, 1.0, np.minimum(1.0, raw))
    return float(out) if out.ndim == 0 else out


def radial_quantile(spec: RegVarSpec, target):
    """inf{t : tail_prob(t) <= target}, vectorized over targets in (0, 1].

    Closed form for the Constant factor; bisection to relative tolerance
    1e-13 otherwise.
    """
    target = np.asarray(target, dtype=float)
    scalar = target.ndim == 0
    target = np.atleast_1d(target).astype(float)
    if np.any(target <= 0.0):
        raise ValueError("quantile target must be positive")
    c = spec.slowly_varying.c
    if isinstance(spec.slowly_varying, Constant):
        out = spec.t_min * np.maximum(1.0, (c / target) ** (1.0 / spec.alpha))
        return float(out[0]) if scalar else out

    out = np.full_like(target, spec.t_min)
    todo = target < c  # below t_min the tail is flat at 1, at t_min it is c
    if np.any(todo):
        tgt = target[todo]
        lo = np.full_like(tgt, spec.t_min)
        hi = spec.t_min * np.maximum(2.0, (c / tgt) ** (1.0 / spec.alpha))
        for _ in range(200):
            mask = tail_prob(spec, hi) > tgt
            if not np.any(mask):
                break
            hi[mask] *= 2.0
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            high_side = tail_prob(spec, mid) > tgt
            lo = np.where(high_side, mid, lo)
            hi = np.where(high_side, hi, mid)
        out[todo] = 0.5 * (lo + hi)
    return float(out[0]) if scalar else out


def sample_radial(spec: RegVarSpec, u):
    """Inverse-CDF transform of uniform variates; zeta >= t_min always."""
    u = np.asarray(u, dtype=float)
    if np.any(u < 0.0) or np.any(u >= 1.0):
        raise ValueError("uniform variates must lie in [0, 1)")
    return radial_quantile(spec, 1.0 - u)


def a_n(spec: RegVarSpec, n: int) -> float:
    """Normalizing sequence: the tail quantile at level 1/n."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return float(radial_quantile(spec, 1.0 / n))


def gamma_n(spec: RegVarSpec, n: int, lam: float) -> float:
    """1 / (n P(||xi|| > lambda)); the large-deviation normalizer."""
    if lam <= 0.0 or n < 1:
        raise ValueError("need lambda > 0 and n >= 1")
    tp = tail_prob(spec, lam)
    if tp <= 0.0:
        raise DegenerateTail(f"tail probability vanished at lambda={lam!r}")
    return 1.0 / (n * tp)


def mu_polar(spec: RegVarSpec, event, sigma_b: float) -> float:
    """Tail-measure mass of a polar event: sigma(B) * r^(-alpha).

    sigma is normalized to a probability measure (the c = 1 convention), so
    sigma_b must lie in [0, 1].
    """
    if not (0.0 <= sigma_b <= 1.0):
        raise ValueError("sigma(B) must lie in [0, 1] under the probability normalization")
    return sigma_b * event.r ** (-spec.alpha)


# ---------------------------------------------------------------------------
# Wilson intervals and spectral-mass estimation
# ---------------------------------------------------------------------------


def wilson_interval(successes: int, trials: int, z: float = Z95) -> tuple[float, float]:
    """Wilson 95% score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    p = successes / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2.0 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials)) / denom
    lo = 0.0 if successes == 0 else max(0.0, center - half)
    hi = 1.0 if successes == trials else min(1.0, center + half)
    return lo, hi


def sigma_estimate(
    spec: RegVarSpec,
    cone: ConeStructure,
    predicate,
    n_samples: int,
    seed: int = 0,
) -> tuple[float, tuple[float, float]]:
    """Monte Carlo mass of a direction predicate under the spectral law."""
    if n_samples < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(5,)))
    sampler = build_spectral_sampler(spec.spectral, cone)
    hits = sum(1 for _ in range(n_samples) if predicate.test(cone, sampler(rng)))
    return hits / n_samples, wilson_interval(hits, n_samples)


# ---------------------------------------------------------------------------
# Karamata-type numerical checkers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KaramataQuery:
    """Regularly varying integrand f with index rho, exponent beta, lower limit a.

    ``log_power`` describes a (1 + log t)^kappa factor in f when present; it
    only matters for the integrability proviso of the boundary case
    beta = -(rho + 1).
    """

    f: Callable[[float], float]
    rho: float
    beta: float
    a: float = 1.0
    log_power: float = 0.0

    def __post_init__(self):
        if self.a <= 0.0:
            raise ValueError("lower limit a must be positive")


def karamata_branch(q: KaramataQuery) -> str:
    """'i' when beta >= -(rho+1), 'ii' otherwise.

    The boundary beta = -(rho+1) belongs to branch (i) by default; it is
    also admissible in branch (ii) when the tail integral converges, which
    callers request explicitly via the ``branch`` arguments below.
    """
    return "i" if q.beta >= -(q.rho + 1.0) else "ii"


def karamata_limit(q: KaramataQuery, branch: Optional[str] = None) -> float:
    """beta + rho + 1 on branch (i), -(beta + rho + 1) on branch (ii)."""
    s = q.beta + q.rho + 1.0
    return s if (branch or karamata_branch(q)) == "i" else -s


def karamata_ratio(q: KaramataQuery, x: float, branch: Optional[str] = None) -> float:
    """x^(beta+1) f(x) / integral of t^beta f(t), over [a, x] or [x, inf).

    Branch (i) integrates from a to x; branch (ii) from x to infinity and
    raises :class:`IntegralDiverges` when the tail integral does not exist.
    """
    if x <= q.a:
        raise ValueError("evaluation point must exceed the lower limit a")
    branch = branch or karamata_branch(q)
    if branch == "i":
        if q.beta < -(q.rho + 1.0):
            raise ValueError("branch (i) needs beta >= -(rho+1)")
        val, _ = quad(lambda t: t**q.beta * q.f(t), q.a, x, **_QUAD_OPTS)
        return x ** (q.beta + 1.0) * q.f(x) / val
    s = q.beta + q.rho + 1.0
    if s > 0.0 or (s == 0.0 and q.log_power >= -1.0):
        raise IntegralDiverges("tail integral of t^beta f(t) diverges")
    # t = x/s maps the tail integral onto (0, 1] and keeps the integrand at
    # the scale of f(x), which adaptive quadrature handles at any x
    val, _ = quad(lambda u: u ** (-q.beta - 2.0) * q.f(x / u), 0.0, 1.0, **_QUAD_OPTS)
    return q.f(x) / val


def truncated_moment(spec: RegVarSpec, gamma: float, t_max: float) -> float:
    """gamma * integral_0^T tail(t) t^(gamma-1) dt (closed form when possible)."""
    if t_max <= spec.t_min:
        return t_max**gamma
    head = spec.t_min**gamma
    c, alpha = spec.slowly_varying.c, spec.alpha
    if isinstance(spec.slowly_varying, Constant):
        if gamma == alpha:
            body = gamma * c * spec.t_min**alpha * math.log(t_max / spec.t_min)
        else:
            body = (
                gamma
                * c
                * spec.t_min**alpha
                * (t_max ** (gamma - alpha) - spec.t_min ** (gamma - alpha))
                / (gamma - alpha)
            )
    else:
        val, _ = quad(lambda t: tail_prob(spec, t) * t ** (gamma - 1.0), spec.t_min, t_max, **_QUAD_OPTS)
        body = gamma * val
    return head + body


def truncated_moment_ratio(spec: RegVarSpec, gamma: float, t_max: float) -> float:
    """Ratio of the truncated gamma-moment to T^gamma tail(T).

    Tends to gamma / (gamma - alpha) as T grows (index arithmetic with
    beta = gamma - 1, rho = -alpha).
    """
    if gamma <= spec.alpha:
        raise ValueError("gamma must exceed the tail index alpha")
    if t_max <= spec.t_min:
        raise ValueError("T must exceed t_min")
    return truncated_moment(spec, gamma, t_max) / (t_max**gamma * tail_prob(spec, t_max))


def truncated_mean(spec: RegVarSpec, t_max: float) -> float:
    """E(zeta 1{zeta <= T}) = integral_0^T tail(t) dt - T tail(T)."""
    if t_max <= spec.t_min:
        return 0.0
    c, alpha = spec.slowly_varying.c, spec.alpha
    if isinstance(spec.slowly_varying, Constant):
        if alpha == 1.0:
            body = c * spec.t_min * math.log(t_max / spec.t_min)
        else:
            body = c * spec.t_min**alpha * (t_max ** (1.0 - alpha) - spec.t_min ** (1.0 - alpha)) / (1.0 - alpha)
    else:
        body, _ = quad(lambda t: tail_prob(spec, t), spec.t_min, t_max, **_QUAD_OPTS)
    integral = spec.t_min + body
    return integral - t_max * tail_prob(spec, t_max)


def mean_norm(spec: RegVarSpec) -> float:
    """E zeta; infinite when alpha <= 1."""
    if spec.alpha <= 1.0:
        return math.inf
    c, alpha = spec.slowly_varying.c, spec.alpha
    if isinstance(spec.slowly_varying, Constant):
        return spec.t_min + c * spec.t_min / (alpha - 1.0)
    body, _ = quad(lambda t: tail_prob(spec, t), spec.t_min, np.inf, **_QUAD_OPTS)
    return spec.t_min + body


def second_moment(spec: RegVarSpec) -> float:
    """E zeta^2 = 2 int t tail(t) dt; infinite when alpha <= 2."""
    if spec.alpha <= 2.0:
        return math.inf
    c, alpha = spec.slowly_varying.c, spec.alpha
    if isinstance(spec.slowly_varying, Constant):
        return spec.t_min**2 + 2.0 * c * spec.t_min**2 / (alpha - 2.0)
    body, _ = quad(lambda t: t * tail_prob(spec, t), spec.t_min, np.inf, **_QUAD_OPTS)
    return spec.t_min**2 + 2.0 * body


# ---------------------------------------------------------------------------
# normalizing-sequence schedules and regime validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PowerSchedule:
    """lambda_n = coeff * n^exponent."""

    exponent: float
    coeff: float = 1.0

    def __post_init__(self):
        if self.coeff <= 0.0:
            raise ValueError("schedule coefficient must be positive")

    def __call__(self, n: int) -> float:
        return self.coeff * float(n) ** self.exponent


@dataclass
class RegimeReport:
    regime: str
    exponent: float
    threshold: float
    valid: bool
    warnings: list[str] = field(default_factory=list)
    extra_condition: Optional[list[tuple[int, float]]] = None  # alpha = 1 column


def validate_regime(
    schedule: PowerSchedule,
    spec: RegVarSpec,
    regime: str,
    n_grid,
) -> RegimeReport:
    """Check the growth conditions for the requested limit-theorem regime.

    Strong-scaling runs need exponent > max(1, 1/alpha); at alpha = 1 the
    truncated-mean condition (n / lambda_n) E(zeta 1{zeta <= lambda_n}) -> 0
    is additionally checked numerically along the n-grid.  Moderate-scaling
    runs need exponent > max(1/alpha, 1/2) and a finite mean (alpha >= 1,
    with a warning at the boundary).
    """
    alpha = spec.alpha
    report = RegimeReport(regime=regime, exponent=schedule.exponent, threshold=0.0, valid=True)
    if regime == "theorem1":
        report.threshold = max(1.0, 1.0 / alpha)
        if not schedule.exponent > report.threshold:
            raise RegimeViolation(
                f"strong scaling needs lambda_n growth exponent > {report.threshold:g} "
                f"(alpha={alpha:g}); got {schedule.exponent:g}"
            )
        if alpha == 1.0:
            column = []
            for n in n_grid:
                lam = schedule(n)
                column.append((int(n), (n / lam) * truncated_mean(spec, lam)))
            report.extra_condition = column
            values = [v for _, v in column]
            if any(b >= a for a, b in zip(values, values[1:])):
                raise RegimeViolation(
                    "alpha = 1: (n/lambda_n) E(||xi|| 1{||xi|| <= lambda_n}) fails to decrease "
                    f"along the n-grid: {values}"
                )
    elif regime == "theorem2":
        report.threshold = max(1.0 / alpha, 0.5)
        if alpha < 1.0:
            raise RegimeViolation("moderate scaling requires tail index alpha >= 1")
        if not schedule.exponent > report.threshold:
            raise RegimeViolation(
                f"moderate scaling needs lambda_n growth exponent > {report.threshold:g} "
                f"(alpha={alpha:g}); got {schedule.exponent:g}"
            )
        if alpha == 1.0:
            report.warnings.append(
                "alpha = 1 requires a finite mean norm; pure power tails at this index "
                "have E||xi|| = inf, so the run is allowed only for integrable laws"
            )
            if not math.isfinite(mean_norm(spec)):
                report.warnings.append("configured radial law has infinite mean")
    else:
        raise ValueError(f"unknown regime {regime!r}")
    return report


# ---------------------------------------------------------------------------
# spectral sampler presets
# ---------------------------------------------------------------------------


def build_spectral_sampler(spectral: SpectralSpec, cone: ConeStructure):
    """Materialize a named spectral preset as rng -> unit-norm element."""
    preset = spectral.preset
    params = dict(spectral.params)

    if preset == "point-mass-direction":
        value = float(params.get("value", 1.0))
        if cone.name != "max":
            raise ValueError("point-mass-direction is a max-cone preset")

        def sampler(rng):
            return value

        return sampler

    if preset == "rotated-segment":
        if not cone.name.startswith("convex_bodies"):
            raise ValueError("rotated-segment needs the convex-bodies cone")
        from .geometry import Polytope

        def sampler(rng):
            phi = rng.uniform(0.0, 2.0 * np.pi)
            seg = Polytope(np.array([[0.0, 0.0], [np.cos(phi), np.sin(phi)]]))
            n = norm(cone, seg)
            return cone.scale(1.0 / n, seg)

        return sampler

    if preset == "random-triangle":
        if not cone.name.startswith("convex_bodies"):
            raise ValueError("random-triangle needs the convex-bodies cone")
        from .geometry import polytope

        dim = cone.extra.get("dim", 2)

        def sampler(rng):
            tri = polytope(rng.normal(size=(3, dim)))
            n = norm(cone, tri)
            return cone.scale(1.0 / n, tri)

        return sampler

    if preset == "hat-function":
        if cone.name != "functions":
            raise ValueError("hat-function needs the functions cone")
        from .gridfn import GridFunction, gf_norm, hat_function

        hat = hat_function(
            float(params.get("rise_end", 1.0)),
            float(params.get("support_end", 2.0)),
            float(params.get("peak", 1.0)),
        )
        unit = GridFunction(hat.knots, hat.values / gf_norm(hat))

        def sampler(rng):
            return unit

        return sampler

    raise ValueError(f"unknown spectral preset {preset!r}")


def sample_element(spec: RegVarSpec, cone: ConeStructure, rng: np.random.Generator, sampler=None):
    """Polar draw: scale an independent unit direction by the radial draw."""
    if sampler is None:
        sampler = build_spectral_sampler(spec.spectral, cone)
    zeta = float(sample_radial(spec, rng.random()))
    eta = sampler(rng)
    n_eta = norm(cone, eta)
    if abs(n_eta - 1.0) > 1e-6:
        raise SpectralNormViolation(f"spectral sample has norm {n_eta!r}")
    return cone.scale(zeta, eta)
