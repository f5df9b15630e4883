"""Norm/direction calculus and polar events across all four cones."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import conelab as cl
from conelab.cones import (
    point_set,
    random_grid_function,
    random_max_element,
    random_point_set,
    random_polytope,
)
from conelab.errors import ZeroNorm

ALL_CONES = {
    "max": (cl.max_cone, random_max_element),
    "convex_bodies": (cl.convex_bodies_cone, random_polytope),
    "functions": (cl.functions_cone, random_grid_function),
    "union": (cl.union_cone, random_point_set),
}


@pytest.fixture(params=sorted(ALL_CONES))
def cone_and_sampler(request):
    factory, sampler = ALL_CONES[request.param]
    return factory(), sampler


class TestNormDirection:
    def test_norm_of_origin_is_zero(self, cone_and_sampler):
        cone, _ = cone_and_sampler
        assert cl.norm(cone, cone.origin) == 0.0

    def test_max_cone_norm_is_value(self):
        assert cl.norm(cl.max_cone(), 3.5) == 3.5

    def test_unit_square_norm(self):
        cone = cl.convex_bodies_cone()
        sq = cl.polytope([[0, 0], [1, 0], [0, 1], [1, 1]])
        assert cl.norm(cone, sq) == pytest.approx(np.sqrt(2), abs=1e-12)

    def test_direction_has_unit_norm(self, cone_and_sampler, rng):
        cone, sampler = cone_and_sampler
        for _ in range(25):
            x = sampler(rng)
            if cl.norm(cone, x) <= 1e-12:
                continue
            assert cl.norm(cone, cl.direction(cone, x)) == pytest.approx(1.0, abs=1e-9)

    def test_direction_of_origin_raises(self, cone_and_sampler):
        cone, _ = cone_and_sampler
        with pytest.raises(ZeroNorm):
            cl.direction(cone, cone.origin)

    def test_max_cone_direction(self):
        assert cl.direction(cl.max_cone(), 5.0) == 1.0

    def test_segment_direction_rescales(self):
        cone = cl.convex_bodies_cone()
        seg = cl.polytope([[0.0, 0.0], [2.0, 0.0]])
        d = cl.direction(cone, seg)
        assert cl.norm(cone, d) == pytest.approx(1.0, abs=1e-12)
        assert cl.support_function(d, np.array([1.0, 0.0])) == pytest.approx(1.0, abs=1e-12)

    @given(lam=st.floats(0.01, 100.0))
    @settings(max_examples=40, deadline=None)
    def test_direction_scale_invariance(self, lam):
        # consequence of the action law a(bx) = (ab)x plus homogeneity
        cone = cl.functions_cone()
        f = cl.hat_function(0.8, 2.5, peak=2.0)
        d1 = cl.direction(cone, cl.gf_scale(lam, f))
        d2 = cl.direction(cone, f)
        assert cone.metric(d1, d2) < 1e-9


class TestEventMembership:
    def test_simple_membership(self):
        cone = cl.max_cone()
        ev = cl.PolarEvent(r=2.0, predicate=cl.FullSphere())
        assert cl.event_member(cone, 10.0, ev, lam=1.0)

    def test_boundary_is_strict(self):
        cone = cl.max_cone()
        ev = cl.PolarEvent(r=2.0, predicate=cl.FullSphere())
        assert not cl.event_member(cone, 10.0, ev, lam=5.0)  # 10 is not > 10

    def test_near_origin_is_false_without_error(self):
        cone = cl.max_cone()
        ev = cl.PolarEvent(r=1.0, predicate=cl.FullSphere())
        assert not cl.event_member(cone, 0.0, ev, lam=1.0)

    def test_polygon_support_threshold(self):
        cone = cl.convex_bodies_cone()
        theta = 2 * np.pi * np.arange(20) / 20
        gon = cl.polytope(3.0 * np.column_stack([np.cos(theta), np.sin(theta)]))
        ev = cl.PolarEvent(r=2.0, predicate=cl.SupportThreshold(u0=(1.0, 0.0), c=0.9))
        assert cl.norm(cone, gon) == pytest.approx(3.0, abs=1e-12)
        assert cl.event_member(cone, gon, ev, lam=1.0)

    def test_membership_scaling_equivalence(self, cone_and_sampler, rng):
        # x in lam U  iff  (1/lam) x in U
        cone, sampler = cone_and_sampler
        ev = cl.PolarEvent(r=0.8, predicate=cl.FullSphere())
        for _ in range(25):
            x = sampler(rng)
            lam = float(np.exp(rng.uniform(-2, 2)))
            lhs = cl.event_member(cone, x, ev, lam=lam)
            rhs = cl.event_member(cone, cone.scale(1.0 / lam, x), ev, lam=1.0)
            assert lhs == rhs

    def test_event_radius_must_be_positive(self):
        with pytest.raises(ValueError):
            cl.PolarEvent(r=0.0, predicate=cl.FullSphere())


class TestPredicates:
    def test_coordinate_threshold_on_unit(self):
        cone = cl.max_cone()
        assert cl.CoordinateThreshold(c=1.0).test(cone, 1.0)
        assert not cl.CoordinateThreshold(c=1.5).test(cone, 1.0)

    def test_correlation_threshold_on_spectral_direction(self):
        # the polar construction recovers the spectral direction exactly:
        # direction(scale(zeta, eta)) = eta by the action law, so the
        # predicate sees the value-normalized hat itself
        cone = cl.functions_cone()
        hat = cl.hat_function(1.0, 2.0)
        eta = cl.GridFunction(hat.knots, hat.values / cl.gf_norm(hat))
        recovered = cl.direction(cone, cl.gf_scale(3.0, eta))
        pred = cl.CorrelationThreshold(template=hat, theta=0.999999)
        assert pred.test(cone, recovered)

    def test_correlation_threshold_rejects_distant_shape(self):
        cone = cl.functions_cone()
        f = cl.hat_function(0.5, 1.0)
        eta = cl.GridFunction(f.knots, f.values / cl.gf_norm(f))
        g = cl.GridFunction(np.array([0.0, 1.0, 1.5, 2.0]), np.array([0.0, 0.0, 1.0, 0.0]))
        pred = cl.CorrelationThreshold(template=g, theta=0.5)
        assert not pred.test(cone, eta)


class TestSubInvarianceConsequences:
    def test_norm_sublinearity_where_declared(self, cone_and_sampler, rng):
        cone, sampler = cone_and_sampler
        if not cone.claims_sub_invariant:
            pytest.skip("cone does not declare sub-invariance")
        for _ in range(50):
            x, y = sampler(rng), sampler(rng)
            nx, ny = cl.norm(cone, x), cl.norm(cone, y)
            assert cl.norm(cone, cone.add(x, y)) <= nx + ny + 1e-9 * (1 + nx + ny)

    def test_union_cone_violates_sublinearity_witness(self):
        cone = cl.union_cone()
        a, h = point_set([10.0]), point_set([1.0])
        assert cone.metric(cone.add(a, h), a) == 9.0 > cl.norm(cone, h)
