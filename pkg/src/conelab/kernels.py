"""Vectorized Monte Carlo kernels with scheduler-independent randomness.

Replicates are grouped into fixed-size chunks; the generator for a chunk is
derived from (seed, stream id, n, chunk index) only, and chunk results are
integer counts summed in index order.  Results therefore do not depend on
the number of workers, and a fixed configuration reproduces bitwise.

Three cone/sampler combinations get closed-path kernels (all exact event
tests, no quadrature on the hot path):

* half-line with maximum: the partial sum is the running maximum;
* planar convex bodies fed by rotated unit segments: the Minkowski sum is a
  zonotope whose norm is the farthest vertex, found by an angular sweep over
  the segment activation breakpoints;
* weighted-L2 functions fed by a deterministic stretched hat: the squared
  norm of the sum is integrated exactly on the union of the summands' knots,
  and inner products against fixed functions come from a dense table of the
  exact one-dimensional overlap integral.

Everything else runs through the generic element-by-element kernel, which is
slow but works for any cone; the tests drive fast and generic paths with the
same draws and require identical decisions.
"""

from __future__ import annotations

import math

import numpy as np

from .cone import ConeStructure, FullSphere, PolarEvent, event_member, norm
from .errors import NotEmbeddable
from .gridfn import GridFunction, gf_inner, gf_norm, gf_scale
from .regvar import RegVarSpec, build_spectral_sampler, sample_element, sample_radial

STREAM_ESTIMATE = 1
STREAM_COND4 = 2
STREAM_SUMCONV = 3
STREAM_CENTERING = 4
STREAM_SIGMA = 5


def replicate_rng(seed: int, stream: int, *path: int) -> np.random.Generator:
    """Generator keyed by (seed, stream, path); the determinism contract."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(stream, *path)))


def chunk_plan(total: int, chunk: int):
    """Deterministic (index, size) decomposition of a replicate budget."""
    plan = []
    idx = 0
    done = 0
    while done < total:
        size = min(chunk, total - done)
        plan.append((idx, size))
        done += size
        idx += 1
    return plan


# ---------------------------------------------------------------------------
# half-line with maximum
# ---------------------------------------------------------------------------


class MaxKernel:
    """S_n = max of the radial draws; directions are the fixed point 1."""

    def __init__(self, spec: RegVarSpec, cone: ConeStructure, event: PolarEvent):
        self.spec = spec
        self.event = event
        self.direction_ok = event.predicate.test(cone, 1.0)

    def chunk_size(self, n: int) -> int:
        return max(64, int(4_000_000 // max(n, 1)))

    def draw(self, rng: np.random.Generator, size: int, n: int):
        return np.asarray(sample_radial(self.spec, rng.random((size, n))))

    def norms(self, zeta) -> np.ndarray:
        return zeta.max(axis=1)

    def distances(self, zeta) -> np.ndarray:
        return self.norms(zeta)  # centering is the origin here

    def decide(self, zeta, lam: float) -> np.ndarray:
        if not self.direction_ok:
            return np.zeros(zeta.shape[0], dtype=bool)
        return self.norms(zeta) > lam * self.event.r


# ---------------------------------------------------------------------------
# planar zonotopes from rotated unit segments
# ---------------------------------------------------------------------------


def zonotope_norms(zeta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Exact Hausdorff norm of a sum of origin-anchored segments.

    The support function is h(theta) = sum_i zeta_i max(0, cos(theta-phi_i)).
    Its sup equals the farthest zonotope vertex, and every vertex is the sum
    of the segments active on one arc between activation breakpoints
    phi_i +- pi/2, so a cumulative sweep over the sorted breakpoints visits
    them all.
    """
    two_pi = 2.0 * np.pi
    vx = zeta * np.cos(phi)
    vy = zeta * np.sin(phi)
    angles = np.concatenate([(phi - 0.5 * np.pi) % two_pi, (phi + 0.5 * np.pi) % two_pi], axis=1)
    dx = np.concatenate([vx, -vx], axis=1)
    dy = np.concatenate([vy, -vy], axis=1)
    order = np.argsort(angles, axis=1, kind="stable")
    dx = np.take_along_axis(dx, order, axis=1)
    dy = np.take_along_axis(dy, order, axis=1)
    active0 = np.cos(phi) > 0.0
    x0 = np.sum(vx * active0, axis=1)
    y0 = np.sum(vy * active0, axis=1)
    xs = x0[:, None] + np.cumsum(dx, axis=1)
    ys = y0[:, None] + np.cumsum(dy, axis=1)
    best = np.maximum(np.max(xs * xs + ys * ys, axis=1), x0 * x0 + y0 * y0)
    return np.sqrt(best)


class SegmentZonotopeKernel:
    """Convex bodies in the plane with the exact Hausdorff norm sweep."""

    def __init__(self, spec: RegVarSpec, cone: ConeStructure, event: PolarEvent):
        self.spec = spec
        self.event = event
        pred = event.predicate
        if isinstance(pred, FullSphere):
            self.u0_angle = None
            self.threshold = None
        else:  # SupportThreshold, checked by the dispatcher
            u0 = np.asarray(pred.u0, dtype=float)
            self.u0_angle = math.atan2(u0[1], u0[0])
            self.threshold = float(pred.c)

    def chunk_size(self, n: int) -> int:
        return max(64, int(1_000_000 // max(n, 1)))

    def draw(self, rng: np.random.Generator, size: int, n: int):
        zeta = np.asarray(sample_radial(self.spec, rng.random((size, n))))
        phi = rng.uniform(0.0, 2.0 * np.pi, size=(size, n))
        return zeta, phi

    def norms(self, draws) -> np.ndarray:
        zeta, phi = draws
        return zonotope_norms(zeta, phi)

    def distances(self, draws) -> np.ndarray:
        return self.norms(draws)

    def decide(self, draws, lam: float) -> np.ndarray:
        zeta, phi = draws
        norms = zonotope_norms(zeta, phi)
        member = norms > lam * self.event.r
        if self.u0_angle is not None:
            support_u0 = np.sum(zeta * np.maximum(0.0, np.cos(phi - self.u0_angle)), axis=1)
            member &= support_u0 >= self.threshold * norms
        return member


# ---------------------------------------------------------------------------
# weighted-L2 functions from a deterministic stretched hat
# ---------------------------------------------------------------------------


def x2_product_integral(knots: np.ndarray, vals: np.ndarray) -> float:
    """Exact integral of x^2 f(x) dx for piecewise-linear f."""
    if len(knots) < 2:
        return 0.0
    x0 = knots[:-1]
    h = np.diff(knots)
    g0 = vals[:-1]
    e = np.diff(vals)
    seg = h * (x0 * x0 * (g0 + 0.5 * e) + 2.0 * x0 * h * (0.5 * g0 + e / 3.0) + h * h * (g0 / 3.0 + 0.25 * e))
    return float(np.sum(seg))


class ScaledInnerTable:
    """Dense table of W(zeta) = <zeta . eta, g> for a unit hat eta.

    Exact values are tabulated on a log grid of scales; beyond the point
    where the stretched hat's rising edge covers the whole support of g the
    overlap is exactly C / zeta with C = (peak / rise_end) int x^2 g dx.
    """

    def __init__(self, eta: GridFunction, other: GridFunction, t_min: float, points: int = 4096):
        self.rise_end = float(eta.knots[1])
        self.peak = float(eta.values[1])
        support_other = float(other.knots[-1])
        self.tail_coeff = self.peak / self.rise_end * x2_product_integral(other.knots, other.values)
        self.zeta_max = max(support_other / self.rise_end, 2.0 * t_min)
        grid = np.geomspace(t_min, self.zeta_max, points)
        self.log_grid = np.log(grid)
        self.table = np.array([gf_inner(gf_scale(float(z), eta), other) for z in grid])

    def eval(self, zeta: np.ndarray) -> np.ndarray:
        zeta = np.asarray(zeta, dtype=float)
        inside = zeta <= self.zeta_max
        out = np.empty_like(zeta)
        out[inside] = np.interp(np.log(zeta[inside]), self.log_grid, self.table)
        out[~inside] = self.tail_coeff / zeta[~inside]
        return out


def hat_sum_sq_norms(zeta: np.ndarray, rise_end: float, support_end: float, peak: float) -> np.ndarray:
    """Exact squared weighted-L2 norm of sum_i eta(x / zeta_i) per row.

    The sum is piecewise linear with breakpoints {zeta_i rise_end,
    zeta_i support_end}; evaluating it on exactly those knots makes the
    per-segment cubic integral closed-form.
    """
    c, n = zeta.shape
    knots = np.concatenate([zeta * rise_end, zeta * support_end], axis=1)
    knots.sort(axis=1)
    knots = np.concatenate([np.zeros((c, 1)), knots], axis=1)  # (c, 2n+1)
    y = knots[:, :, None] / zeta[:, None, :]  # (c, 2n+1, n)
    slope_up = peak / rise_end
    slope_dn = peak / (support_end - rise_end)
    vals = np.where(y < rise_end, slope_up * y, np.where(y < support_end, slope_dn * (support_end - y), 0.0))
    s = vals.sum(axis=2)
    x0 = knots[:, :-1]
    h = np.diff(knots, axis=1)
    d0 = s[:, :-1]
    e = np.diff(s, axis=1)
    seg = h * (
        x0 * (d0 * d0 + d0 * e + e * e / 3.0)
        + h * (0.5 * d0 * d0 + (2.0 / 3.0) * d0 * e + 0.25 * e * e)
    )
    return seg.sum(axis=1)


class HatFunctionsKernel:
    """Functions cone with the deterministic unit-hat spectral direction.

    Covers full-sphere events (the direction statistic of correlation
    events is not invariant under the cone's argument rescaling, so those
    run through the generic kernel).  Centering, when present, is a fixed
    embedded mean function A; squared distances decompose as
    ||S||^2 - 2 n sum_i W(zeta_i) + n^2 ||A||^2 with W from
    :class:`ScaledInnerTable`.
    """

    def __init__(self, spec: RegVarSpec, cone: ConeStructure, event: PolarEvent, eta: GridFunction,
                 center_unit: GridFunction | None):
        if not isinstance(event.predicate, FullSphere):
            raise ValueError("the hat kernel covers full-sphere events only")
        self.spec = spec
        self.event = event
        self.rise_end = float(eta.knots[1])
        self.support_end = float(eta.knots[2])
        self.peak = float(eta.values[1])
        self.center_unit = center_unit
        if center_unit is not None:
            self.w_table = ScaledInnerTable(eta, center_unit, spec.t_min)
            self.center_sq = gf_norm(center_unit) ** 2
        else:
            self.w_table = None
            self.center_sq = 0.0

    def chunk_size(self, n: int) -> int:
        return max(16, int(2_000_000 // max((2 * n + 1) * n, 1)))

    def draw(self, rng: np.random.Generator, size: int, n: int):
        return np.asarray(sample_radial(self.spec, rng.random((size, n))))

    def _dist_sq(self, zeta) -> np.ndarray:
        n = zeta.shape[1]
        s2 = hat_sum_sq_norms(zeta, self.rise_end, self.support_end, self.peak)
        if self.center_unit is None:
            return s2
        w = self.w_table.eval(zeta).sum(axis=1)
        return np.maximum(s2 - 2.0 * n * w + (n * n) * self.center_sq, 0.0)

    def norms(self, zeta) -> np.ndarray:
        return np.sqrt(hat_sum_sq_norms(zeta, self.rise_end, self.support_end, self.peak))

    def distances(self, zeta) -> np.ndarray:
        return np.sqrt(self._dist_sq(zeta))

    def decide(self, zeta, lam: float) -> np.ndarray:
        return np.sqrt(self._dist_sq(zeta)) > lam * self.event.r


# ---------------------------------------------------------------------------
# generic fallback
# ---------------------------------------------------------------------------


class GenericKernel:
    """Element-by-element kernel valid for every cone; slow but universal."""

    def __init__(self, spec: RegVarSpec, cone: ConeStructure, event: PolarEvent, center_vec=None):
        self.spec = spec
        self.cone = cone
        self.event = event
        self.center_vec = center_vec  # embedded vector of the per-summand mean, or None
        self.sampler = build_spectral_sampler(spec.spectral, cone)
        if center_vec is not None and cone.embedding is None:
            raise NotEmbeddable(f"cone {cone.name!r} has no embedding for shifted events")

    def chunk_size(self, n: int) -> int:
        return 1024

    def draw(self, rng: np.random.Generator, size: int, n: int):
        out = []
        for _ in range(size):
            out.append([sample_element(self.spec, self.cone, rng, self.sampler) for _ in range(n)])
        return out

    def _sum(self, elements):
        from .experiments import partial_sum

        return partial_sum(self.cone, elements)

    def norms(self, draws) -> np.ndarray:
        return np.array([norm(self.cone, self._sum(els)) for els in draws])

    def distances(self, draws) -> np.ndarray:
        if self.center_vec is None:
            return self.norms(draws)
        emb = self.cone.embedding
        out = []
        for els in draws:
            n = len(els)
            shift = emb.scale(float(n), self.center_vec)
            out.append(emb.norm(emb.sub(emb.embed(self._sum(els)), shift)))
        return np.array(out)

    def decide(self, draws, lam: float) -> np.ndarray:
        out = np.zeros(len(draws), dtype=bool)
        if self.center_vec is None:
            for i, els in enumerate(draws):
                out[i] = event_member(self.cone, self._sum(els), self.event, lam)
            return out
        emb = self.cone.embedding
        thresh = lam * self.event.r
        for i, els in enumerate(draws):
            n = len(els)
            shift = emb.scale(float(n), self.center_vec)
            g = emb.sub(emb.embed(self._sum(els)), shift)
            ng = emb.norm(g)
            if ng > thresh:
                out[i] = self.event.predicate.test_embedded(emb, emb.scale(1.0 / ng, g))
        return out
