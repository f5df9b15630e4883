"""The four concrete cones and random element generators for their tests.

* half-line with maximum            (pointed, sub-invariant)
* convex bodies with Minkowski sum  (pointed, sub-invariant, invariant,
                                     second distributivity holds)
* weighted-L2 functions with argument rescaling
                                    (pointed, sub-invariant, invariant;
                                     second distributivity FAILS because the
                                     scaling stretches the argument)
* finite point sets with union      (pointed only; sub-invariance fails,
                                     see the probe counterexample)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cone import ConeStructure
from .errors import DimensionMismatch
from .geometry import (
    Polytope,
    circle_grid,
    hausdorff_distance,
    icosphere_grid,
    lp_support_distance,
    polytope,
    polytope_minkowski_sum,
    polytope_scale,
)
from .gridfn import ZERO_FUNCTION, GridFunction, gf_add, gf_metric, gf_scale, hat_function

# ---------------------------------------------------------------------------
# half-line with maximum
# ---------------------------------------------------------------------------


def max_cone() -> ConeStructure:
    """[0, inf) with x + y = max(x, y), usual scaling, d(x, y) = |x - y|."""

    def add(x, y):
        return max(float(x), float(y))

    def scale(a, x):
        if a <= 0.0:
            raise ValueError("scaling factor must be positive")
        return a * float(x)

    def metric(x, y):
        return abs(float(x) - float(y))

    return ConeStructure(
        name="max",
        element_kind="nonnegative real",
        add=add,
        scale=scale,
        neutral=0.0,
        origin=0.0,
        metric=metric,
        claims_pointed=True,
        claims_sub_invariant=True,
        claims_invariant=False,
        claims_second_distributive=False,
        probe_elements=(1.0, 10.0, 0.25),
    )


def random_max_element(rng: np.random.Generator) -> float:
    return float(rng.lognormal(mean=0.0, sigma=1.0))


# ---------------------------------------------------------------------------
# convex bodies with Minkowski addition
# ---------------------------------------------------------------------------


def convex_bodies_cone(
    dim: int = 2,
    metric: str = "hausdorff",
    power: float = 2.0,
    n_directions: int | None = None,
) -> ConeStructure:
    """Convex polytopes in R^dim under Minkowski addition.

    ``metric="hausdorff"`` is exact for dim 2 and grid-approximate for dim 3;
    ``metric="lp"`` is the weighted-Lp distance of support functions over a
    fixed quadrature grid (exact as a metric by construction).  Both are
    homogeneous, invariant and sub-invariant, and the second distributivity
    law holds.
    """
    if dim not in (2, 3):
        raise DimensionMismatch("convex bodies are supported in dimension 2 or 3")
    if metric not in ("hausdorff", "lp"):
        raise ValueError(f"unknown metric kind {metric!r}")
    if n_directions is None:
        n_directions = 256 if dim == 2 else None
    grid = circle_grid(n_directions) if dim == 2 else icosphere_grid()

    if metric == "hausdorff":
        def dist(p, q):
            return hausdorff_distance(p, q, grid=grid)
    else:
        def dist(p, q):
            return lp_support_distance(p, q, power, grid)

    zero = Polytope(np.zeros((1, dim)))
    unit_segment = polytope(np.vstack([np.zeros(dim), np.eye(dim)[0]]))
    square = polytope(np.array(np.meshgrid(*([[0.0, 1.0]] * dim))).reshape(dim, -1).T)
    probes = (square, unit_segment, zero, polytope(0.5 * np.eye(dim)[:1] + 0.25))

    from .embedding import SupportEmbedding

    return ConeStructure(
        name=f"convex_bodies_{metric}",
        element_kind=f"convex polytope in R^{dim}",
        add=polytope_minkowski_sum,
        scale=polytope_scale,
        neutral=zero,
        origin=zero,
        metric=dist,
        claims_pointed=True,
        claims_sub_invariant=True,
        claims_invariant=True,
        claims_second_distributive=True,
        probe_elements=probes,
        embedding=SupportEmbedding(grid=grid, metric=metric, power=power),
        extra={"dim": dim, "metric": metric, "power": power},
    )


def random_polytope(rng: np.random.Generator, dim: int = 2, max_vertices: int = 6) -> Polytope:
    k = int(rng.integers(1, max_vertices + 1))
    pts = rng.normal(size=(k, dim)) * rng.lognormal(sigma=0.5)
    return polytope(pts)


# ---------------------------------------------------------------------------
# weighted-L2 functions with argument rescaling
# ---------------------------------------------------------------------------


def functions_cone() -> ConeStructure:
    """Piecewise-linear compactly supported f with metric (int x (f-g)^2 dx)^(1/2).

    Addition is pointwise, scaling stretches the argument: (a.f)(x) = f(x/a).
    The metric is invariant and homogeneous, but (a+b).f differs from
    a.f + b.f in general, so second distributivity is NOT declared; the
    axiom suite reports the counterexample.
    """
    from .embedding import FunctionEmbedding

    probes = (
        hat_function(1.0, 2.0),
        GridFunction(np.array([0.0, 0.5, 1.5, 3.0]), np.array([0.5, -1.0, 2.0, 0.0])),
        ZERO_FUNCTION,
    )
    return ConeStructure(
        name="functions",
        element_kind="piecewise-linear function on [0, inf)",
        add=gf_add,
        scale=gf_scale,
        neutral=ZERO_FUNCTION,
        origin=ZERO_FUNCTION,
        metric=gf_metric,
        claims_pointed=True,
        claims_sub_invariant=True,
        claims_invariant=True,
        claims_second_distributive=False,
        probe_elements=probes,
        embedding=FunctionEmbedding(),
    )


def random_grid_function(rng: np.random.Generator, max_interior_knots: int = 4) -> GridFunction:
    k = int(rng.integers(1, max_interior_knots + 1))
    interior = np.sort(rng.uniform(0.05, 4.0, size=k))
    interior = np.unique(interior)
    knots = np.concatenate([[0.0], interior])
    values = rng.normal(size=len(knots))
    values[-1] = 0.0
    return GridFunction(knots, values)


# ---------------------------------------------------------------------------
# finite point sets with union
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FinitePointSet:
    """Nonempty finite set of points in R^m, stored as a sorted unique array."""

    points: np.ndarray

    def __post_init__(self):
        p = np.atleast_2d(np.asarray(self.points, dtype=float))
        if p.size == 0 or not np.all(np.isfinite(p)):
            raise ValueError("point set must be nonempty and finite")
        p = np.unique(p, axis=0)
        p.setflags(write=False)
        object.__setattr__(self, "points", p)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __eq__(self, other):
        return isinstance(other, FinitePointSet) and np.array_equal(self.points, other.points)

    def __hash__(self):
        return hash(self.points.tobytes())


def point_set(points) -> FinitePointSet:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    return FinitePointSet(pts)


def hausdorff_point_sets(a: FinitePointSet, b: FinitePointSet) -> float:
    """Exact Hausdorff distance between finite point sets."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"dimension mismatch: {a.dim} vs {b.dim}")
    diff = a.points[:, None, :] - b.points[None, :, :]
    d = np.linalg.norm(diff, axis=2)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def union_cone(dim: int = 1) -> ConeStructure:
    """Finite point sets under union with the Hausdorff metric.

    Add is idempotent.  Sub-invariance is NOT claimed: with A = {10} and
    h = {1} on the line, d(A u h, A) = 9 > ||h|| = 1.  The element {0} acts
    as the origin (limit of a.X as a -> 0) but is not a true neutral for
    sets avoiding 0; theorem runners reject this cone.
    """

    def add(x: FinitePointSet, y: FinitePointSet) -> FinitePointSet:
        return FinitePointSet(np.vstack([x.points, y.points]))

    def scale(a: float, x: FinitePointSet) -> FinitePointSet:
        if a <= 0.0:
            raise ValueError("scaling factor must be positive")
        return FinitePointSet(a * x.points)

    zero = FinitePointSet(np.zeros((1, dim)))
    probes = (point_set(10.0 * np.eye(dim)[:1]), point_set(np.eye(dim)[:1]), zero)
    return ConeStructure(
        name="union",
        element_kind=f"finite point set in R^{dim}",
        add=add,
        scale=scale,
        neutral=zero,
        origin=zero,
        metric=hausdorff_point_sets,
        claims_pointed=True,
        claims_sub_invariant=False,
        claims_invariant=False,
        claims_second_distributive=False,
        probe_elements=probes,
        extra={"dim": dim},
    )


def random_point_set(rng: np.random.Generator, dim: int = 1, max_points: int = 5) -> FinitePointSet:
    k = int(rng.integers(1, max_points + 1))
    return FinitePointSet(rng.normal(size=(k, dim)) * 3.0)


# ---------------------------------------------------------------------------
# element serialization (reports, configs)
# ---------------------------------------------------------------------------


def element_to_jsonable(x):
    if isinstance(x, (float, int)):
        return float(x)
    if isinstance(x, Polytope):
        return {"vertices": x.vertices.tolist()}
    if isinstance(x, GridFunction):
        return {"knots": x.knots.tolist(), "values": x.values.tolist()}
    if isinstance(x, FinitePointSet):
        return {"points": x.points.tolist()}
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"cannot serialize element of type {type(x).__name__}")


def random_element_sampler(cone: ConeStructure):
    """Default element sampler for a cone's axiom suite."""
    name = cone.name
    if name == "max":
        return random_max_element
    if name.startswith("convex_bodies"):
        dim = cone.extra.get("dim", 2)
        return lambda rng: random_polytope(rng, dim=dim)
    if name == "functions":
        return random_grid_function
    if name == "union":
        dim = cone.extra.get("dim", 1)
        return lambda rng: random_point_set(rng, dim=dim)
    raise ValueError(f"no default sampler for cone {name!r}")
