"""Exact polytope machinery for the convex-bodies cone.

Polytopes stand in for general convex bodies: Minkowski sums, support
functions and (in the plane) Hausdorff distances all have exact vertex-based
formulas, which keeps the cone axioms testable at tight tolerance.  In R^3
the Hausdorff distance falls back to a support-function sup over a
quasi-uniform direction grid and is reported as approximate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch

# relative tolerance of the planar orientation predicate; vertex coordinates
# are floats, so "exact" hull reduction means exact up to this guard
_ORIENT_RTOL = 1e-12


def _hull_2d(points: np.ndarray) -> np.ndarray:
    """Andrew's monotone chain; returns CCW-ordered extreme points.

    Collinear points interior to an edge are dropped, so the result is
    hull-reduced.  Degenerate inputs (single point, collinear set) reduce to
    the extreme one or two points.
    """
    order = np.lexsort((points[:, 1], points[:, 0]))
    pts = points[order]
    if len(pts) > 1:  # drop exact duplicates of lexicographic neighbors
        keep = np.empty(len(pts), dtype=bool)
        keep[0] = True
        np.any(pts[1:] != pts[:-1], axis=1, out=keep[1:])
        pts = pts[keep]
    if len(pts) <= 2:
        return pts
    scale = float(np.max(np.abs(pts))) + 1.0
    eps = _ORIENT_RTOL * scale * scale

    def build(seq):
        chain: list[np.ndarray] = []
        for p in seq:
            while len(chain) >= 2:
                a, b = chain[-2], chain[-1]
                cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
                if cross <= eps:  # clockwise or collinear: drop middle
                    chain.pop()
                else:
                    break
            chain.append(p)
        return chain

    lower = build(pts)
    upper = build(pts[::-1])
    hull = np.array(lower[:-1] + upper[:-1])
    if len(hull) == 0:  # all points collinear: keep the two extremes
        hull = np.array([pts[0], pts[-1]])
    return hull


def _hull_reduce(points: np.ndarray) -> np.ndarray:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    m = points.shape[1]
    if m == 2:
        return _hull_2d(points)
    if m == 3:
        return _hull_3d(points)
    raise DimensionMismatch(f"polytopes support dimension 2 or 3, got {m}")


def _hull_3d(points: np.ndarray) -> np.ndarray:
    pts = np.unique(points, axis=0)
    if len(pts) <= 3:
        return pts
    try:
        from scipy.spatial import ConvexHull, QhullError

        hull = ConvexHull(pts)
        return pts[np.sort(hull.vertices)]
    except QhullError:
        # affinely degenerate set: drop points expressible as convex
        # combinations of the others (small LP per point; rare path)
        return _lp_reduce(pts)


def _lp_reduce(pts: np.ndarray) -> np.ndarray:
    from scipy.optimize import linprog

    keep = []
    idx = list(range(len(pts)))
    for i in idx:
        others = [j for j in idx if j != i and (j in keep or j > i)]
        if not others:
            keep.append(i)
            continue
        Q = pts[others]
        a_eq = np.vstack([Q.T, np.ones(len(Q))])
        b_eq = np.concatenate([pts[i], [1.0]])
        res = linprog(np.zeros(len(Q)), A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
        if not res.success:  # not a convex combination: extreme point
            keep.append(i)
    return pts[keep]


@dataclass(frozen=True)
class Polytope:
    """Convex polytope stored as a hull-reduced vertex array of shape (k, m)."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        if v.size == 0 or not np.all(np.isfinite(v)):
            raise ValueError("polytope needs a nonempty finite vertex set")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    def __eq__(self, other):  # representation equality; cones compare by metric
        return isinstance(other, Polytope) and np.array_equal(self.vertices, other.vertices)

    def __hash__(self):
        return hash(self.vertices.tobytes())


def polytope(points) -> Polytope:
    """Build a polytope from an arbitrary point cloud (hull reduction applied)."""
    return Polytope(_hull_reduce(np.asarray(points, dtype=float)))


def polytope_minkowski_sum(p: Polytope, q: Polytope) -> Polytope:
    """Hull reduction of all pairwise vertex sums.

    Support functions add under this operation, which is the oracle used by
    the tests.
    """
    if p.dim != q.dim:
        raise DimensionMismatch(f"dimension mismatch: {p.dim} vs {q.dim}")
    sums = p.vertices[:, None, :] + q.vertices[None, :, :]
    return Polytope(_hull_reduce(sums.reshape(-1, p.dim)))


def polytope_scale(a: float, p: Polytope) -> Polytope:
    if a <= 0.0:
        raise ValueError("scaling factor must be positive")
    return Polytope(a * p.vertices)


def support_function(p: Polytope, u: np.ndarray) -> float:
    """max over vertices of <v, u> for a unit direction ``u``."""
    u = np.asarray(u, dtype=float)
    if abs(np.linalg.norm(u) - 1.0) > 1e-12:
        raise ValueError("support direction must have unit length")
    return float(np.max(p.vertices @ u))


def support_values(p: Polytope, directions: np.ndarray) -> np.ndarray:
    """Support function on a whole direction grid (no unit-length check)."""
    return np.max(p.vertices @ directions.T, axis=0)


def _edge_data(poly: Polytope):
    """Cached (starts, seg, seg_len2) arrays of the polygon boundary."""
    cached = getattr(poly, "_edge_cache", None)
    if cached is not None:
        return cached
    verts = poly.vertices
    if len(verts) == 2:
        starts, ends = verts[:1], verts[1:]
    else:
        starts = verts
        ends = np.concatenate([verts[1:], verts[:1]])
    seg = ends - starts
    seg_len2 = np.maximum(seg[:, 0] ** 2 + seg[:, 1] ** 2, 1e-300)
    cached = (starts, seg, seg_len2)
    object.__setattr__(poly, "_edge_cache", cached)
    return cached


def _point_polygon_dist(points: np.ndarray, poly: Polytope) -> np.ndarray:
    """Euclidean distance from each point to a convex polygon (0 inside)."""
    verts = poly.vertices
    k = len(verts)
    if k == 1:
        d = points - verts[0]
        return np.sqrt(d[:, 0] ** 2 + d[:, 1] ** 2)
    starts, seg, seg_len2 = _edge_data(poly)
    dx = points[:, None, 0] - starts[None, :, 0]         # (p, e)
    dy = points[:, None, 1] - starts[None, :, 1]
    t = np.clip((dx * seg[None, :, 0] + dy * seg[None, :, 1]) / seg_len2, 0.0, 1.0)
    ex = dx - t * seg[None, :, 0]
    ey = dy - t * seg[None, :, 1]
    d_edges = np.sqrt(np.min(ex * ex + ey * ey, axis=1))
    if k == 2:
        return d_edges
    # interior points of a CCW polygon lie left of every edge
    cross = seg[None, :, 0] * dy - seg[None, :, 1] * dx
    inside = np.all(cross >= -1e-12 * np.max(seg_len2), axis=1)
    return np.where(inside, 0.0, d_edges)


def hausdorff_distance(p: Polytope, q: Polytope, grid: "DirectionGrid | None" = None) -> float:
    """Hausdorff distance between convex polytopes.

    Exact in the plane (vertex-to-polygon distances; the maximum of a convex
    function over a polytope sits at a vertex).  In R^3 it is the sup of
    |h_P - h_Q| over a quasi-uniform direction grid (default 2562 directions)
    and therefore approximate, with error O(diam / sqrt(N)).
    """
    if p.dim != q.dim:
        raise DimensionMismatch(f"dimension mismatch: {p.dim} vs {q.dim}")
    if p.dim == 2:
        d_pq = np.max(_point_polygon_dist(p.vertices, q))
        d_qp = np.max(_point_polygon_dist(q.vertices, p))
        return float(max(d_pq, d_qp))
    grid = grid if grid is not None else icosphere_grid()
    return float(np.max(np.abs(support_values(p, grid.directions) - support_values(q, grid.directions))))


def lp_support_distance(p: Polytope, q: Polytope, power: float, grid: "DirectionGrid") -> float:
    """Weighted-Lp distance of support functions over a quadrature grid.

    Invariant and homogeneous by construction; with the grid fixed this is
    the cone metric itself, not an approximation of something else.
    """
    if p.dim != q.dim:
        raise DimensionMismatch(f"dimension mismatch: {p.dim} vs {q.dim}")
    if power < 1.0:
        raise ValueError("Lp exponent must satisfy p >= 1")
    diff = np.abs(support_values(p, grid.directions) - support_values(q, grid.directions))
    return float(np.sum(grid.weights * diff**power) ** (1.0 / power))


@dataclass(frozen=True)
class DirectionGrid:
    """Unit directions plus quadrature weights summing to the sphere measure."""

    directions: np.ndarray  # (N, m)
    weights: np.ndarray     # (N,)

    def __post_init__(self):
        d = np.asarray(self.directions, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        d.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "directions", d)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.directions.shape[1]


def circle_grid(n_directions: int = 256) -> DirectionGrid:
    """Equally spaced directions on the unit circle, weights summing to 2*pi."""
    theta = 2.0 * np.pi * np.arange(n_directions) / n_directions
    dirs = np.column_stack([np.cos(theta), np.sin(theta)])
    return DirectionGrid(dirs, np.full(n_directions, 2.0 * np.pi / n_directions))


def icosphere_grid(level: int = 4) -> DirectionGrid:
    """Subdivided icosahedron directions (level 4 gives 2562 of them).

    Weights are uniform and sum to 4*pi; the grid is quasi-uniform, which is
    enough for the approximate R^3 paths.
    """
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
            [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
            [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
        ],
        dtype=float,
    )
    verts /= np.linalg.norm(verts, axis=1, keepdims=True)
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    verts = [v for v in verts]
    cache: dict[tuple[int, int], int] = {}

    def midpoint(i, j):
        key = (min(i, j), max(i, j))
        if key not in cache:
            m = verts[i] + verts[j]
            m /= np.linalg.norm(m)
            verts.append(m)
            cache[key] = len(verts) - 1
        return cache[key]

    for _ in range(level):
        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    dirs = np.array(verts)
    return DirectionGrid(dirs, np.full(len(dirs), 4.0 * np.pi / len(dirs)))
