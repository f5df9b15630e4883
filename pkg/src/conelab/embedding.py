"""Additive isometric embeddings into linear spaces.

Convex bodies embed through their support function sampled on a fixed
direction grid; the weighted-L2 functions cone embeds as itself (its
addition is already linear).  Embedded vectors support subtraction, which
the cones themselves lack, and carry the centering sequences of the
shifted-event experiments.

For the Lp polytope metric the embedding is exactly isometric (the metric is
defined on the same grid); for the Hausdorff metric the grid sup-norm
matches the exact distance only up to grid resolution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import DirectionGrid, Polytope, support_values
from .gridfn import GridFunction, gf_add, gf_inner, gf_norm, gf_sub


@dataclass(frozen=True)
class SupportEmbedding:
    """I(P) = support function of P on a fixed grid; vectors are ndarrays."""

    grid: DirectionGrid
    metric: str = "hausdorff"  # which norm the embedded space carries
    power: float = 2.0

    def embed(self, p: Polytope) -> np.ndarray:
        return support_values(p, self.grid.directions)

    def add(self, u, v):
        return u + v

    def sub(self, u, v):
        return u - v

    def scale(self, a: float, u):
        return a * u

    def zero(self):
        return np.zeros(len(self.grid.directions))

    def norm(self, u) -> float:
        if self.metric == "hausdorff":
            return float(np.max(np.abs(u)))
        return float(np.sum(self.grid.weights * np.abs(u) ** self.power) ** (1.0 / self.power))

    def support_at(self, u, direction: np.ndarray) -> float:
        """Value of an embedded vector at an arbitrary unit direction.

        Exact when the direction lies on the grid; otherwise interpolated
        along the circle (dim 2) or taken from the nearest grid direction
        (dim 3, approximate).
        """
        dirs = self.grid.directions
        if dirs.shape[1] == 2:
            theta = np.arctan2(dirs[:, 1], dirs[:, 0])
            t = np.arctan2(direction[1], direction[0])
            return float(np.interp(t, theta, np.asarray(u), period=2.0 * np.pi))
        nearest = int(np.argmax(dirs @ direction))
        return float(np.asarray(u)[nearest])

    def mean(self, vectors: np.ndarray) -> np.ndarray:
        return np.mean(vectors, axis=0)


@dataclass(frozen=True)
class FunctionEmbedding:
    """Identity embedding: the cone's addition is already the linear one."""

    def embed(self, f: GridFunction) -> GridFunction:
        return f

    def add(self, u, v):
        return gf_add(u, v)

    def sub(self, u, v):
        return gf_sub(u, v)

    def scale(self, a: float, u):
        # linear scaling of values, NOT the cone's argument rescaling
        return GridFunction(u.knots, a * u.values)

    def zero(self):
        from .gridfn import ZERO_FUNCTION

        return ZERO_FUNCTION

    def norm(self, u) -> float:
        return gf_norm(u)

    def inner(self, u, v) -> float:
        return gf_inner(u, v)
