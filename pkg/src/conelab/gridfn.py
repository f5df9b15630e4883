"""Piecewise-linear compactly supported functions on [0, inf).

Elements of the weighted-L2 cone: continuous, linear between knots, zero
beyond the last knot.  The weight x dx makes every segment integrand a cubic
polynomial, so metrics, norms and inner products are computed in closed form
per segment with no quadrature error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GridFunction:
    """Knot/value representation; knots strictly increasing from 0."""

    knots: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.knots, dtype=float).copy()
        v = np.asarray(self.values, dtype=float).copy()
        if k.ndim != 1 or k.shape != v.shape or k.size == 0:
            raise ValueError("knots and values must be equal-length 1-d arrays")
        if k[0] != 0.0:
            raise ValueError("knot list must start at 0")
        if k.size > 1 and not np.all(np.diff(k) > 0.0):
            raise ValueError("knots must be strictly increasing")
        if v[-1] != 0.0:
            raise ValueError("compact support requires the last value to be 0")
        if not (np.all(np.isfinite(k)) and np.all(np.isfinite(v))):
            raise ValueError("knots and values must be finite")
        k.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "knots", k)
        object.__setattr__(self, "values", v)

    def __call__(self, x):
        return np.interp(x, self.knots, self.values, right=0.0)

    def __eq__(self, other):  # representation equality; cones compare by metric
        return (
            isinstance(other, GridFunction)
            and np.array_equal(self.knots, other.knots)
            and np.array_equal(self.values, other.values)
        )

    def __hash__(self):
        return hash((self.knots.tobytes(), self.values.tobytes()))


ZERO_FUNCTION = GridFunction(np.array([0.0]), np.array([0.0]))


def hat_function(rise_end: float = 1.0, support_end: float = 2.0, peak: float = 1.0) -> GridFunction:
    """Triangle rising from 0 to ``peak`` at ``rise_end``, back to 0 at ``support_end``."""
    return GridFunction(np.array([0.0, rise_end, support_end]), np.array([0.0, peak, 0.0]))


def _merged_eval(f: GridFunction, g: GridFunction):
    knots = np.union1d(f.knots, g.knots)
    return knots, f(knots), g(knots)


def gf_add(f: GridFunction, g: GridFunction) -> GridFunction:
    knots, fv, gv = _merged_eval(f, g)
    return GridFunction(knots, fv + gv)


def gf_sub(f: GridFunction, g: GridFunction) -> GridFunction:
    knots, fv, gv = _merged_eval(f, g)
    return GridFunction(knots, fv - gv)


def gf_scale(a: float, f: GridFunction) -> GridFunction:
    """Argument rescaling: (a . f)(x) = f(x / a).  Stretches knots, keeps values."""
    if a <= 0.0:
        raise ValueError("scaling factor must be positive")
    return GridFunction(a * f.knots, f.values)


def weighted_sq_integral(knots: np.ndarray, dvals: np.ndarray) -> float:
    """Exact value of the integral of x * d(x)^2 dx for piecewise-linear d.

    Per segment [x0, x1] with endpoint values d0, d1 and e = d1 - d0, the
    substitution x = x0 + t h (h = x1 - x0) gives
        h * [ x0 (d0^2 + d0 e + e^2/3) + h (d0^2/2 + 2 d0 e / 3 + e^2/4) ].
    """
    if len(knots) < 2:
        return 0.0
    x0 = knots[:-1]
    h = np.diff(knots)
    d0 = dvals[:-1]
    e = np.diff(dvals)
    seg = h * (x0 * (d0 * d0 + d0 * e + e * e / 3.0) + h * (0.5 * d0 * d0 + (2.0 / 3.0) * d0 * e + 0.25 * e * e))
    return float(np.sum(seg))


def weighted_product_integral(knots: np.ndarray, fv: np.ndarray, gv: np.ndarray) -> float:
    """Exact integral of x * f(x) * g(x) dx for piecewise-linear f, g on shared knots."""
    if len(knots) < 2:
        return 0.0
    x0 = knots[:-1]
    h = np.diff(knots)
    f0 = fv[:-1]
    a = np.diff(fv)
    g0 = gv[:-1]
    b = np.diff(gv)
    cross = f0 * b + g0 * a
    seg = h * (x0 * (f0 * g0 + 0.5 * cross + a * b / 3.0) + h * (0.5 * f0 * g0 + cross / 3.0 + 0.25 * a * b))
    return float(np.sum(seg))


def gf_metric(f: GridFunction, g: GridFunction) -> float:
    knots, fv, gv = _merged_eval(f, g)
    return float(np.sqrt(weighted_sq_integral(knots, fv - gv)))


def gf_norm(f: GridFunction) -> float:
    return float(np.sqrt(weighted_sq_integral(f.knots, f.values)))


def gf_inner(f: GridFunction, g: GridFunction) -> float:
    knots, fv, gv = _merged_eval(f, g)
    return weighted_product_integral(knots, fv, gv)


def gf_sum(functions) -> GridFunction:
    """Sum of many grid functions with a single knot merge."""
    functions = list(functions)
    if not functions:
        return ZERO_FUNCTION
    knots = functions[0].knots
    for f in functions[1:]:
        knots = np.union1d(knots, f.knots)
    total = np.zeros_like(knots)
    for f in functions:
        total += f(knots)
    return GridFunction(knots, total)
