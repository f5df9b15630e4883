"""Abstract convex-cone contract and the norm/direction calculus.

A cone is a commutative semigroup with a neutral element, an action of the
positive reals satisfying the first distributivity law, and a homogeneous
metric.  Everything downstream (sampling, experiments) talks to cones only
through the :class:`ConeStructure` record, so the same machinery drives the
half-line with maximum, convex bodies under Minkowski addition, weighted-L2
functions under argument rescaling, and finite point sets under union.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from .errors import ZeroNorm

#: below this norm an element counts as sitting at the origin
ORIGIN_THRESHOLD = 1e-12

#: default tolerance for metric equality of cone elements
EQUALITY_TOL = 1e-9


@dataclass(frozen=True)
class ConeStructure:
    """Bundle of cone operations plus declared axiom flags.

    ``add`` must be associative and commutative, ``scale`` an action of the
    positive reals with ``scale(a, scale(b, x)) == scale(a*b, x)``, and
    ``metric`` a homogeneous metric.  The ``claims_*`` flags declare which
    optional axioms the cone asserts; the axiom suite validates declarations
    and merely reports failures of undeclared ones.

    ``probe_elements`` are canonical elements checked deterministically
    before any random sampling, so known counterexamples (and regression
    anchors) always surface with the same witnesses.
    """

    name: str
    element_kind: str
    add: Callable[[Any, Any], Any]
    scale: Callable[[float, Any], Any]
    neutral: Any
    origin: Any
    metric: Callable[[Any, Any], float]
    claims_pointed: bool = True
    claims_sub_invariant: bool = False
    claims_invariant: bool = False
    claims_second_distributive: bool = False
    probe_elements: tuple = ()
    embedding: Optional[Any] = None  # set by factories of embeddable cones
    extra: dict = field(default_factory=dict, compare=False)

    def equal(self, x, y, tol: float = EQUALITY_TOL) -> bool:
        """Metric equality within ``tol`` (relative above unit magnitude)."""
        d = self.metric(x, y)
        scale = max(self.metric(x, self.origin), self.metric(y, self.origin), 1.0)
        return d <= tol * scale


def norm(cone: ConeStructure, x) -> float:
    """Distance to the origin; zero exactly at the origin."""
    return float(cone.metric(x, cone.origin))


def direction(cone: ConeStructure, x):
    """Rescale ``x`` to the unit sphere.

    Raises :class:`ZeroNorm` when the norm falls below ``ORIGIN_THRESHOLD``.
    By homogeneity the result has norm one up to roundoff.
    """
    n = norm(cone, x)
    if n <= ORIGIN_THRESHOLD:
        raise ZeroNorm(f"cannot take direction of a near-origin element (norm={n!r})")
    return cone.scale(1.0 / n, x)


class DirectionPredicate:
    """Measurable predicate over unit-norm cone elements.

    Concrete predicates must be pure and deterministic.  ``test`` evaluates
    on a unit-norm cone element; predicates that make sense on embedded
    vectors additionally implement ``test_embedded``.
    """

    kind: str = "abstract"

    def test(self, cone: ConeStructure, unit_element) -> bool:
        raise NotImplementedError

    def test_embedded(self, embedding, unit_vector) -> bool:
        raise NotImplementedError(f"{self.kind} predicate has no embedded form")


@dataclass(frozen=True)
class FullSphere(DirectionPredicate):
    """Accepts every direction."""

    kind: str = "full_sphere"

    def test(self, cone, unit_element) -> bool:
        return True

    def test_embedded(self, embedding, unit_vector) -> bool:
        return True


@dataclass(frozen=True)
class SupportThreshold(DirectionPredicate):
    """Convex bodies: support function at ``u0`` at least ``c``."""

    u0: tuple
    c: float
    kind: str = "support_threshold"

    def test(self, cone, unit_element) -> bool:
        from .geometry import support_function

        return support_function(unit_element, np.asarray(self.u0, dtype=float)) >= self.c

    def test_embedded(self, embedding, unit_vector) -> bool:
        return embedding.support_at(unit_vector, np.asarray(self.u0, dtype=float)) >= self.c


@dataclass(frozen=True)
class CoordinateThreshold(DirectionPredicate):
    """Half-line with maximum: element value at least ``c``.

    The unit sphere there is the single point 1, so any ``c <= 1`` makes the
    predicate full.
    """

    c: float
    kind: str = "coordinate_threshold"

    def test(self, cone, unit_element) -> bool:
        return float(unit_element) >= self.c


@dataclass(frozen=True)
class CorrelationThreshold(DirectionPredicate):
    """Weighted-L2 functions: normalized inner product with a template."""

    template: Any  # GridFunction
    theta: float
    kind: str = "correlation_threshold"

    def _correlate(self, f) -> float:
        from .gridfn import gf_inner, gf_norm

        tn = gf_norm(self.template)
        fn = gf_norm(f)
        if tn <= 0.0 or fn <= 0.0:
            return -np.inf
        return gf_inner(f, self.template) / (tn * fn)

    def test(self, cone, unit_element) -> bool:
        return self._correlate(unit_element) >= self.theta

    def test_embedded(self, embedding, unit_vector) -> bool:
        # functions-cone embedding keeps the grid-function representation
        return self._correlate(unit_vector) >= self.theta


@dataclass(frozen=True)
class PolarEvent:
    """Target set {x : ||x|| > r, direction(x) in B}, bounded away from 0."""

    r: float
    predicate: DirectionPredicate

    def __post_init__(self):
        if not (self.r > 0.0 and np.isfinite(self.r)):
            raise ValueError(f"event radius must be positive and finite, got {self.r!r}")


def event_member(cone: ConeStructure, x, event: PolarEvent, lam: float = 1.0) -> bool:
    """Membership of ``x`` in ``lam * event`` (strict radial inequality)."""
    if lam <= 0.0:
        raise ValueError("scaling factor must be positive")
    n = norm(cone, x)
    if not n > lam * event.r:
        return False
    return event.predicate.test(cone, cone.scale(1.0 / n, x))
