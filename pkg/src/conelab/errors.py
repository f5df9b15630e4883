"""Exception and warning types shared across the package."""

from __future__ import annotations


class ConelabError(Exception):
    """Base class for all conelab errors."""


class ZeroNorm(ConelabError):
    """Direction requested for an element at (or numerically at) the origin."""


class DimensionMismatch(ConelabError):
    """Operands live in spaces of different dimension."""


class AxiomViolation(ConelabError):
    """A required cone axiom failed on a concrete witness.

    Carries the axiom name, the witnessing data and, when raised by the
    axiom suite, the full report gathered up to that point.
    """

    def __init__(self, axiom: str, counterexample: dict, report=None):
        self.axiom = axiom
        self.counterexample = counterexample
        self.report = report
        super().__init__(f"axiom {axiom!r} failed: {counterexample}")


class SpectralNormViolation(ConelabError):
    """A spectral sampler produced an element too far from unit norm."""


class DegenerateTail(ConelabError):
    """Tail probability vanished where a positive value is required."""


class RegimeViolation(ConelabError):
    """A normalizing-sequence schedule violates the growth regime it claims."""

    def __init__(self, condition: str):
        self.condition = condition
        super().__init__(condition)


class NotEmbeddable(ConelabError):
    """The cone has no additive isometric embedding into a linear space."""


class PredicateUnsupported(ConelabError):
    """A direction predicate cannot be evaluated in the requested context."""


class IntegralDiverges(ConelabError):
    """A tail integral fails its integrability proviso."""


class ConfigError(ConelabError):
    """An experiment configuration is malformed or inconsistent."""


class BudgetTooSmall(UserWarning):
    """Monte Carlo budget produced too few successes for a stable estimate."""
