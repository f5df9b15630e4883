"""Property-test harness for the cone axioms.

Every cone is checked against the laws that make it a cone (metric axioms,
homogeneity, first distributivity, commutativity/associativity, pointedness)
and against the optional axioms it declares (sub-invariance, invariance,
second distributivity).  Optional axioms a cone does NOT declare are still
exercised and their failures reported informationally with a counterexample;
a failure of a required or declared axiom raises :class:`AxiomViolation`.

Canonical probe elements are combined deterministically before any random
sampling, so known counterexamples always surface with the same witnesses.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .cone import ConeStructure, norm
from .cones import element_to_jsonable
from .errors import AxiomViolation

# dyadic scale sequence for the pointedness limit; the terminal threshold is
# d(a x, origin) < 1e-6 ||x|| at a = 2^-20
_POINTED_SCALES = 0.5 ** np.arange(21)
_POINTED_THRESHOLD = 1e-6


@dataclass
class AxiomCheck:
    axiom: str
    required: bool
    passed: bool
    trials: int
    counterexample: Optional[dict] = None

    def to_jsonable(self) -> dict:
        out = {
            "axiom": self.axiom,
            "required": self.required,
            "status": "pass" if self.passed else ("fail" if self.required else "fail (undeclared)"),
            "trials": self.trials,
        }
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample
        return out


@dataclass
class AxiomReport:
    cone: str
    tol: float
    checks: list[AxiomCheck] = field(default_factory=list)

    @property
    def declared_ok(self) -> bool:
        return all(c.passed for c in self.checks if c.required)

    def check(self, axiom: str) -> AxiomCheck:
        for c in self.checks:
            if c.axiom == axiom:
                return c
        raise KeyError(axiom)

    def to_jsonable(self) -> dict:
        return {
            "cone": self.cone,
            "tol": self.tol,
            "declared_ok": self.declared_ok,
            "checks": [c.to_jsonable() for c in self.checks],
        }


def _witness(**kwargs) -> dict:
    out = {}
    for key, val in kwargs.items():
        if isinstance(val, (int, float, np.floating)):
            out[key] = float(val)
        else:
            try:
                out[key] = element_to_jsonable(val)
            except TypeError:
                out[key] = repr(val)
    return out


def _scalar(rng: np.random.Generator) -> float:
    return float(np.exp(rng.uniform(np.log(0.1), np.log(10.0))))


def axiom_suite(
    cone: ConeStructure,
    sampler: Callable[[np.random.Generator], object],
    trials: int,
    tol: float = 1e-9,
    seed: int = 0,
) -> AxiomReport:
    """Run all axiom checks over ``trials`` sampled tuples.

    Returns the full report; raises :class:`AxiomViolation` (with the report
    attached) if any required or declared axiom fails.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(90,)))
    report = AxiomReport(cone=cone.name, tol=tol)

    d = cone.metric
    add = cone.add
    scl = cone.scale
    origin = cone.origin

    def rel(*magnitudes) -> float:
        return tol * (1.0 + max([0.0, *magnitudes]))

    probes = list(cone.probe_elements)

    def tuples():
        # deterministic probe tuples first (a = b = 1), then random ones
        for x, y in itertools.product(probes, probes):
            z = probes[0]
            h = probes[min(1, len(probes) - 1)]
            yield 1.0, 1.0, x, y, z, h
        for _ in range(trials):
            yield (
                _scalar(rng),
                _scalar(rng),
                sampler(rng),
                sampler(rng),
                sampler(rng),
                sampler(rng),
            )

    failures: dict[str, dict] = {}
    counts: dict[str, int] = {}

    def record(axiom: str, ok: bool, witness: Callable[[], dict]):
        counts[axiom] = counts.get(axiom, 0) + 1
        if not ok and axiom not in failures:
            failures[axiom] = witness()

    for a, b, x, y, z, h in tuples():
        dxy = d(x, y)
        nx, ny, nh = norm(cone, x), norm(cone, y), norm(cone, h)
        dxx = d(x, x)
        record("metric_nonnegative", dxy >= 0.0, lambda: _witness(x=x, y=y, d=dxy))
        record("metric_identity", dxx <= rel(nx), lambda: _witness(x=x, d=dxx))
        record("metric_symmetry", abs(dxy - d(y, x)) <= rel(dxy), lambda: _witness(x=x, y=y))
        dxz, dyz = d(x, z), d(y, z)
        record(
            "metric_triangle",
            dxz <= dxy + dyz + rel(dxy + dyz),
            lambda: _witness(x=x, y=y, z=z, lhs=dxz, rhs=dxy + dyz),
        )
        dhom = d(scl(a, x), scl(a, y))
        record(
            "homogeneity",
            abs(dhom - a * dxy) <= tol * (1.0 + a * dxy),
            lambda: _witness(a=a, x=x, y=y, lhs=dhom, rhs=a * dxy),
        )
        xy = add(x, y)
        gap1 = d(scl(a, xy), add(scl(a, x), scl(a, y)))
        record(
            "first_distributivity",
            gap1 <= rel(a * (nx + ny)),
            lambda: _witness(a=a, x=x, y=y, gap=gap1),
        )
        record("add_commutativity", d(xy, add(y, x)) <= rel(nx + ny), lambda: _witness(x=x, y=y))
        record(
            "add_associativity",
            d(add(xy, z), add(x, add(y, z))) <= rel(nx + ny + norm(cone, z)),
            lambda: _witness(x=x, y=y, z=z),
        )
        # optional axioms, checked regardless of declaration
        dsub = d(add(x, h), x)
        record("sub_invariance", dsub <= nh + rel(nh), lambda: _witness(x=x, h=h, lhs=dsub, rhs=nh))
        dinv = d(add(x, h), add(y, h))
        record(
            "invariance",
            abs(dinv - dxy) <= rel(dxy),
            lambda: _witness(x=x, y=y, h=h, lhs=dinv, rhs=dxy),
        )
        lhs2 = scl(a + b, x)
        rhs2 = add(scl(a, x), scl(b, x))
        gap2 = d(lhs2, rhs2)
        record(
            "second_distributivity",
            gap2 <= rel((a + b) * nx),
            lambda: _witness(a=a, b=b, x=x, lhs=lhs2, rhs=rhs2, gap=gap2),
        )
        # neutrality is informational only: the union cone's {0} is an origin
        # but not a true neutral for sets avoiding 0
        dneut = d(add(x, cone.neutral), x)
        record("neutral_element", dneut <= rel(nx), lambda: _witness(x=x, gap=dneut))

    # pointedness along the dyadic sequence, on a bounded subsample
    pointed_trials = 0
    for x in probes + [sampler(rng) for _ in range(min(trials, 200))]:
        nx = norm(cone, x)
        if nx <= 0.0:
            continue
        pointed_trials += 1
        dists = np.array([d(scl(float(s), x), origin) for s in _POINTED_SCALES])
        ok = dists[-1] < _POINTED_THRESHOLD * nx and bool(np.all(np.diff(dists) <= rel(nx)))
        record(
            "pointedness",
            ok,
            lambda: _witness(x=x, final=dists[-1], threshold=_POINTED_THRESHOLD * nx),
        )
    counts["pointedness"] = pointed_trials

    required_for = {
        "sub_invariance": cone.claims_sub_invariant,
        "invariance": cone.claims_invariant,
        "second_distributivity": cone.claims_second_distributive,
        "neutral_element": False,
        "pointedness": cone.claims_pointed,
    }
    for axiom, n_trials in counts.items():
        required = required_for.get(axiom, True)
        report.checks.append(
            AxiomCheck(
                axiom=axiom,
                required=required,
                passed=axiom not in failures,
                trials=n_trials,
                counterexample=failures.get(axiom),
            )
        )

    for check in report.checks:
        if check.required and not check.passed:
            raise AxiomViolation(check.axiom, check.counterexample or {}, report=report)
    return report
