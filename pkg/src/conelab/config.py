"""JSON configuration schema and (de)serialization.

The experiment config file looks like::

    {
      "cone":     {"kind": "max"}
                  | {"kind": "convex_bodies", "dim": 2, "metric": "hausdorff",
                     "power": 2.0, "directions": 256}
                  | {"kind": "functions"}
                  | {"kind": "union", "dim": 1},
      "radial":   {"alpha": 1.5, "t_min": 1.0,
                   "slowly_varying": {"kind": "constant", "c": 1.0}
                                     | {"kind": "log_power", "kappa": 1.0, "c": 1.0}},
      "spectral": {"preset": "rotated-segment", "params": {}},
      "event":    {"r": 1.0, "predicate": {"kind": "full_sphere"}},
      "sigma_b":  1.0 | {"estimate": 100000},
      "schedule": {"kind": "power", "exponent": 1.4, "coeff": 1.0},
      "n_grid":   [100, 10000],
      "trials":   1000000,
      "seed":     42,
      "regime":   "theorem1",
      "centering": {"kind": "zero"}
                   | {"kind": "embedded_mean_analytic", "payload": ...}
                   | {"kind": "embedded_mean_mc", "samples": 1000000},
      "band":     [0.7, 1.3]
    }

Predicate kinds: ``full_sphere``; ``support_threshold`` {u0, c};
``coordinate_threshold`` {c}; ``correlation_threshold`` {template, theta}
with the template as a {knots, values} grid function.

Axiom-suite configs carry {cone, trials, tol, seed} plus an optional
``claims_override`` of flag overrides.  Karamata configs carry a list of
ratio queries and truncated-moment checks (see ``karamata_queries``).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import replace

import numpy as np

from .cone import (
    CoordinateThreshold,
    CorrelationThreshold,
    FullSphere,
    PolarEvent,
    SupportThreshold,
)
from .cones import convex_bodies_cone, functions_cone, max_cone, union_cone
from .errors import ConfigError
from .experiments import CenteringSpec, ExperimentConfig
from .gridfn import GridFunction
from .regvar import Constant, KaramataQuery, LogPower, PowerSchedule, RegVarSpec, SpectralSpec


def load_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def canonical_json(data) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def config_hash(data) -> str:
    return hashlib.sha256(canonical_json(data).encode()).hexdigest()


# ---------------------------------------------------------------------------
# cone
# ---------------------------------------------------------------------------


def cone_from_dict(d: dict):
    kind = d.get("kind")
    if kind == "max":
        return max_cone()
    if kind == "convex_bodies":
        return convex_bodies_cone(
            dim=int(d.get("dim", 2)),
            metric=d.get("metric", "hausdorff"),
            power=float(d.get("power", 2.0)),
            n_directions=int(d["directions"]) if "directions" in d else None,
        )
    if kind == "functions":
        return functions_cone()
    if kind == "union":
        return union_cone(dim=int(d.get("dim", 1)))
    raise ConfigError(f"unknown cone kind {kind!r}")


def cone_to_dict(cone) -> dict:
    if cone.name == "max":
        return {"kind": "max"}
    if cone.name.startswith("convex_bodies"):
        return {
            "kind": "convex_bodies",
            "dim": cone.extra["dim"],
            "metric": cone.extra["metric"],
            "power": cone.extra["power"],
            "directions": len(cone.embedding.grid.directions),
        }
    if cone.name == "functions":
        return {"kind": "functions"}
    if cone.name == "union":
        return {"kind": "union", "dim": cone.extra["dim"]}
    raise ConfigError(f"cone {cone.name!r} has no serialized form")


# ---------------------------------------------------------------------------
# radial law / spectral sampler
# ---------------------------------------------------------------------------


def regvar_from_dict(radial: dict, spectral: dict | None = None) -> RegVarSpec:
    sv = radial.get("slowly_varying", {"kind": "constant"})
    if sv.get("kind") == "constant":
        factor = Constant(c=float(sv.get("c", 1.0)))
    elif sv.get("kind") == "log_power":
        factor = LogPower(kappa=float(sv["kappa"]), c=float(sv.get("c", 1.0)))
    else:
        raise ConfigError(f"unknown slowly varying kind {sv.get('kind')!r}")
    spectral = spectral or {"preset": "point-mass-direction"}
    return RegVarSpec(
        alpha=float(radial["alpha"]),
        t_min=float(radial.get("t_min", 1.0)),
        slowly_varying=factor,
        spectral=SpectralSpec(spectral["preset"], dict(spectral.get("params", {}))),
    )


def regvar_to_dicts(spec: RegVarSpec) -> tuple[dict, dict]:
    if isinstance(spec.slowly_varying, Constant):
        sv = {"kind": "constant", "c": spec.slowly_varying.c}
    else:
        sv = {"kind": "log_power", "kappa": spec.slowly_varying.kappa, "c": spec.slowly_varying.c}
    radial = {"alpha": spec.alpha, "t_min": spec.t_min, "slowly_varying": sv}
    spectral = {"preset": spec.spectral.preset, "params": dict(spec.spectral.params)}
    return radial, spectral


# ---------------------------------------------------------------------------
# predicates and events
# ---------------------------------------------------------------------------


def gridfunction_from_dict(d: dict) -> GridFunction:
    return GridFunction(np.asarray(d["knots"], dtype=float), np.asarray(d["values"], dtype=float))


def gridfunction_to_dict(f: GridFunction) -> dict:
    return {"knots": f.knots.tolist(), "values": f.values.tolist()}


def predicate_from_dict(d: dict):
    kind = d.get("kind")
    if kind == "full_sphere":
        return FullSphere()
    if kind == "support_threshold":
        return SupportThreshold(u0=tuple(float(v) for v in d["u0"]), c=float(d["c"]))
    if kind == "coordinate_threshold":
        return CoordinateThreshold(c=float(d["c"]))
    if kind == "correlation_threshold":
        return CorrelationThreshold(template=gridfunction_from_dict(d["template"]), theta=float(d["theta"]))
    raise ConfigError(f"unknown predicate kind {kind!r}")


def predicate_to_dict(pred) -> dict:
    if isinstance(pred, FullSphere):
        return {"kind": "full_sphere"}
    if isinstance(pred, SupportThreshold):
        return {"kind": "support_threshold", "u0": list(pred.u0), "c": pred.c}
    if isinstance(pred, CoordinateThreshold):
        return {"kind": "coordinate_threshold", "c": pred.c}
    if isinstance(pred, CorrelationThreshold):
        return {"kind": "correlation_threshold", "template": gridfunction_to_dict(pred.template), "theta": pred.theta}
    raise ConfigError(f"predicate {pred!r} has no serialized form")


def event_from_dict(d: dict) -> PolarEvent:
    return PolarEvent(r=float(d["r"]), predicate=predicate_from_dict(d["predicate"]))


def event_to_dict(event: PolarEvent) -> dict:
    return {"r": event.r, "predicate": predicate_to_dict(event.predicate)}


# ---------------------------------------------------------------------------
# experiment config
# ---------------------------------------------------------------------------


def _centering_from_dict(d: dict | None, cone) -> CenteringSpec:
    if d is None:
        return CenteringSpec()
    kind = d.get("kind", "zero")
    if kind == "zero":
        return CenteringSpec()
    if kind == "embedded_mean_analytic":
        payload = d["payload"]
        if isinstance(payload, dict) and "knots" in payload:
            payload = gridfunction_from_dict(payload)
        else:
            payload = np.asarray(payload, dtype=float)
        return CenteringSpec(kind=kind, payload=payload)
    if kind == "embedded_mean_mc":
        return CenteringSpec(kind=kind, samples=int(d.get("samples", 1_000_000)))
    raise ConfigError(f"unknown centering kind {kind!r}")


def _centering_to_dict(c: CenteringSpec) -> dict:
    if c.kind == "zero":
        return {"kind": "zero"}
    if c.kind == "embedded_mean_analytic":
        payload = c.payload
        if isinstance(payload, GridFunction):
            payload = gridfunction_to_dict(payload)
        else:
            payload = np.asarray(payload).tolist()
        return {"kind": c.kind, "payload": payload}
    return {"kind": c.kind, "samples": c.samples}


def experiment_from_dict(d: dict) -> ExperimentConfig:
    try:
        cone = cone_from_dict(d["cone"])
        spec = regvar_from_dict(d["radial"], d.get("spectral"))
        event = event_from_dict(d["event"])
        sigma_b = d.get("sigma_b", 1.0)
        if isinstance(sigma_b, dict):
            sigma_b = ("estimate", int(sigma_b["estimate"]))
        else:
            sigma_b = float(sigma_b)
        sched = d["schedule"]
        if sched.get("kind", "power") != "power":
            raise ConfigError(f"unknown schedule kind {sched.get('kind')!r}")
        schedule = PowerSchedule(exponent=float(sched["exponent"]), coeff=float(sched.get("coeff", 1.0)))
        return ExperimentConfig(
            cone=cone,
            spec=spec,
            event=event,
            sigma_b=sigma_b,
            schedule=schedule,
            n_grid=tuple(int(n) for n in d["n_grid"]),
            trials=int(d["trials"]),
            seed=int(d["seed"]),
            regime=d["regime"],
            centering=_centering_from_dict(d.get("centering"), cone),
            band=tuple(float(b) for b in d.get("band", (0.7, 1.3))),
        )
    except KeyError as exc:
        raise ConfigError(f"missing config key: {exc}") from exc


def experiment_to_dict(cfg: ExperimentConfig) -> dict:
    radial, spectral = regvar_to_dicts(cfg.spec)
    sigma_b = cfg.sigma_b
    if isinstance(sigma_b, tuple):
        sigma_b = {"estimate": sigma_b[1]}
    return {
        "cone": cone_to_dict(cfg.cone),
        "radial": radial,
        "spectral": spectral,
        "event": event_to_dict(cfg.event),
        "sigma_b": sigma_b,
        "schedule": {"kind": "power", "exponent": cfg.schedule.exponent, "coeff": cfg.schedule.coeff},
        "n_grid": list(cfg.n_grid),
        "trials": cfg.trials,
        "seed": cfg.seed,
        "regime": cfg.regime,
        "centering": _centering_to_dict(cfg.centering),
        "band": list(cfg.band),
    }


def experiment_config_hash(cfg: ExperimentConfig) -> str:
    return config_hash(experiment_to_dict(cfg))


# ---------------------------------------------------------------------------
# axiom-suite config
# ---------------------------------------------------------------------------


def axioms_from_dict(d: dict):
    """Returns (cone, trials, tol, seed); claims_override patches the flags."""
    try:
        cone = cone_from_dict(d["cone"])
    except KeyError as exc:
        raise ConfigError(f"missing config key: {exc}") from exc
    override = d.get("claims_override", {})
    valid = {"claims_pointed", "claims_sub_invariant", "claims_invariant", "claims_second_distributive"}
    unknown = set(override) - valid
    if unknown:
        raise ConfigError(f"unknown claim overrides: {sorted(unknown)}")
    if override:
        cone = replace(cone, **{k: bool(v) for k, v in override.items()})
    return cone, int(d.get("trials", 1000)), float(d.get("tol", 1e-9)), int(d.get("seed", 0))


# ---------------------------------------------------------------------------
# karamata config
# ---------------------------------------------------------------------------


def karamata_queries(d: dict):
    """Parse ratio queries and truncated-moment checks from a config dict.

    Returns (ratio_checks, moment_checks) where each ratio check is
    (KaramataQuery, x, tolerance) and each moment check is
    (RegVarSpec, gamma, T, tolerance).
    """
    ratio_checks = []
    for item in d.get("karamata", []):
        fd = item["f"]
        kind = fd.get("kind")
        if kind == "power":
            rho = float(fd["rho"])
            f = lambda t, _r=rho: t**_r
            log_power = 0.0
        elif kind == "power_log":
            rho = float(fd["rho"])
            kappa = float(fd["kappa"])
            f = lambda t, _r=rho, _k=kappa: t**_r * (1.0 + np.log(t)) ** _k
            log_power = kappa
        elif kind == "radial_tail":
            from .regvar import tail_prob

            spec = regvar_from_dict(fd["radial"])
            rho = -spec.alpha
            f = lambda t, _s=spec: tail_prob(_s, t)
            log_power = spec.slowly_varying.kappa if isinstance(spec.slowly_varying, LogPower) else 0.0
        else:
            raise ConfigError(f"unknown integrand kind {kind!r}")
        query = KaramataQuery(
            f=f, rho=rho, beta=float(item["beta"]), a=float(item.get("a", 1.0)), log_power=log_power
        )
        ratio_checks.append((query, float(item["x"]), float(item.get("tolerance", 0.005))))

    moment_checks = []
    for item in d.get("truncated_moments", []):
        spec = regvar_from_dict(item["radial"])
        moment_checks.append(
            (spec, float(item["gamma"]), float(item["T"]), float(item.get("tolerance", 0.01)))
        )
    return ratio_checks, moment_checks
