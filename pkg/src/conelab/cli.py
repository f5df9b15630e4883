"""Config-driven command line front end.

Subcommands::

    conelab axioms      --config cfg.json --out DIR [--seed S]
    conelab theorem1    --config cfg.json --out DIR [--seed S] [--threads N] [--allow-thin]
    conelab theorem2    --config cfg.json --out DIR [--seed S] [--threads N] [--allow-thin]
    conelab diagnostics --config cfg.json --out DIR [--seed S] [--threads N] [--allow-thin]
    conelab karamata    --config cfg.json --out DIR

Exit codes: 0 success/PASS; 1 declared-axiom failure or verdict FAIL;
2 config error; 3 regime violation; 4 thin Monte Carlo budget (suppressed
by --allow-thin).  Every run writes a manifest next to its outputs and a
rendered figure alongside the delimited files.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
import warnings
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import report as rep
from .axioms import axiom_suite
from .cones import random_element_sampler
from .errors import AxiomViolation, BudgetTooSmall, ConfigError, NotEmbeddable, RegimeViolation
from .experiments import single_big_jump_diag, sumconv_check, theorem1_run, theorem2_run
from .regvar import karamata_branch, karamata_limit, karamata_ratio, truncated_moment_ratio

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_REGIME = 3
EXIT_THIN_BUDGET = 4


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="conelab", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("axioms", "theorem1", "theorem2", "diagnostics", "karamata"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to the JSON config")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        if name in ("theorem1", "theorem2", "diagnostics"):
            p.add_argument("--threads", type=int, default=1, help="worker threads (speed only)")
            p.add_argument("--allow-thin", action="store_true", help="tolerate thin MC budgets")
    return parser


def _experiment_config(args):
    raw = cfgmod.load_json(args.config)
    if args.seed is not None:
        raw["seed"] = int(args.seed)
    cfg = cfgmod.experiment_from_dict(raw)
    return cfg, cfgmod.experiment_config_hash(cfg)


def _write_run_outputs(out: Path, name: str, result, sha: str, manifest: rep.RunManifest):
    paths = {
        "csv": out / f"{name}_rows.csv",
        "dat": out / f"{name}_ratio.dat",
        "summary": out / f"{name}_summary.json",
        "figure": out / f"{name}_ratio.png",
    }
    rep.write_text(paths["csv"], rep.rows_to_csv(result.rows))
    rep.write_text(paths["dat"], rep.rows_to_plot_data(result.rows))
    summary = rep.run_summary(result, sha)
    summary["manifest"] = "manifest.json"
    rep.write_json(paths["summary"], summary)
    rep.render_ratio_figure(result, paths["figure"])
    manifest.outputs.extend(str(p) for p in paths.values())
    return paths


def _finish(out: Path, manifest: rep.RunManifest) -> None:
    manifest.finish()
    rep.write_json(out / "manifest.json", manifest.to_jsonable())


def _thin_rows(result) -> list[int]:
    return [r.n for r in result.rows if not r.exact and (r.successes or 0) < 20]


def cmd_axioms(args) -> int:
    raw = cfgmod.load_json(args.config)
    cone, trials, tol, seed = cfgmod.axioms_from_dict(raw)
    if args.seed is not None:
        seed = args.seed
    out = Path(args.out)
    manifest = rep.RunManifest(config_sha256=cfgmod.config_hash(raw), seed=seed).start()
    code = EXIT_OK
    try:
        report = axiom_suite(cone, random_element_sampler(cone), trials, tol=tol, seed=seed)
    except AxiomViolation as exc:
        report = exc.report
        code = EXIT_FAIL
        print(f"declared axiom failed: {exc.axiom}", file=sys.stderr)
    data = report.to_jsonable() if report is not None else {"error": "no report"}
    rep.write_json(out / "axioms.json", data)
    if report is not None:
        rows = [c.to_jsonable() for c in report.checks]
        for row in rows:
            row.setdefault("counterexample", "")
            row["counterexample"] = str(row["counterexample"])
        rep.write_text(
            out / "axioms.csv",
            rep.table_to_csv(rows, ["axiom", "required", "status", "trials", "counterexample"]),
        )
        manifest.outputs.extend([str(out / "axioms.json"), str(out / "axioms.csv")])
    _finish(out, manifest)
    for check in (report.checks if report is not None else []):
        print(f"{check.axiom:<24s} {'ok' if check.passed else 'FAIL'}"
              f"{'' if check.required else ' (informational)'}")
    return code


def _run_theorem(args, runner, name: str) -> int:
    cfg, sha = _experiment_config(args)
    out = Path(args.out)
    manifest = rep.RunManifest(config_sha256=sha, seed=cfg.seed).start()
    with warnings.catch_warnings():
        warnings.simplefilter("always", BudgetTooSmall)
        result = runner(cfg, threads=args.threads)
    _write_run_outputs(out, name, result, sha, manifest)
    _finish(out, manifest)
    for row in result.rows:
        print(f"n={row.n:<8d} lambda={row.lambda_n:<12.6g} p={row.p_hat:<12.6g} ratio={row.ratio:.4f}"
              f"{' (exact)' if row.exact else ''}")
    print(f"verdict: {'PASS' if result.verdict else 'FAIL'}")
    thin = _thin_rows(result)
    if thin and not args.allow_thin:
        print(f"thin Monte Carlo budget at n={thin} (< 20 successes); "
              "rerun with --allow-thin to accept", file=sys.stderr)
        return EXIT_THIN_BUDGET
    return EXIT_OK if result.verdict else EXIT_FAIL


def cmd_theorem1(args) -> int:
    return _run_theorem(args, theorem1_run, "theorem1")


def cmd_theorem2(args) -> int:
    return _run_theorem(args, theorem2_run, "theorem2")


def cmd_diagnostics(args) -> int:
    cfg, sha = _experiment_config(args)
    out = Path(args.out)
    manifest = rep.RunManifest(config_sha256=sha, seed=cfg.seed).start()
    with warnings.catch_warnings():
        warnings.simplefilter("always", BudgetTooSmall)
        result = theorem1_run(cfg, threads=args.threads)
        sumconv = sumconv_check(cfg, threads=args.threads)
    bigjump = single_big_jump_diag(cfg, result.rows)
    _write_run_outputs(out, "theorem1", result, sha, manifest)
    rep.write_text(out / "sumconv.csv", rep.sumconv_to_csv(sumconv))
    rep.write_text(
        out / "bigjump.csv",
        rep.table_to_csv(
            bigjump,
            ["n", "lambda_n", "p_hat", "single_jump_ref", "rel_gap",
             "gamma_p", "mu_U", "gap_bound_multi_jump", "gap_bound_bulk_drift"],
        ),
    )
    rep.write_json(
        out / "diagnostics_summary.json",
        {
            "config_sha256": sha,
            "sumconv": {
                "verdict": "PASS" if sumconv.verdict else "FAIL",
                "rows": [dataclasses.asdict(r) for r in sumconv.rows],
            },
            "bigjump": bigjump,
            "theorem1_verdict": "PASS" if result.verdict else "FAIL",
        },
    )
    rep.render_sumconv_figure(sumconv, out / "sumconv.png")
    manifest.outputs.extend(
        [str(out / "sumconv.csv"), str(out / "bigjump.csv"),
         str(out / "diagnostics_summary.json"), str(out / "sumconv.png")]
    )
    _finish(out, manifest)
    for r in sumconv.rows:
        extra = f" exact={r.q95_exact:.6g}" if r.q95_exact is not None else ""
        print(f"n={r.n:<8d} q95={r.q95_mc:.6g}{extra}")
    print(f"sum collapse: {'PASS' if sumconv.verdict else 'FAIL'}")
    thin = _thin_rows(result)
    if thin and not args.allow_thin:
        return EXIT_THIN_BUDGET
    ok = result.verdict and sumconv.verdict
    return EXIT_OK if ok else EXIT_FAIL


def cmd_karamata(args) -> int:
    raw = cfgmod.load_json(args.config)
    ratio_checks, moment_checks = cfgmod.karamata_queries(raw)
    out = Path(args.out)
    manifest = rep.RunManifest(config_sha256=cfgmod.config_hash(raw), seed=0).start()
    results = []
    all_ok = True
    for query, x, tolerance in ratio_checks:
        ratio = karamata_ratio(query, x)
        limit = karamata_limit(query)
        ok = abs(ratio - limit) <= tolerance * abs(limit)
        all_ok &= ok
        sweep_x = np.geomspace(max(2.0 * query.a, 2.0), x, 12)
        results.append(
            {
                "branch": karamata_branch(query),
                "beta": query.beta,
                "rho": query.rho,
                "x": x,
                "ratio": ratio,
                "limit": limit,
                "tolerance": tolerance,
                "ok": ok,
                "x_sweep": [float(v) for v in sweep_x],
                "ratio_sweep": [karamata_ratio(query, float(v)) for v in sweep_x],
            }
        )
    moments = []
    for spec, gamma, t_max, tolerance in moment_checks:
        ratio = truncated_moment_ratio(spec, gamma, t_max)
        limit = gamma / (gamma - spec.alpha)
        ok = abs(ratio - limit) <= tolerance * abs(limit)
        all_ok &= ok
        moments.append(
            {"alpha": spec.alpha, "gamma": gamma, "T": t_max,
             "ratio": ratio, "limit": limit, "tolerance": tolerance, "ok": ok}
        )
    table = [
        {"kind": "ratio", "x_or_T": r["x"], "value": r["ratio"], "limit": r["limit"], "ok": r["ok"]}
        for r in results
    ] + [
        {"kind": "truncated_moment", "x_or_T": m["T"], "value": m["ratio"], "limit": m["limit"], "ok": m["ok"]}
        for m in moments
    ]
    rep.write_text(out / "karamata.csv", rep.table_to_csv(table, ["kind", "x_or_T", "value", "limit", "ok"]))
    rep.write_json(
        out / "karamata_summary.json",
        {"verdict": "PASS" if all_ok else "FAIL", "ratio_checks": results, "moment_checks": moments},
    )
    if results:
        rep.render_karamata_figure(results, out / "karamata.png")
        manifest.outputs.append(str(out / "karamata.png"))
    manifest.outputs.extend([str(out / "karamata.csv"), str(out / "karamata_summary.json")])
    _finish(out, manifest)
    for row in table:
        print(f"{row['kind']:<18s} value={row['value']:.6g} limit={row['limit']:.6g} "
              f"{'ok' if row['ok'] else 'FAIL'}")
    return EXIT_OK if all_ok else EXIT_FAIL


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    handlers = {
        "axioms": cmd_axioms,
        "theorem1": cmd_theorem1,
        "theorem2": cmd_theorem2,
        "diagnostics": cmd_diagnostics,
        "karamata": cmd_karamata,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RegimeViolation as exc:
        print(f"regime violation: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except NotEmbeddable as exc:
        print(f"not embeddable: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
