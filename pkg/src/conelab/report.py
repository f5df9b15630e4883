"""Run outputs: CSV rows, gnuplot data, JSON summaries, manifests, figures.

CSV bytes are reproducible for a fixed (config, seed): floats are written
with shortest round-trip repr, rows in n order, newline-terminated lines.
Timestamps live only in the manifest.  Each run also renders a small
matplotlib figure next to the delimited output.
"""

from __future__ import annotations

import datetime as _dt
import json
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .experiments import EstimateRow, RunResult, SumconvReport


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def rows_to_csv(rows) -> str:
    lines = [",".join(EstimateRow.CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row.csv_values()))
    return "\n".join(lines) + "\n"


def rows_to_plot_data(rows) -> str:
    """Two-column n-versus-ratio file, directly plottable by gnuplot."""
    lines = ["# n ratio"]
    for row in rows:
        lines.append(f"{row.n} {_fmt(row.ratio)}")
    return "\n".join(lines) + "\n"


def sumconv_to_csv(report: SumconvReport) -> str:
    header = ["n", "lambda_n", "q95_mc", "q95_exact", "alpha1_column"]
    lines = [",".join(header)]
    for r in report.rows:
        vals = [r.n, r.lambda_n, r.q95_mc,
                "" if r.q95_exact is None else _fmt(r.q95_exact),
                "" if r.alpha1_column is None else _fmt(r.alpha1_column)]
        lines.append(",".join(_fmt(v) if not isinstance(v, str) else v for v in vals))
    return "\n".join(lines) + "\n"


def table_to_csv(rows: list, columns: list[str]) -> str:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(row[c]) for c in columns))
    return "\n".join(lines) + "\n"


@dataclass
class RunManifest:
    config_sha256: str
    seed: int
    tool_version: str = __version__
    started_utc: str = ""
    finished_utc: str = ""
    outputs: list = field(default_factory=list)

    def start(self):
        self.started_utc = _dt.datetime.now(_dt.timezone.utc).isoformat()
        return self

    def finish(self):
        self.finished_utc = _dt.datetime.now(_dt.timezone.utc).isoformat()
        return self

    def to_jsonable(self) -> dict:
        return {
            "config_sha256": self.config_sha256,
            "tool_version": self.tool_version,
            "seed": self.seed,
            "started_utc": self.started_utc,
            "finished_utc": self.finished_utc,
            "outputs": list(self.outputs),
        }


def write_text(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def write_json(path: Path, data):
    write_text(path, json.dumps(data, indent=2, sort_keys=True) + "\n")


def run_summary(result: RunResult, config_sha: str) -> dict:
    out = {
        "config_sha256": config_sha,
        "regime": result.regime,
        "verdict": "PASS" if result.verdict else "FAIL",
        "band": list(result.band),
        "sigma_b": result.sigma_b,
        "warnings": list(result.warnings),
        "regime_check": {
            "exponent": result.regime_report.exponent,
            "required_above": result.regime_report.threshold,
            "valid": result.regime_report.valid,
        },
        "rows": [
            {c: v for c, v in zip(EstimateRow.CSV_COLUMNS, r.csv_values())} for r in result.rows
        ],
    }
    if result.cond4 is not None:
        out["cond4"] = {
            "values": [[n, v] for n, v in result.cond4.values],
            "decreasing": result.cond4.decreasing,
            "final_below_threshold": result.cond4.final_below_threshold,
            "threshold": result.cond4.threshold,
        }
    if result.centering_sem is not None:
        out["centering_sem"] = result.centering_sem
    if getattr(result.regime_report, "extra_condition", None):
        out["alpha1_condition"] = [[n, v] for n, v in result.regime_report.extra_condition]
    return out


# ---------------------------------------------------------------------------
# figures
# ---------------------------------------------------------------------------


def _plt():
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    return plt


def render_ratio_figure(result: RunResult, path: Path):
    plt = _plt()
    ns = [r.n for r in result.rows]
    ratios = [r.ratio for r in result.rows]
    lo = [r.gamma_n * r.ci_lo / r.mu_u if r.mu_u > 0 else 0.0 for r in result.rows]
    hi = [r.gamma_n * r.ci_hi / r.mu_u if r.mu_u > 0 else 0.0 for r in result.rows]
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.axhspan(result.band[0], result.band[1], color="tab:green", alpha=0.12, label="verdict band")
    ax.axhline(1.0, color="gray", lw=0.8)
    yerr = [[r - l for r, l in zip(ratios, lo)], [h - r for h, r in zip(hi, ratios)]]
    ax.errorbar(ns, ratios, yerr=yerr, fmt="o-", capsize=3, color="tab:blue", label="normalized estimate")
    ax.set_xscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("ratio to tail-measure mass")
    ax.set_title(f"{result.regime}: {'PASS' if result.verdict else 'FAIL'}")
    ax.legend(fontsize=8)
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_sumconv_figure(report: SumconvReport, path: Path):
    plt = _plt()
    ns = [r.n for r in report.rows]
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.loglog(ns, [r.q95_mc for r in report.rows], "o-", label="0.95 quantile (MC)")
    if any(r.q95_exact is not None for r in report.rows):
        ax.loglog(ns, [r.q95_exact for r in report.rows], "s--", label="0.95 quantile (closed form)")
    ax.axhline(report.threshold, color="tab:red", lw=0.8, label="threshold")
    ax.set_xlabel("n")
    ax.set_ylabel("norm of the partial sum / lambda_n")
    ax.set_title(f"sum collapse: {'PASS' if report.verdict else 'FAIL'}")
    ax.legend(fontsize=8)
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_karamata_figure(results: list[dict], path: Path):
    plt = _plt()
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    for i, res in enumerate(results):
        ax.semilogx(res["x_sweep"], res["ratio_sweep"], "-", label=f"query {i}: limit {res['limit']:g}")
        ax.axhline(res["limit"], color="gray", lw=0.6, ls=":")
    ax.set_xlabel("x")
    ax.set_ylabel("tail-integral ratio")
    ax.set_title("index-arithmetic checks")
    ax.legend(fontsize=8)
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150)
    plt.close(fig)
