"""Factorization report artifacts: delimited per-run data plus rendered
figures (timing buckets, measured-outcome summary)."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .executor import _BUCKET_ORDER
from .shor import FactorizationResult

RUNS_CSV = "runs.csv"
TIMING_FIG = "timing.png"
OUTCOMES_FIG = "outcomes.png"


def write_runs_csv(result: FactorizationResult, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["run", "seed", "a", "measured_bits", "integer_rep",
                         "order", "factor_p", "factor_q", "total_seconds"])
        for i, run in enumerate(result.runs, start=1):
            p, q = (run.factors if run.factors else ("", ""))
            total = f"{run.trace.total_seconds:.4f}" if run.trace else ""
            writer.writerow([i, run.seed, run.a, run.bits, run.integer,
                             run.order if run.order is not None else "",
                             p, q, total])


def plot_timing(result: FactorizationResult, path: Path) -> None:
    runs = [r for r in result.runs if r.trace is not None]
    fig, ax = plt.subplots(figsize=(7, 4))
    if runs:
        names = list(_BUCKET_ORDER)
        width = 0.8 / len(runs)
        for i, run in enumerate(runs):
            values = [run.trace.buckets.get(name, 0.0) for name in names]
            xs = [j + i * width for j in range(len(names))]
            ax.bar(xs, values, width=width, label=f"run {i + 1}")
        ax.set_xticks([j + 0.4 - width / 2 for j in range(len(names))])
        ax.set_xticklabels(names)
        ax.legend()
    ax.set_ylabel("seconds")
    ax.set_title(f"Per-gate timing, N={result.N}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_outcomes(result: FactorizationResult, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    xs = range(1, len(result.runs) + 1)
    values = [run.integer for run in result.runs]
    colors = ["tab:green" if run.factors else "tab:gray" for run in result.runs]
    ax.bar(xs, values, color=colors)
    ax.set_xlabel("run")
    ax.set_ylabel("measured integer")
    ax.set_title(f"Measured phase-estimate integers, N={result.N} "
                 f"(green = factors extracted)")
    ax.set_xticks(list(xs))
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_report(result: FactorizationResult, directory) -> list[Path]:
    """Write runs.csv plus the figures into ``directory``; returns the paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = [directory / RUNS_CSV, directory / TIMING_FIG,
             directory / OUTCOMES_FIG]
    write_runs_csv(result, paths[0])
    plot_timing(result, paths[1])
    plot_outcomes(result, paths[2])
    return paths
