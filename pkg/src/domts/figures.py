"""Render sweep-report figures to files next to the delimited output."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .bench import METHODS, SweepReport, _median_table

_STYLE = {
    "ssa_aff": dict(color="tab:blue", marker="o"),
    "ssa_ls": dict(color="tab:cyan", marker="s"),
    "gsa_aff": dict(color="tab:red", marker="^"),
    "gsa_ls": dict(color="tab:orange", marker="d"),
}


def _line_figure(report, x_field, y_field, xlabel, ylabel, path):
    xs, methods, table = _median_table(report, x_field, y_field)
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    for method in methods:
        ys = [table[(x, method)] for x in xs]
        ax.plot(xs, ys, label=method.upper(), **_STYLE.get(method, {}))
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _target_count_figure(report, path):
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    plotted = False
    for method in sorted({r.method for r in report.rows}, key=METHODS.index):
        rows = [r for r in report.rows if r.method == method and r.target_counts]
        if not rows:
            continue
        # Longest run is the most informative single distribution to show.
        row = max(rows, key=lambda r: len(r.target_counts))
        ax.plot(
            range(1, len(row.target_counts) + 1),
            row.target_counts,
            label=f"{method.upper()} (eps={row.epsilon:g})",
            **_STYLE.get(method, {}),
        )
        plotted = True
    if not plotted:
        plt.close(fig)
        return False
    ax.set_xlabel("central (selection order)")
    ax.set_ylabel("targets assigned")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return True


def render_figures(report: SweepReport, outdir) -> list[str]:
    """Write PNG figures for the sweep; returns the paths written."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written: list[str] = []
    specs = [
        ("epsilon", "dsn_ratio", "error bound", "dominant-set ratio", "fig_dsn_by_epsilon.png"),
        ("epsilon", "mean_rmse", "error bound", "mean RMSE", "fig_rmse_by_epsilon.png"),
        ("delta", "dsn_ratio", "budget fraction", "dominant-set ratio", "fig_dsn_by_delta.png"),
        ("delta", "mean_rmse", "budget fraction", "mean RMSE", "fig_rmse_by_delta.png"),
    ]
    ok_rows = [r for r in report.rows if r.error is None and not math.isnan(r.dsn_ratio)]
    if not ok_rows:
        return written
    for x_field, y_field, xlabel, ylabel, name in specs:
        path = outdir / name
        _line_figure(report, x_field, y_field, xlabel, ylabel, path)
        written.append(str(path))
    path = outdir / "fig_target_counts.png"
    if _target_count_figure(report, path):
        written.append(str(path))
    return written
