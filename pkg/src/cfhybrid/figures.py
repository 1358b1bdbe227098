"""Render the evaluation figures next to the CSV output.

All plots are derived from the same data the CSVs carry; the CSVs remain the
stable contract, the PNGs are for eyeballing.  Uses the Agg backend so runs
work headless.
"""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .experiments import SweepResult
from .metrics import NdcgReport, PRCurve, RECALL_LEVELS

__all__ = ["render_pr_figure", "render_ndcg_figure", "render_sweep_figure"]

_MARKERS = ["o", "s", "^", "D", "v", "P", "X", "*", "<", ">", "h"]


def render_pr_figure(path: str | Path, pr_curves: Sequence[tuple[str, PRCurve]]) -> Path:
    """Interpolated precision against recall, one line per run."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for i, (label, curve) in enumerate(pr_curves):
        ax.plot(
            RECALL_LEVELS,
            curve.interpolated_precision,
            marker=_MARKERS[i % len(_MARKERS)],
            markersize=4,
            label=label,
        )
    ax.set_xlabel("Recall")
    ax.set_ylabel("Interpolated precision")
    ax.set_xlim(0.0, 1.0)
    ax.set_ylim(bottom=0.0)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_ndcg_figure(path: str | Path, ndcg_reports: Sequence[tuple[str, NdcgReport]]) -> Path:
    """Mean NDCG@k per run as a bar chart."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    labels = [label for label, _ in ndcg_reports]
    means = [report.mean for _, report in ndcg_reports]
    ax.bar(range(len(labels)), means, width=0.6)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=15, ha="right")
    k = ndcg_reports[0][1].k if ndcg_reports else 10
    ax.set_ylabel(f"Mean NDCG@{k}")
    ax.set_ylim(0.0, 1.0)
    ax.grid(True, axis="y", alpha=0.3)
    for x, m in enumerate(means):
        ax.text(x, m + 0.01, f"{m:.3f}", ha="center", fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_sweep_figure(path: str | Path, sweep: SweepResult) -> Path:
    """Mean NDCG across the fusion-weight grid, best point highlighted."""
    points = sorted(sweep.points, key=lambda p: p.dense_weight)
    xs = [p.dense_weight for p in points]
    ys = [p.mean_ndcg for p in points]
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.plot(xs, ys, marker="o", markersize=4)
    best_y = next(p.mean_ndcg for p in points if p.dense_weight == sweep.best_dense_weight)
    ax.scatter([sweep.best_dense_weight], [best_y], color="crimson", zorder=3,
               label=f"best: {sweep.best_dense_weight!r}")
    ax.set_xlabel("Dense weight")
    ax.set_ylabel("Mean NDCG")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
