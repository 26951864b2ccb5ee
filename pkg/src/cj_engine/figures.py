"""Figure rendering for offline reports: per-item rank-distribution bar
panels, the pairwise entropy grid, and the max-entropy trajectory.

Everything renders through the Agg backend straight to files; nothing
here opens a window.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Any

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

DPI = 150


def save_rank_distribution_grid(report: dict[str, Any], path: str | Path) -> Path:
    """One bar panel per item showing its probability over the ranks."""
    dists = report["distributions"]
    labels = {entry["item"]: entry["label"] for entry in report["ranks"]}
    n = len(dists)
    cols = min(n, 3)
    rows = math.ceil(n / cols)
    fig, axes = plt.subplots(rows, cols, figsize=(3.2 * cols, 2.4 * rows), squeeze=False)
    for panel, dist in enumerate(dists):
        ax = axes[panel // cols][panel % cols]
        probs = dist["probs"]
        ax.bar(np.arange(1, len(probs) + 1), probs, color="tab:blue")
        ax.set_title(f"{labels.get(dist['item'], dist['item'])}", fontsize=9)
        ax.set_xlabel("rank", fontsize=8)
        ax.set_ylim(0, 1)
        ax.tick_params(labelsize=7)
    for panel in range(n, rows * cols):
        axes[panel // cols][panel % cols].axis("off")
    fig.suptitle("Rank distributions", fontsize=11)
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=DPI)
    plt.close(fig)
    return out


def save_entropy_grid(report: dict[str, Any], path: str | Path) -> Path:
    """Pairwise posterior-entropy heat map; lighter cells are less settled."""
    grid = np.array(
        [[np.nan if v is None else v for v in row] for row in report["entropy"]["grid"]]
    )
    n = grid.shape[0]
    fig, ax = plt.subplots(figsize=(4.2, 3.6))
    image = ax.imshow(grid, cmap="viridis")
    fig.colorbar(image, ax=ax, label="entropy")
    ticks = np.arange(n)
    item_ids = [entry["item"] for entry in report["ranks"]]
    ax.set_xticks(ticks, labels=[str(i) for i in item_ids], fontsize=7)
    ax.set_yticks(ticks, labels=[str(i) for i in item_ids], fontsize=7)
    ax.set_title("Pairwise entropy", fontsize=11)
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=DPI)
    plt.close(fig)
    return out


def save_entropy_series(report: dict[str, Any], path: str | Path) -> Path:
    """Highest pairwise entropy after each judgement."""
    series = report["entropy"]["series"]
    fig, ax = plt.subplots(figsize=(4.8, 3.0))
    ax.plot(np.arange(len(series)), series, color="tab:orange")
    ax.set_xlabel("judgements")
    ax.set_ylabel("max entropy")
    ax.set_title("Uncertainty progression", fontsize=11)
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=DPI)
    plt.close(fig)
    return out


def render_report_figures(report: dict[str, Any], out_dir: str | Path) -> list[Path]:
    """All report figures into a directory; returns the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return [
        save_rank_distribution_grid(report, out / "rank-distributions.png"),
        save_entropy_grid(report, out / "entropy-grid.png"),
        save_entropy_series(report, out / "entropy-series.png"),
    ]
