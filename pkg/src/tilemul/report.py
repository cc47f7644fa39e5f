"""Matplotlib figures rendered next to the CLI's delimited outputs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .placement import PhysicalGrid, PlacementResult

_BOTTLENECK_COLORS = {"aie": "tab:blue", "sender": "tab:orange", "carry": "tab:green"}


def save_dse_figure(rows, path: str) -> None:
    """Modeled throughput against the tile count, colored by bottleneck stage."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for stage, color in _BOTTLENECK_COLORS.items():
        xs = [r.p_intra0 * r.p_intra1 for r in rows if r.bottleneck == stage]
        ys = [r.tasks_per_second for r in rows if r.bottleneck == stage]
        if xs:
            ax.scatter(xs, ys, s=14, color=color, label=f"{stage}-bound")
    if rows:
        best = max(rows, key=lambda r: r.tasks_per_second)
        ax.scatter([best.p_intra0 * best.p_intra1], [best.tasks_per_second],
                   s=90, facecolors="none", edgecolors="red", label="selected")
    ax.set_xlabel("tiles per task (P_intra0 * P_intra1)")
    ax.set_ylabel("modeled tasks/s")
    ax.set_yscale("log")
    ax.legend(loc="best", fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_placement_figure(result: PlacementResult, path: str,
                          grid: PhysicalGrid = PhysicalGrid()) -> None:
    """Grid occupancy, one colored cell per placed position, by task."""
    image = np.full((grid.rows, grid.cols), np.nan)
    for (task, _chain, _pos), (row, col) in result.assignments.items():
        image[row, col] = task
    fig, ax = plt.subplots(figsize=(10, 2.2))
    ax.imshow(image, origin="lower", cmap="tab10", interpolation="nearest")
    ax.set_xticks(range(0, grid.cols, 5))
    ax.set_yticks(range(grid.rows))
    ax.set_xlabel("column")
    ax.set_ylabel("row (0 = bottom)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_mandelbrot_figure(counts, max_iter: int, path: str) -> None:
    image = np.asarray(counts, dtype=float)
    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    im = ax.imshow(image, cmap="magma", vmin=0, vmax=max_iter)
    fig.colorbar(im, ax=ax, label="iterations")
    ax.set_xticks([])
    ax.set_yticks([])
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_bench_figure(durations, path: str) -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(range(len(durations)), durations, marker="o", markersize=3, lw=0.8)
    ax.set_xlabel("task index")
    ax.set_ylabel("seconds (software simulation)")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
