"""Deterministic matplotlib defaults shared by every figure.

The Agg backend is pinned before pyplot loads, rcParams are reset per
figure, and both savefig paths strip the volatile metadata (SVG date,
free-form software string) so rerendering identical inputs produces
identical bytes.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  backend must be fixed first

__all__ = ["HEAT_CMAP", "new_figure", "apply_axis_ranges", "save_figure"]

HEAT_CMAP = "viridis"

_RC = {
    "figure.figsize": (6.4, 4.4),
    "figure.dpi": 120,
    "savefig.dpi": 120,
    "font.family": "DejaVu Sans",
    "axes.grid": True,
    "grid.alpha": 0.3,
    "legend.framealpha": 0.9,
    "svg.hashsalt": "ladderlab-figures",
}


def new_figure():
    plt.rcdefaults()
    plt.rcParams.update(_RC)
    return plt.figure()


def apply_axis_ranges(ax, axis_ranges) -> None:
    if not axis_ranges:
        return
    if "x" in axis_ranges:
        ax.set_xlim(*axis_ranges["x"])
    if "y" in axis_ranges:
        ax.set_ylim(*axis_ranges["y"])


def save_figure(fig, out_base: str) -> list[str]:
    """Write <out_base>.png and <out_base>.svg; no timestamps in either."""
    written = []
    for ext, metadata in (
        ("png", {"Software": "ladderlab-figures"}),
        ("svg", {"Date": None}),
    ):
        path = f"{out_base}.{ext}"
        fig.savefig(path, metadata=metadata)
        written.append(path)
    plt.close(fig)
    return written
