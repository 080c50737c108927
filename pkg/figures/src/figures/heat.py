"""Shared heatmap assembly for the observable-over-plane figures."""

from __future__ import annotations

import numpy as np

from .io import ResultTable, numeric, require_columns
from .style import HEAT_CMAP, apply_axis_ranges, new_figure

OVERLAY_STYLES = (("overlay_dimer", "w--"), ("overlay_large_k", "w:"))


def observable_heatmap(table: ResultTable, value: str, vmin: float, vmax: float,
                       title: str, axis_ranges=None):
    require_columns(table, ("series", "gamma_over_u", "k_over_u", value))
    fig = new_figure()
    ax = fig.add_subplot()
    points = numeric(table.series("grid"), "gamma_over_u", "k_over_u", value)
    if points:
        xs = sorted({p[0] for p in points})
        ys = sorted({p[1] for p in points})
        grid = np.full((len(ys), len(xs)), np.nan)
        col = {v: j for j, v in enumerate(xs)}
        row = {v: j for j, v in enumerate(ys)}
        for x, y, v in points:
            grid[row[y], col[x]] = v
        mesh = ax.pcolormesh(xs, ys, grid, cmap=HEAT_CMAP, vmin=vmin, vmax=vmax,
                             shading="nearest")
        fig.colorbar(mesh, ax=ax, label=title)
    for series, fmt in OVERLAY_STYLES:
        line = numeric(table.series(series), "gamma_over_u", "k_over_u")
        if line:
            ax.plot([p[0] for p in line], [p[1] for p in line], fmt, linewidth=1.5)
    apply_axis_ranges(ax, axis_ranges)
    ax.set_xlabel("Gamma/U")
    ax.set_ylabel("K/U")
    ax.set_title(title)
    return fig
