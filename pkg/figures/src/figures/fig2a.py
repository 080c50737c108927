"""Staggered top magnetization heatmap with reference overlay lines."""

from __future__ import annotations

from .heat import observable_heatmap

INPUTS = {"phase_grid": "phase_ed_grid.csv"}


def build(tables, axis_ranges=None):
    return observable_heatmap(
        tables["phase_grid"], "m_t_staggered", 0.0, 1.0,
        "staggered top magnetization", axis_ranges,
    )
