"""Renormalization flow trajectories: couplings against the flow step."""

from __future__ import annotations

from .io import numeric, require_columns
from .style import apply_axis_ranges, new_figure

INPUTS = {"flow": "rg_flow.csv"}

TRACKS = (("Gamma", "-", "C0"), ("Xi", "-", "C1"), ("V", "-", "C2"), ("ubar", "--", "C3"))


def build(tables, axis_ranges=None):
    table = tables["flow"]
    require_columns(table, ("series", "l", "Gamma", "Xi", "V", "ubar"))
    fig = new_figure()
    ax = fig.add_subplot()
    rows = table.series("flow")
    for name, linestyle, color in TRACKS:
        points = numeric(rows, "l", name)
        if points:
            ax.plot([p[0] for p in points], [p[1] for p in points],
                    linestyle=linestyle, color=color, marker=".", label=name)
    if ax.lines:
        ax.legend(loc="center right")
    apply_axis_ranges(ax, axis_ranges)
    ax.set_xlabel("flow step l")
    ax.set_ylabel("coupling value")
    ax.set_title("flow trajectory")
    return fig
