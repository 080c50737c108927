"""Ground-state energy derivatives along the transverse-field axis."""

from __future__ import annotations

from .io import numeric, require_columns
from .style import apply_axis_ranges, new_figure

INPUTS = {"phase_line": "phase_ed_line.csv"}


def build(tables, axis_ranges=None):
    table = tables["phase_line"]
    require_columns(table, ("series", "gamma_over_u", "dE0_dgamma", "dE0_dxi"))
    fig = new_figure()
    ax = fig.add_subplot()
    rows = table.series("grid")
    for column, fmt, label in (("dE0_dgamma", "-", "dE0/dGamma"),
                               ("dE0_dxi", "--", "dE0/dXi")):
        points = sorted(numeric(rows, "gamma_over_u", column))
        if points:
            ax.plot([p[0] for p in points], [p[1] for p in points], fmt,
                    marker=".", label=label)
    if ax.lines:
        ax.legend(loc="lower left")
    apply_axis_ranges(ax, axis_ranges)
    ax.set_xlabel("Gamma/U")
    ax.set_ylabel("energy derivative")
    ax.set_title("ground-state energy derivatives")
    return fig
