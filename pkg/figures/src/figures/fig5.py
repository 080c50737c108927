"""Phase boundary from the flow: critical Gamma/U per catalyst ratio."""

from __future__ import annotations

from .io import numeric, require_columns
from .style import apply_axis_ranges, new_figure

INPUTS = {"boundary": "rg_boundary.csv"}


def build(tables, axis_ranges=None):
    table = tables["boundary"]
    require_columns(table, ("series", "xi_over_u", "gamma_over_u"))
    fig = new_figure()
    ax = fig.add_subplot()
    points = numeric(table.series("boundary"), "xi_over_u", "gamma_over_u")
    if points:
        ax.scatter([p[0] for p in points], [p[1] for p in points],
                   s=24, color="C0", zorder=3)
    apply_axis_ranges(ax, axis_ranges)
    ax.set_xlabel("Xi/U")
    ax.set_ylabel("Gamma/U")
    ax.set_title("flow phase boundary")
    return fig
