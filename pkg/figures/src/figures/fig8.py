"""Order parameters along the transverse-field axis."""

from __future__ import annotations

from .io import numeric, require_columns
from .style import apply_axis_ranges, new_figure

INPUTS = {"phase_line": "phase_ed_line.csv"}

TRACKS = (
    ("m_t_staggered", "staggered top magnetization", "C0"),
    ("m_b", "bottom magnetization", "C1"),
    ("S", "staggered structure factor", "C2"),
)


def build(tables, axis_ranges=None):
    table = tables["phase_line"]
    require_columns(table, ("series", "gamma_over_u") + tuple(t[0] for t in TRACKS))
    fig = new_figure()
    ax = fig.add_subplot()
    rows = table.series("grid")
    for column, label, color in TRACKS:
        points = sorted(numeric(rows, "gamma_over_u", column))
        if points:
            ax.plot([p[0] for p in points], [p[1] for p in points],
                    color=color, marker=".", label=label)
    if ax.lines:
        ax.legend(loc="center left")
    apply_axis_ranges(ax, axis_ranges)
    ax.set_xlabel("Gamma/U")
    ax.set_ylabel("order parameter")
    ax.set_title("order parameters across the transition")
    return fig
