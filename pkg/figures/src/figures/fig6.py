"""Chain blocking map: critical curve with classified sample points."""

from __future__ import annotations

from .io import numeric, require_columns
from .style import apply_axis_ranges, new_figure

INPUTS = {"chain": "chain_rg.csv"}

PHASE_MARKS = {
    "antiferromagnetic_staggered": ("x", "C3"),
    "paramagnetic_symmetric": ("o", "C0"),
    "critical": ("s", "C2"),
}


def build(tables, axis_ranges=None):
    table = tables["chain"]
    require_columns(table, ("series", "gamma", "xi", "xi_c", "phase"))
    fig = new_figure()
    ax = fig.add_subplot()
    curve = numeric(table.series("boundary"), "gamma", "xi_c")
    if curve:
        ax.plot([p[0] for p in curve], [p[1] for p in curve],
                color="C0", marker=".", label="critical curve")
    for row in table.series("classify"):
        marker, color = PHASE_MARKS.get(row.get("phase", ""), ("+", "C7"))
        pts = numeric([row], "gamma", "xi")
        if pts:
            ax.scatter(pts[0][0], pts[0][1], marker=marker, color=color, zorder=3)
    if ax.lines:
        ax.legend(loc="upper right")
    apply_axis_ranges(ax, axis_ranges)
    ax.set_xlabel("gamma")
    ax.set_ylabel("xi")
    ax.set_title("chain critical curve")
    return fig
