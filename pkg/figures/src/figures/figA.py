"""Gap profiles along the field axis, one curve per scanned coupling set."""

from __future__ import annotations

from .io import numeric, require_columns
from .style import apply_axis_ranges, new_figure

INPUTS = {"scan": "gap_scan.csv"}


def _group_key(row) -> str:
    k_over_u = row.get("k_over_u", "")
    L = row.get("L", "")
    return f"K/U = {float(k_over_u):g}, L = {L}" if k_over_u else f"L = {L}"


def build(tables, axis_ranges=None):
    table = tables["scan"]
    require_columns(table, ("series", "L", "k_over_u", "value", "gap", "location"))
    fig = new_figure()
    ax = fig.add_subplot()

    samples = table.series("sample")
    groups = sorted({_group_key(row) for row in samples})
    for index, key in enumerate(groups):
        own = [row for row in samples if _group_key(row) == key]
        line = sorted(numeric(own, "value", "gap"))
        ax.plot([p[0] for p in line], [p[1] for p in line],
                color=f"C{index % 10}", marker=".", label=key)
    lows = numeric(table.series("global_min"), "location", "gap")
    if lows:
        ax.scatter([p[0] for p in lows], [p[1] for p in lows],
                   marker="v", color="k", zorder=3, label="global minimum")
    if ax.lines or lows:
        ax.legend(loc="upper right")
    apply_axis_ranges(ax, axis_ranges)
    ax.set_xlabel("Gamma/U")
    ax.set_ylabel("gap")
    ax.set_title("gap profiles")
    return fig
