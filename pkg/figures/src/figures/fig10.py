"""Minimum gap against system size, one semilog line per catalyst ray."""

from __future__ import annotations

import math

from .io import numeric, require_columns
from .style import apply_axis_ranges, new_figure

INPUTS = {"scaling": "gap_scaling.csv"}


def build(tables, axis_ranges=None):
    table = tables["scaling"]
    require_columns(table, ("series", "xi_over_u", "L", "gap", "slope", "intercept"))
    fig = new_figure()
    ax = fig.add_subplot()
    ax.set_yscale("log")

    points = table.series("point")
    rays = sorted({float(row["xi_over_u"]) for row in points if row.get("xi_over_u")})
    for index, ray in enumerate(rays):
        color = f"C{index % 10}"
        own = [row for row in points if float(row["xi_over_u"]) == ray]
        line = sorted(numeric(own, "L", "gap"))
        if line:
            ax.plot([p[0] for p in line], [p[1] for p in line], "o",
                    color=color, label=f"Xi/U = {ray:g}")
        for fit in table.series("fit"):
            if fit.get("xi_over_u") and float(fit["xi_over_u"]) == ray and line:
                slope, intercept = float(fit["slope"]), float(fit["intercept"])
                sizes = [p[0] for p in line]
                ax.plot(sizes, [math.exp(intercept + slope * s) for s in sizes],
                        "--", color=color, linewidth=1.0)
    if ax.lines:
        ax.legend(loc="lower left")
    apply_axis_ranges(ax, axis_ranges)
    ax.set_xlabel("L")
    ax.set_ylabel("minimum gap")
    ax.set_title("gap scaling with system size")
    return fig
