"""The nine figure builders, keyed by id."""

from __future__ import annotations

from . import fig2a, fig2b, fig3, fig5, fig6, fig8, fig9, fig10, figA

FIGURES = {
    "fig2a": fig2a,
    "fig2b": fig2b,
    "fig3": fig3,
    "fig5": fig5,
    "fig6": fig6,
    "fig8": fig8,
    "fig9": fig9,
    "fig10": fig10,
    "figA": figA,
}
