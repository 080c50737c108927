"""Figure CLI: render one spec, or regenerate the full set from a results dir.

`figures render --spec spec.json` draws a single figure from an explicit
spec; `figures render-all --results <dir> --out <dir>` regenerates all
nine layouts from conventionally named CSVs.  Each figure is an
independent unit: one failing input does not stop the rest.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import sys

from .io import FigureDataError, load_table
from .registry import FIGURES
from .style import save_figure

__all__ = ["main", "render_figure"]


class SpecError(ValueError):
    """Bad figure spec; the process exits with code 1."""


def _load_spec(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            spec = json.load(fh)
    except OSError as err:
        raise SpecError(f"cannot read spec file: {err}") from None
    except json.JSONDecodeError as err:
        raise SpecError(f"spec file is not valid JSON: {err}") from None
    if not isinstance(spec, dict):
        raise SpecError("spec must be a JSON object")
    unknown = sorted(set(spec) - {"id", "inputs", "out", "axis_ranges"})
    if unknown:
        raise SpecError(f"unknown spec key(s): {', '.join(map(repr, unknown))}")
    figure_id = spec.get("id")
    if figure_id not in FIGURES:
        raise SpecError(f"unknown figure id {figure_id!r}; expected one of {sorted(FIGURES)}")
    module = FIGURES[figure_id]
    inputs = spec.get("inputs")
    if not isinstance(inputs, dict) or set(inputs) != set(module.INPUTS):
        raise SpecError(
            f"{figure_id} needs inputs {sorted(module.INPUTS)}, "
            f"spec has {sorted(inputs) if isinstance(inputs, dict) else inputs!r}"
        )
    if not isinstance(spec.get("out"), str):
        raise SpecError("spec needs 'out': an output path base (extensions are added)")
    ranges = spec.get("axis_ranges")
    if ranges is not None:
        if not isinstance(ranges, dict) or not set(ranges) <= {"x", "y"}:
            raise SpecError("axis_ranges must be an object with keys from {'x', 'y'}")
        for axis, pair in ranges.items():
            if not isinstance(pair, list) or len(pair) != 2:
                raise SpecError(f"axis_ranges.{axis} must be a [lo, hi] pair")
    return spec


def render_figure(figure_id: str, input_paths: dict, out_base: str,
                  axis_ranges=None) -> list[str]:
    """Load the input tables, build the figure, write PNG and SVG."""
    module = FIGURES[figure_id]
    tables = {slot: load_table(path) for slot, path in input_paths.items()}
    fig = module.build(tables, axis_ranges)
    return save_figure(fig, out_base)


def _render_unit(payload: tuple) -> tuple[str, str | None]:
    figure_id, input_paths, out_base, axis_ranges = payload
    try:
        render_figure(figure_id, input_paths, out_base, axis_ranges)
        return figure_id, None
    except Exception as err:
        return figure_id, f"{type(err).__name__}: {err}"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figures",
        description="Regenerate the standard figure set from sweep CSVs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    render = sub.add_parser("render", help="draw one figure from a JSON spec")
    render.add_argument("--spec", required=True, help="FigureSpec JSON file")

    render_all = sub.add_parser("render-all", help="regenerate all nine figures")
    render_all.add_argument("--results", required=True,
                            help="directory of conventionally named CSVs")
    render_all.add_argument("--out", required=True, help="output directory")
    render_all.add_argument("--workers", type=int, default=1,
                            help="per-figure process count (default 1)")
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1

    if args.command == "render":
        try:
            spec = _load_spec(args.spec)
        except SpecError as err:
            print(f"spec error: {err}", file=sys.stderr)
            return 1
        try:
            written = render_figure(spec["id"], spec["inputs"], spec["out"],
                                    spec.get("axis_ranges"))
        except FigureDataError as err:
            print(f"data error: {err}", file=sys.stderr)
            return 2
        except Exception as err:
            print(f"render error: {type(err).__name__}: {err}", file=sys.stderr)
            return 2
        for path in written:
            print(path)
        return 0

    # render-all
    import os

    os.makedirs(args.out, exist_ok=True)
    payloads = [
        (figure_id,
         {slot: os.path.join(args.results, name)
          for slot, name in module.INPUTS.items()},
         os.path.join(args.out, figure_id),
         None)
        for figure_id, module in FIGURES.items()
    ]
    if args.workers > 1:
        with concurrent.futures.ProcessPoolExecutor(
            max_workers=min(args.workers, len(payloads))
        ) as pool:
            results = list(pool.map(_render_unit, payloads))
    else:
        results = [_render_unit(p) for p in payloads]

    failed = 0
    for figure_id, error in results:
        if error is None:
            print(f"{figure_id}: ok")
        else:
            failed += 1
            print(f"{figure_id}: FAILED: {error}", file=sys.stderr)
    return 2 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
