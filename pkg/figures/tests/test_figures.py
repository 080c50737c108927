"""Figure regeneration from the golden CSVs: all nine layouts, byte-stable
reruns, loud schema failures, graceful empty inputs.
"""

from __future__ import annotations

import hashlib
import json
import subprocess
import sys
from pathlib import Path

import pytest

from figures.cli import main, render_figure
from figures.io import FigureDataError, load_table
from figures.registry import FIGURES

GOLDEN = Path(__file__).resolve().parent.parent / "golden"

CONVENTIONAL = {
    "phase_ed_grid.csv", "phase_ed_line.csv", "rg_flow.csv", "rg_boundary.csv",
    "chain_rg.csv", "gap_scaling.csv", "gap_scan.csv",
}


def output_digests(out_dir: Path) -> dict:
    return {
        path.name: hashlib.sha256(path.read_bytes()).hexdigest()
        for path in sorted(out_dir.iterdir())
    }


def write_spec(tmp_path: Path, **fields) -> str:
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(fields), encoding="utf-8")
    return str(path)


# ----------------------------------------------------------------------
# registry and golden data
# ----------------------------------------------------------------------


def test_registry_lists_nine_figures_over_seven_files():
    assert sorted(FIGURES) == [
        "fig10", "fig2a", "fig2b", "fig3", "fig5", "fig6", "fig8", "fig9", "figA",
    ]
    names = set()
    for module in FIGURES.values():
        assert callable(module.build)
        names.update(module.INPUTS.values())
    assert names == CONVENTIONAL


def test_golden_tables_parse_with_metadata():
    for name in sorted(CONVENTIONAL):
        table = load_table(GOLDEN / name)
        assert table.rows, name
        for key in ("artifact_version", "command", "seed", "config_sha256"):
            assert key in table.meta, name
        assert "series" in table.columns


# ----------------------------------------------------------------------
# render-all
# ----------------------------------------------------------------------


def test_render_all_golden_reruns_byte_identical(tmp_path, capsys):
    digests = []
    for run in ("first", "second"):
        out = tmp_path / run
        assert main(["render-all", "--results", str(GOLDEN), "--out", str(out)]) == 0
        produced = output_digests(out)
        assert sorted(produced) == sorted(
            f"{fid}.{ext}" for fid in FIGURES for ext in ("png", "svg")
        )
        digests.append(produced)
    assert digests[0] == digests[1]
    lines = capsys.readouterr().out.strip().splitlines()
    assert sorted(lines)[:2] == ["fig10: ok", "fig10: ok"]


def test_render_all_parallel_matches_serial(tmp_path):
    serial, parallel = tmp_path / "serial", tmp_path / "parallel"
    assert main(["render-all", "--results", str(GOLDEN), "--out", str(serial)]) == 0
    assert main(["render-all", "--results", str(GOLDEN), "--out", str(parallel),
                 "--workers", "2"]) == 0
    assert output_digests(serial) == output_digests(parallel)


def test_render_all_isolates_a_broken_input(tmp_path, capsys):
    results = tmp_path / "results"
    results.mkdir()
    for name in CONVENTIONAL:
        target = results / name
        if name == "rg_flow.csv":
            target.write_text("series,l\n", encoding="utf-8")  # schema too small
        else:
            target.write_bytes((GOLDEN / name).read_bytes())
    out = tmp_path / "out"
    assert main(["render-all", "--results", str(results), "--out", str(out)]) == 2
    captured = capsys.readouterr()
    assert "fig3: FAILED" in captured.err
    assert "missing column(s)" in captured.err
    # the other eight still rendered
    assert not (out / "fig3.png").exists()
    assert (out / "fig2a.png").exists() and (out / "figA.svg").exists()


def test_empty_tables_render_empty_axes(tmp_path):
    results = tmp_path / "results"
    results.mkdir()
    for name in CONVENTIONAL:
        kept = []
        for line in (GOLDEN / name).read_text(encoding="utf-8").splitlines():
            kept.append(line)
            if not line.startswith("#"):
                break  # header row reached; drop every data row
        (results / name).write_text("\n".join(kept) + "\n", encoding="utf-8")
    out = tmp_path / "out"
    assert main(["render-all", "--results", str(results), "--out", str(out)]) == 0
    assert len(list(out.iterdir())) == 2 * len(FIGURES)


# ----------------------------------------------------------------------
# single-figure specs
# ----------------------------------------------------------------------


def test_render_single_spec_with_axis_ranges(tmp_path, capsys):
    spec = write_spec(
        tmp_path,
        id="fig3",
        inputs={"flow": str(GOLDEN / "rg_flow.csv")},
        out=str(tmp_path / "flow"),
        axis_ranges={"x": [0, 20], "y": [-0.2, 1.2]},
    )
    assert main(["render", "--spec", spec]) == 0
    written = capsys.readouterr().out.split()
    assert written == [str(tmp_path / "flow.png"), str(tmp_path / "flow.svg")]
    assert (tmp_path / "flow.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    assert "<svg" in (tmp_path / "flow.svg").read_text(encoding="utf-8")


def test_unknown_figure_id_exits_1(tmp_path, capsys):
    spec = write_spec(tmp_path, id="fig4", inputs={}, out=str(tmp_path / "x"))
    assert main(["render", "--spec", spec]) == 1
    assert "unknown figure id" in capsys.readouterr().err


@pytest.mark.parametrize(
    "fields, fragment",
    [
        ({"id": "fig3", "inputs": {"flow": "a.csv"}, "out": "x", "extra": 1},
         "unknown spec key"),
        ({"id": "fig3", "inputs": {"wrong_slot": "a.csv"}, "out": "x"},
         "needs inputs"),
        ({"id": "fig3", "inputs": {"flow": "a.csv"}}, "needs 'out'"),
        ({"id": "fig3", "inputs": {"flow": "a.csv"}, "out": "x",
          "axis_ranges": {"z": [0, 1]}}, "axis_ranges"),
        ({"id": "fig3", "inputs": {"flow": "a.csv"}, "out": "x",
          "axis_ranges": {"x": [0]}}, "[lo, hi]"),
    ],
)
def test_spec_validation_errors(tmp_path, capsys, fields, fragment):
    spec = write_spec(tmp_path, **fields)
    assert main(["render", "--spec", spec]) == 1
    assert fragment in capsys.readouterr().err


def test_malformed_spec_file_exits_1(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("not json", encoding="utf-8")
    assert main(["render", "--spec", str(bad)]) == 1
    assert main(["render", "--spec", str(tmp_path / "absent.json")]) == 1
    listy = tmp_path / "list.json"
    listy.write_text("[1, 2]", encoding="utf-8")
    assert main(["render", "--spec", str(listy)]) == 1
    assert capsys.readouterr().err.count("spec error:") == 3


# ----------------------------------------------------------------------
# schema failures
# ----------------------------------------------------------------------


def test_missing_column_fails_before_plotting(tmp_path):
    stale = tmp_path / "rg_flow.csv"
    stale.write_text("series,l,Gamma,Xi,V\nflow,0,1.0,0.0,0.0\n", encoding="utf-8")
    out_base = tmp_path / "fig"
    with pytest.raises(FigureDataError) as err:
        render_figure("fig3", {"flow": str(stale)}, str(out_base))
    message = str(err.value)
    assert "missing column(s) ['ubar']" in message
    assert "required" in message and "file has" in message
    assert not out_base.with_suffix(".png").exists()
    assert not out_base.with_suffix(".svg").exists()


def test_missing_column_cli_exit_2(tmp_path, capsys):
    stale = tmp_path / "rg_flow.csv"
    stale.write_text("series,l\nflow,0\n", encoding="utf-8")
    spec = write_spec(
        tmp_path, id="fig3", inputs={"flow": str(stale)}, out=str(tmp_path / "fig")
    )
    assert main(["render", "--spec", spec]) == 2
    assert capsys.readouterr().err.startswith("data error:")


def test_headerless_file_is_a_data_error(tmp_path):
    empty = tmp_path / "rg_flow.csv"
    empty.write_text("", encoding="utf-8")
    with pytest.raises(FigureDataError, match="no column header"):
        load_table(empty)


# ----------------------------------------------------------------------
# process entry point
# ----------------------------------------------------------------------


def test_module_entrypoint_runs(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "figures.cli", "render-all",
         "--results", str(GOLDEN), "--out", str(tmp_path / "out")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.count(": ok") == len(FIGURES)
