"""Regenerate the golden CSVs by running the ladderlab CLI on tiny configs.

Run from anywhere:  python3 figures/tools/make_golden.py
Writes into figures/golden/.  Small lattices only; finishes in about a
minute on one core.
"""

from __future__ import annotations

import json
import pathlib
import subprocess
import sys
import tempfile

GOLDEN = pathlib.Path(__file__).resolve().parent.parent / "golden"

RUNS = {
    "phase_ed_grid.csv": {
        "command": "phase-ed",
        "L": 4,
        "couplings": {"U": 1.0},
        "grid": {
            "x_axis": "gamma", "x_range": [1.2, 2.4], "x_points": 5,
            "y_axis": "k", "y_range": [1.0, 5.0], "y_points": 4,
        },
    },
    "phase_ed_line.csv": {
        "command": "phase-ed",
        "L": 4,
        "couplings": {"K": 5.0, "U": 1.0},
        "grid": {"x_axis": "gamma", "x_range": [1.2, 2.4], "x_points": 9},
    },
    "rg_flow.csv": {
        "command": "rg-flow",
        "bare": {"U": 0.51773501, "Gamma": 1.0, "Xi": 0.0},
        "l_max": 20,
    },
    "rg_boundary.csv": {
        "command": "rg-boundary",
        "xi_over_u_range": [-2.0, 2.0],
        "n_points": 9,
    },
    "chain_rg.csv": {
        "command": "chain-rg",
        "boundary": {"gamma_range": [0.0, 1.0], "n_points": 11},
        "classify": [
            {"gamma": 0.3, "xi": 0.2}, {"gamma": 0.3, "xi": 0.9},
            {"gamma": 1.2, "xi": 0.5}, {"gamma": 0.8, "xi": 0.1},
        ],
        "nu": True,
    },
    "gap_scaling.csv": {
        "command": "gap-scaling",
        "couplings": {"K": 5.0, "U": 1.0},
        "sizes": [4, 6],
        "axis": "gamma",
        "rays": [
            {"xi_over_u": 0.0, "range": [1.5, 2.2]},
            {"xi_over_u": -0.4, "range": [1.7, 2.6]},
        ],
    },
    "gap_scan.csv": {
        "command": "gap-scan",
        "L": 4,
        "couplings": {"U": 1.0},
        "k_over_u": [1.49, 1.5],
        "axis": "gamma",
        "range": [1.2, 2.2],
    },
}


def main() -> int:
    GOLDEN.mkdir(exist_ok=True)
    for name, config in RUNS.items():
        with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
            json.dump(config, fh)
            config_path = fh.name
        out = GOLDEN / name
        proc = subprocess.run(
            ["ladderlab", config["command"], "--config", config_path,
             "--out", str(out), "--seed", "0"],
            capture_output=True, text=True,
        )
        if proc.returncode != 0:
            print(f"{name}: exit {proc.returncode}\n{proc.stderr}", file=sys.stderr)
            return 1
        print(f"{name}: written")
    return 0


if __name__ == "__main__":
    sys.exit(main())
