"""Sweep-oriented command line front end.

Seven subcommands (phase-ed, gap-scan, gap-scaling, rg-flow, rg-boundary,
chain-rg, dimer) read a JSON run configuration, fan independent work
units out to a process pool when asked, and emit one CSV per run with a
`#`-prefixed metadata header.  Identical configurations produce
byte-identical output except for the timestamp line; per-unit failures
are recorded in an `error` column without aborting the sweep.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import dataclasses
import hashlib
import json
import math
import os
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .dimer import dimer_level_crossing, enumerate_ground_space
from .model import CouplingSet, LatticeSpec, build_hamiltonian
from .rg_chain import (
    ChainCouplings,
    chain_critical_xi,
    chain_flow_classify,
    chain_nu_exponent,
)
from .rg_dimer import DimerRGCouplings, _boundary_ray, run_flow
from .spectra import (
    _AXIS_FIELDS,
    DegenerateGroundStateError,
    _with_axis_value,
    bottom_magnetization,
    gap_scaling_fit,
    gap_scan,
    hellmann_feynman_derivatives,
    lowest_eigenpairs,
    staggered_order_parameter,
    staggered_top_magnetization,
    translation_symmetrizer,
)

__all__ = ["RunConfig", "ConfigError", "main"]

COMMANDS = (
    "phase-ed",
    "gap-scan",
    "gap-scaling",
    "rg-flow",
    "rg-boundary",
    "chain-rg",
    "dimer",
)

COMMON_KEYS = {"command", "out", "seed", "workers", "tol"}
COUPLING_KEYS = ("K", "U", "gamma_t", "gamma_b", "xi_tt", "xi_bb", "xi_tb")

# overlay line of the dimer-limit perturbation theory: Gamma/U = 1/c + U/(4Kc^3)
OVERLAY_C = 0.6

MAX_ED_L = 12          # largest even L the 2L <= 26 spin cap admits
MAX_CENSUS_L = 20
MAX_CROSSING_L = 16    # dense-eigensolve budget; the covering basis cap alone
                       # would admit L = 20 but repeated eigvalsh there does not
                       # fit the desk-scale runtime

DEFAULT_TOL = {
    "phase-ed": 1e-7,
    "gap-scan": 1e-7,
    "gap-scaling": 1e-7,
    "rg-flow": 0.0,     # Ubar early-stop threshold; 0 runs the full l_max
    "rg-boundary": 1e-10,
    "chain-rg": None,   # closed forms, no tolerance knob
    "dimer": None,      # bisection is fixed at 1e-8
}


class ConfigError(ValueError):
    """Bad run configuration; the process exits with code 1."""


@dataclass(frozen=True)
class RunConfig:
    """One validated run: command, common knobs, command-specific params.

    The configuration hash covers command, seed, tol, and params; output
    path and worker count are execution plumbing and excluded, so the
    same science run hashes identically wherever and however it runs.
    """

    command: str
    seed: int = 0
    workers: int = field(default_factory=lambda: os.cpu_count() or 1)
    tol: float | None = None
    out: str | None = None
    params: dict = field(default_factory=dict)

    def canonical_json(self) -> str:
        payload = {
            "command": self.command,
            "seed": self.seed,
            "tol": self.tol,
            "params": self.params,
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()


# ----------------------------------------------------------------------
# config validation
# ----------------------------------------------------------------------


def _reject_unknown(raw: dict, allowed, where: str) -> None:
    unknown = sorted(set(raw) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(map(repr, unknown))}")


def _as_float(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{where} must be finite, got {value!r}")
    return value


def _as_int(value, where: str, lo: int | None = None, hi: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where} must be an integer, got {value!r}")
    if lo is not None and value < lo:
        raise ConfigError(f"{where} must be >= {lo}, got {value}")
    if hi is not None and value > hi:
        raise ConfigError(f"{where} must be <= {hi}, got {value}")
    return value


def _as_pair(value, where: str) -> tuple[float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigError(f"{where} must be a [lo, hi] pair, got {value!r}")
    lo = _as_float(value[0], f"{where}[0]")
    hi = _as_float(value[1], f"{where}[1]")
    if not lo < hi:
        raise ConfigError(f"{where} must satisfy lo < hi, got [{lo}, {hi}]")
    return lo, hi


def _as_even_L(value, where: str, hi: int = MAX_ED_L) -> int:
    L = _as_int(value, where, lo=4, hi=hi)
    if L % 2:
        raise ConfigError(f"{where} must be even, got {L}")
    return L


def _as_axis(value, where: str) -> str:
    if value not in _AXIS_FIELDS:
        raise ConfigError(
            f"{where} must be one of {sorted(_AXIS_FIELDS)}, got {value!r}"
        )
    return value


def _as_sector(raw: dict, where: str) -> str:
    sector = raw.get("sector", "symmetric")
    if sector not in ("symmetric", "full"):
        raise ConfigError(f"{where}.sector must be 'symmetric' or 'full', got {sector!r}")
    return sector


def _as_couplings(raw: dict, where: str) -> dict:
    block = raw.get("couplings", {})
    if not isinstance(block, dict):
        raise ConfigError(f"{where}.couplings must be an object, got {block!r}")
    _reject_unknown(block, COUPLING_KEYS, f"{where}.couplings")
    vals = {"K": 1.0, "U": 1.0}
    for key in COUPLING_KEYS:
        if key in block:
            vals[key] = _as_float(block[key], f"{where}.couplings.{key}")
    return vals


def _missing(command: str, key: str):
    raise ConfigError(f"{command} config requires {key!r}")


def _validate_phase_ed(raw: dict) -> dict:
    if "L" not in raw:
        _missing("phase-ed", "L")
    params = {
        "L": _as_even_L(raw.get("L"), "phase-ed.L"),
        "couplings": _as_couplings(raw, "phase-ed"),
        "sector": _as_sector(raw, "phase-ed"),
    }
    grid = raw.get("grid", {})
    if not isinstance(grid, dict):
        raise ConfigError(f"phase-ed.grid must be an object, got {grid!r}")
    _reject_unknown(
        grid,
        ("x_axis", "x_range", "x_points", "y_axis", "y_range", "y_points"),
        "phase-ed.grid",
    )
    norm: dict = {}
    if grid:
        norm["x_axis"] = _as_axis(grid.get("x_axis"), "phase-ed.grid.x_axis")
        norm["x_range"] = list(_as_pair(grid.get("x_range"), "phase-ed.grid.x_range"))
        norm["x_points"] = _as_int(grid.get("x_points"), "phase-ed.grid.x_points", lo=0)
        has_y = [k for k in ("y_axis", "y_range", "y_points") if k in grid]
        if has_y and len(has_y) != 3:
            raise ConfigError(
                "phase-ed.grid needs all three of y_axis/y_range/y_points or none"
            )
        if has_y:
            norm["y_axis"] = _as_axis(grid["y_axis"], "phase-ed.grid.y_axis")
            norm["y_range"] = list(_as_pair(grid["y_range"], "phase-ed.grid.y_range"))
            norm["y_points"] = _as_int(grid["y_points"], "phase-ed.grid.y_points", lo=0)
            if norm["y_axis"] == norm["x_axis"]:
                raise ConfigError("phase-ed.grid axes must differ")
    params["grid"] = norm
    return params


def _validate_gap_scan(raw: dict) -> dict:
    sizes = raw.get("L") if "L" in raw else _missing("gap-scan", "L")
    if isinstance(sizes, int) and not isinstance(sizes, bool):
        sizes = [sizes]
    if not isinstance(sizes, list) or not sizes:
        raise ConfigError(f"gap-scan.L must be an even size or nonempty list, got {sizes!r}")
    sizes = [_as_even_L(s, "gap-scan.L") for s in sizes]

    ratios = raw.get("k_over_u")
    if ratios is not None:
        if not isinstance(ratios, list) or not ratios:
            raise ConfigError(f"gap-scan.k_over_u must be a nonempty list, got {ratios!r}")
        ratios = [_as_float(r, "gap-scan.k_over_u") for r in ratios]

    return {
        "L": sizes,
        "couplings": _as_couplings(raw, "gap-scan"),
        "k_over_u": ratios,
        "axis": _as_axis(raw.get("axis"), "gap-scan.axis"),
        "range": list(_as_pair(raw.get("range"), "gap-scan.range")),
        "n_coarse": _as_int(raw.get("n_coarse", 16), "gap-scan.n_coarse", lo=16),
        "refine_tol": _as_float(raw.get("refine_tol", 1e-4), "gap-scan.refine_tol"),
        "sector": _as_sector(raw, "gap-scan"),
    }


def _validate_gap_scaling(raw: dict) -> dict:
    sizes = raw.get("sizes") if "sizes" in raw else _missing("gap-scaling", "sizes")
    if not isinstance(sizes, list) or not sizes:
        raise ConfigError(f"gap-scaling.sizes must be a nonempty list, got {sizes!r}")
    sizes = [_as_even_L(s, "gap-scaling.sizes") for s in sizes]
    if sorted(sizes) != sizes:
        raise ConfigError("gap-scaling.sizes must be ascending")

    rays = raw.get("rays") if "rays" in raw else _missing("gap-scaling", "rays")
    if not isinstance(rays, list) or not rays:
        raise ConfigError(f"gap-scaling.rays must be a nonempty list, got {rays!r}")
    norm_rays = []
    for i, ray in enumerate(rays):
        where = f"gap-scaling.rays[{i}]"
        if not isinstance(ray, dict):
            raise ConfigError(f"{where} must be an object, got {ray!r}")
        _reject_unknown(ray, ("xi_over_u", "range"), where)
        norm_rays.append({
            "xi_over_u": _as_float(ray.get("xi_over_u"), f"{where}.xi_over_u"),
            "range": list(_as_pair(ray.get("range"), f"{where}.range")),
        })

    return {
        "sizes": sizes,
        "couplings": _as_couplings(raw, "gap-scaling"),
        "axis": _as_axis(raw.get("axis"), "gap-scaling.axis"),
        "rays": norm_rays,
        "n_coarse": _as_int(raw.get("n_coarse", 16), "gap-scaling.n_coarse", lo=16),
        "refine_tol": _as_float(raw.get("refine_tol", 1e-4), "gap-scaling.refine_tol"),
        "sector": _as_sector(raw, "gap-scaling"),
    }


def _validate_rg_flow(raw: dict) -> dict:
    bare = raw.get("bare") if "bare" in raw else _missing("rg-flow", "bare")
    if not isinstance(bare, dict):
        raise ConfigError(f"rg-flow.bare must be an object, got {bare!r}")
    _reject_unknown(bare, ("U", "Gamma", "V", "Xi"), "rg-flow.bare")
    v = _as_float(bare.get("V", 0.0), "rg-flow.bare.V")
    if v != 0.0:
        raise ConfigError(f"rg-flow.bare.V must be 0 (flows start at V = 0), got {v}")
    return {
        "bare": {
            "U": _as_float(bare.get("U"), "rg-flow.bare.U"),
            "Gamma": _as_float(bare.get("Gamma"), "rg-flow.bare.Gamma"),
            "V": 0.0,
            "Xi": _as_float(bare.get("Xi", 0.0), "rg-flow.bare.Xi"),
        },
        "l_max": _as_int(raw.get("l_max", 60), "rg-flow.l_max", lo=1, hi=200),
    }


def _validate_rg_boundary(raw: dict) -> dict:
    rng = raw.get("xi_over_u_range")
    if rng is None:
        _missing("rg-boundary", "xi_over_u_range")
    if not isinstance(rng, (list, tuple)) or len(rng) != 2:
        raise ConfigError(f"rg-boundary.xi_over_u_range must be a [lo, hi] pair, got {rng!r}")
    lo = _as_float(rng[0], "rg-boundary.xi_over_u_range[0]")
    hi = _as_float(rng[1], "rg-boundary.xi_over_u_range[1]")
    if lo > hi:
        raise ConfigError(f"rg-boundary.xi_over_u_range must satisfy lo <= hi, got [{lo}, {hi}]")
    return {
        "xi_over_u_range": [lo, hi],
        "n_points": _as_int(
            raw.get("n_points") if "n_points" in raw else _missing("rg-boundary", "n_points"),
            "rg-boundary.n_points", lo=0,
        ),
    }


def _validate_chain_rg(raw: dict) -> dict:
    params: dict = {"boundary": None, "classify": [], "nu": True}
    if "boundary" in raw:
        block = raw["boundary"]
        if not isinstance(block, dict):
            raise ConfigError(f"chain-rg.boundary must be an object, got {block!r}")
        _reject_unknown(block, ("gamma_range", "n_points"), "chain-rg.boundary")
        lo, hi = _as_pair(block.get("gamma_range"), "chain-rg.boundary.gamma_range")
        params["boundary"] = {
            "gamma_range": [lo, hi],
            "n_points": _as_int(block.get("n_points"), "chain-rg.boundary.n_points", lo=0),
        }
    if "classify" in raw:
        block = raw["classify"]
        if not isinstance(block, list):
            raise ConfigError(f"chain-rg.classify must be a list, got {block!r}")
        for i, point in enumerate(block):
            where = f"chain-rg.classify[{i}]"
            if not isinstance(point, dict):
                raise ConfigError(f"{where} must be an object, got {point!r}")
            _reject_unknown(point, ("gamma", "xi"), where)
            params["classify"].append({
                "gamma": _as_float(point.get("gamma"), f"{where}.gamma"),
                "xi": _as_float(point.get("xi"), f"{where}.xi"),
            })
    if "nu" in raw:
        if not isinstance(raw["nu"], bool):
            raise ConfigError(f"chain-rg.nu must be a boolean, got {raw['nu']!r}")
        params["nu"] = raw["nu"]
    return params


def _validate_dimer(raw: dict) -> dict:
    census = raw.get("census_L", [])
    if not isinstance(census, list):
        raise ConfigError(f"dimer.census_L must be a list, got {census!r}")
    census = [_as_even_L(L, "dimer.census_L", hi=MAX_CENSUS_L) for L in census]

    crossings = raw.get("crossings", [])
    if not isinstance(crossings, list):
        raise ConfigError(f"dimer.crossings must be a list, got {crossings!r}")
    norm = []
    for i, spec in enumerate(crossings):
        where = f"dimer.crossings[{i}]"
        if not isinstance(spec, dict):
            raise ConfigError(f"{where} must be an object, got {spec!r}")
        _reject_unknown(spec, ("xi_tt", "L", "range"), where)
        norm.append({
            "xi_tt": _as_float(spec.get("xi_tt", 0.0), f"{where}.xi_tt"),
            "L": _as_even_L(spec.get("L"), f"{where}.L", hi=MAX_CROSSING_L),
            "range": list(_as_pair(spec.get("range"), f"{where}.range")),
        })
    return {"census_L": census, "crossings": norm}


VALIDATORS = {
    "phase-ed": _validate_phase_ed,
    "gap-scan": _validate_gap_scan,
    "gap-scaling": _validate_gap_scaling,
    "rg-flow": _validate_rg_flow,
    "rg-boundary": _validate_rg_boundary,
    "chain-rg": _validate_chain_rg,
    "dimer": _validate_dimer,
}

PARAM_KEYS = {
    "phase-ed": {"L", "couplings", "grid", "sector"},
    "gap-scan": {"L", "couplings", "k_over_u", "axis", "range", "n_coarse", "refine_tol", "sector"},
    "gap-scaling": {"couplings", "sizes", "axis", "rays", "n_coarse", "refine_tol", "sector"},
    "rg-flow": {"bare", "l_max"},
    "rg-boundary": {"xi_over_u_range", "n_points"},
    "chain-rg": {"boundary", "classify", "nu"},
    "dimer": {"census_L", "crossings"},
}


def load_run_config(command: str, document: dict, overrides: dict) -> RunConfig:
    """Merge a parsed JSON document with flag overrides into a RunConfig."""
    if not isinstance(document, dict):
        raise ConfigError(f"run config must be a JSON object, got {type(document).__name__}")
    _reject_unknown(document, COMMON_KEYS | PARAM_KEYS[command], "run config")
    if "command" in document and document["command"] != command:
        raise ConfigError(
            f"config file is for command {document['command']!r}, invoked as {command!r}"
        )

    seed = overrides.get("seed")
    if seed is None:
        seed = document.get("seed", 0)
    seed = _as_int(seed, "seed", lo=0, hi=2**64 - 1)

    workers = overrides.get("workers")
    if workers is None:
        workers = document.get("workers", os.cpu_count() or 1)
    workers = _as_int(workers, "workers", lo=1)

    tol = overrides.get("tol")
    if tol is None:
        tol = document.get("tol", DEFAULT_TOL[command])
    if tol is not None:
        tol = _as_float(tol, "tol")
        if tol < 0.0 or (tol == 0.0 and command != "rg-flow"):
            raise ConfigError(f"tol must be positive for {command}, got {tol}")

    out = overrides.get("out")
    if out is None:
        out = document.get("out")
    if out is not None and not isinstance(out, str):
        raise ConfigError(f"out must be a path string, got {out!r}")

    params = VALIDATORS[command](document)
    return RunConfig(command=command, seed=seed, workers=workers, tol=tol, out=out, params=params)


# ----------------------------------------------------------------------
# work units (top level so a process pool can pickle them)
# ----------------------------------------------------------------------


def _ratio(value: float, u: float) -> float | None:
    return value / u if u != 0.0 else None


def _coupling_cells(c: CouplingSet) -> dict:
    return {
        "K": c.K, "U": c.U, "gamma_t": c.gamma_t, "gamma_b": c.gamma_b,
        "xi_tt": c.xi_tt, "xi_bb": c.xi_bb, "xi_tb": c.xi_tb,
        "k_over_u": _ratio(c.K, c.U),
        "gamma_over_u": _ratio(c.gamma_t, c.U),
        "xi_over_u": _ratio(c.xi_tt, c.U),
    }


def _phase_ed_point(payload: tuple) -> tuple[list[dict], bool]:
    cdict, L, tol, seed, sector, x_axis, x_val, y_axis, y_val = payload
    row: dict = {"series": "grid", "L": L}
    try:
        couplings = _with_axis_value(CouplingSet(**cdict), x_axis, x_val)
        if y_axis is not None:
            couplings = _with_axis_value(couplings, y_axis, y_val)
        row.update(_coupling_cells(couplings))
        lattice = LatticeSpec(L)
        H = build_hamiltonian(couplings, lattice)
        projector = translation_symmetrizer(lattice) if sector == "symmetric" else None
        result = lowest_eigenpairs(H, k=2, tol=tol, seed=seed, projector=projector)
        e0, e1 = result.eigenvalues[0], result.eigenvalues[1]
        ground = result.eigenvectors[0]
        row.update(
            E0=e0, E1=e1, gap=e1 - e0,
            m_t_staggered=staggered_top_magnetization(ground, lattice),
            m_b=bottom_magnetization(ground, lattice),
            S=staggered_order_parameter(ground, lattice),
        )
        try:
            d_gamma, d_xi = hellmann_feynman_derivatives(ground, lattice, gap=e1 - e0, tol=tol)
            row.update(dE0_dgamma=d_gamma, dE0_dxi=d_xi)
        except DegenerateGroundStateError as err:
            row["error"] = f"derivatives: {err}"
        return [row], False
    except Exception as err:  # per-point isolation: record and move on
        row["series"] = "error"
        row["error"] = f"{type(err).__name__}: {err}"
        return [row], True


def _gap_scan_unit(payload: tuple) -> tuple[list[dict], bool]:
    cdict, L, k_over_u, axis, lo, hi, n_coarse, refine_tol, tol, seed, sector = payload
    ident: dict = {"L": L, "axis": axis, "sector": sector}
    try:
        template = CouplingSet(**cdict)
        if k_over_u is not None:
            template = dataclasses.replace(template, K=k_over_u * template.U)
        ident.update(K=template.K, U=template.U, k_over_u=_ratio(template.K, template.U))
        scan = gap_scan(
            template, LatticeSpec(L), axis, (lo, hi),
            n_coarse=n_coarse, refine_tol=refine_tol, tol=tol, seed=seed, sector=sector,
        )
        rows = [
            ident | {"series": "sample", "value": value, "gap": gap}
            for value, gap in scan.samples
        ]
        rows += [
            ident | {"series": "minimum", "gap": gap, "location": loc}
            for gap, loc in scan.minima
        ]
        gap, loc = scan.global_min
        rows.append(ident | {"series": "global_min", "gap": gap, "location": loc})
        return rows, False
    except Exception as err:
        return [ident | {"series": "error", "error": f"{type(err).__name__}: {err}"}], True


def _gap_scaling_unit(payload: tuple) -> tuple[list[dict], bool]:
    cdict, sizes, axis, xi_over_u, lo, hi, n_coarse, refine_tol, tol, seed, sector = payload
    ident: dict = {"xi_over_u": xi_over_u}
    try:
        template = CouplingSet(**cdict)
        template = dataclasses.replace(template, xi_tt=xi_over_u * template.U)
        ident.update(K=template.K, U=template.U)
        fit = gap_scaling_fit(
            template, sizes, lambda L: (axis, (lo, hi)),
            n_coarse=n_coarse, refine_tol=refine_tol, tol=tol, seed=seed, sector=sector,
        )
        rows = [
            ident | {"series": "point", "L": L, "gap": math.exp(lg), "log_gap": lg}
            for L, lg in zip(fit.sizes, fit.log_gaps)
        ]
        rows.append(ident | {
            "series": "fit",
            "slope": fit.slope, "intercept": fit.intercept, "r_squared": fit.r_squared,
        })
        return rows, False
    except Exception as err:
        return [ident | {"series": "error", "error": f"{type(err).__name__}: {err}"}], True


def _boundary_unit(payload: tuple) -> tuple[list[dict], bool]:
    (r,) = payload
    try:
        xi_over_u, gamma_over_u, ubar, l_conv = _boundary_ray(r)
        return [{
            "series": "boundary", "xi_over_u": xi_over_u,
            "gamma_over_u": gamma_over_u, "ubar": ubar, "l_converged": l_conv,
        }], False
    except Exception as err:
        return [{
            "series": "error", "xi_over_u": r, "error": f"{type(err).__name__}: {err}",
        }], True


def _map_units(worker, payloads: list, workers: int) -> list:
    if workers <= 1 or len(payloads) <= 1:
        return [worker(p) for p in payloads]
    pool_size = min(workers, len(payloads))
    with concurrent.futures.ProcessPoolExecutor(max_workers=pool_size) as pool:
        return list(pool.map(worker, payloads))


# ----------------------------------------------------------------------
# command runners
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class CommandResult:
    columns: tuple[str, ...]
    rows: list[dict]
    units_total: int
    units_failed: int


PHASE_ED_COLUMNS = (
    "series", "L", "K", "U", "gamma_t", "gamma_b", "xi_tt", "xi_bb", "xi_tb",
    "k_over_u", "gamma_over_u", "xi_over_u", "E0", "E1", "gap",
    "m_t_staggered", "m_b", "S", "dE0_dgamma", "dE0_dxi",
    "error", "seed", "version",
)

GAP_SCAN_COLUMNS = (
    "series", "L", "K", "U", "k_over_u", "axis", "sector",
    "value", "gap", "location", "error", "seed", "version",
)

GAP_SCALING_COLUMNS = (
    "series", "xi_over_u", "K", "U", "L", "gap", "log_gap",
    "slope", "intercept", "r_squared", "error", "seed", "version",
)

RG_FLOW_COLUMNS = (
    "series", "l", "U", "Gamma", "V", "Xi", "ubar",
    "alpha1", "alpha2", "z", "beta1", "beta2", "system_scale",
    "error", "seed", "version",
)

RG_BOUNDARY_COLUMNS = (
    "series", "xi_over_u", "gamma_over_u", "ubar", "l_converged",
    "error", "seed", "version",
)

CHAIN_RG_COLUMNS = ("series", "gamma", "xi", "xi_c", "phase", "nu", "error", "seed", "version")

DIMER_COLUMNS = (
    "series", "L", "xi_tt", "columnar", "staggered", "total", "crossing",
    "error", "seed", "version",
)


def _grid_values(rng: list[float], n: int) -> list[float]:
    return [float(v) for v in np.linspace(rng[0], rng[1], n)]


def _run_phase_ed(cfg: RunConfig) -> CommandResult:
    p = cfg.params
    grid = p["grid"]
    if not grid or grid["x_points"] == 0 or grid.get("y_points") == 0:
        return CommandResult(PHASE_ED_COLUMNS, [], 0, 0)

    xs = _grid_values(grid["x_range"], grid["x_points"])
    y_axis = grid.get("y_axis")
    ys = _grid_values(grid["y_range"], grid["y_points"]) if y_axis else [None]

    payloads = [
        (p["couplings"], p["L"], cfg.tol, cfg.seed, p["sector"],
         grid["x_axis"], x, y_axis, y)
        for y in ys
        for x in xs
    ]
    results = _map_units(_phase_ed_point, payloads, cfg.workers)
    rows = [row for unit_rows, _ in results for row in unit_rows]
    failed = sum(1 for _, hard in results if hard)

    # overlay curves live on the K axis when the grid has one
    u = p["couplings"]["U"]
    k_values = (
        xs if grid["x_axis"] == "k" else ys if y_axis == "k" else []
    )
    for series, gamma_of_k in (
        ("overlay_dimer", lambda k: 1.0 / OVERLAY_C + u / (4.0 * k * OVERLAY_C**3)),
        ("overlay_large_k", lambda k: _ratio(k, u)),
    ):
        for k in k_values:
            if k is None or k <= 0.0 or u == 0.0:
                continue
            rows.append({
                "series": series, "L": p["L"], "K": k, "U": u,
                "k_over_u": _ratio(k, u), "gamma_over_u": gamma_of_k(k),
            })
    return CommandResult(PHASE_ED_COLUMNS, rows, len(payloads), failed)


def _run_gap_scan(cfg: RunConfig) -> CommandResult:
    p = cfg.params
    ratios = p["k_over_u"] if p["k_over_u"] is not None else [None]
    lo, hi = p["range"]
    payloads = [
        (p["couplings"], L, r, p["axis"], lo, hi,
         p["n_coarse"], p["refine_tol"], cfg.tol, cfg.seed, p["sector"])
        for L in p["L"]
        for r in ratios
    ]
    results = _map_units(_gap_scan_unit, payloads, cfg.workers)
    rows = [row for unit_rows, _ in results for row in unit_rows]
    failed = sum(1 for _, hard in results if hard)
    return CommandResult(GAP_SCAN_COLUMNS, rows, len(payloads), failed)


def _run_gap_scaling(cfg: RunConfig) -> CommandResult:
    p = cfg.params
    payloads = [
        (p["couplings"], p["sizes"], p["axis"], ray["xi_over_u"],
         ray["range"][0], ray["range"][1],
         p["n_coarse"], p["refine_tol"], cfg.tol, cfg.seed, p["sector"])
        for ray in p["rays"]
    ]
    results = _map_units(_gap_scaling_unit, payloads, cfg.workers)
    rows = [row for unit_rows, _ in results for row in unit_rows]
    failed = sum(1 for _, hard in results if hard)
    return CommandResult(GAP_SCALING_COLUMNS, rows, len(payloads), failed)


def _run_rg_flow(cfg: RunConfig) -> CommandResult:
    p = cfg.params
    bare = DimerRGCouplings(**p["bare"])
    try:
        flow = run_flow(bare, l_max=p["l_max"], ubar_tol=cfg.tol or 0.0)
    except Exception as err:
        row = {"series": "error", "error": f"{type(err).__name__}: {err}"}
        return CommandResult(RG_FLOW_COLUMNS, [row], 1, 1)
    rows = []
    for state in flow:
        c, v = state.couplings, state.varpoint
        rows.append({
            "series": "flow", "l": state.l,
            "U": c.U, "Gamma": c.Gamma, "V": c.V, "Xi": c.Xi, "ubar": state.ubar,
            "alpha1": v.alpha1, "alpha2": v.alpha2, "z": v.z,
            "beta1": v.beta1, "beta2": v.beta2,
            "system_scale": state.system_scale,
        })
    return CommandResult(RG_FLOW_COLUMNS, rows, 1, 0)


def _run_rg_boundary(cfg: RunConfig) -> CommandResult:
    p = cfg.params
    lo, hi = p["xi_over_u_range"]
    payloads = [(float(r),) for r in np.linspace(lo, hi, p["n_points"])]
    results = _map_units(_boundary_unit, payloads, cfg.workers)
    rows = [row for unit_rows, _ in results for row in unit_rows]
    failed = sum(1 for _, hard in results if hard)
    return CommandResult(RG_BOUNDARY_COLUMNS, rows, len(payloads), failed)


def _run_chain_rg(cfg: RunConfig) -> CommandResult:
    p = cfg.params
    rows: list[dict] = []
    total = failed = 0
    if p["boundary"]:
        for gamma in _grid_values(p["boundary"]["gamma_range"], p["boundary"]["n_points"]):
            total += 1
            try:
                rows.append({"series": "boundary", "gamma": gamma,
                             "xi_c": chain_critical_xi(gamma)})
            except Exception as err:
                failed += 1
                rows.append({"series": "error", "gamma": gamma,
                             "error": f"{type(err).__name__}: {err}"})
    for point in p["classify"]:
        total += 1
        try:
            phase = chain_flow_classify(ChainCouplings(point["gamma"], point["xi"]))
            rows.append({"series": "classify", "gamma": point["gamma"],
                         "xi": point["xi"], "phase": phase.value})
        except Exception as err:
            failed += 1
            rows.append({"series": "error", "gamma": point["gamma"], "xi": point["xi"],
                         "error": f"{type(err).__name__}: {err}"})
    if p["nu"]:
        total += 1
        rows.append({"series": "nu", "nu": chain_nu_exponent()})
    return CommandResult(CHAIN_RG_COLUMNS, rows, total, failed)


def _run_dimer(cfg: RunConfig) -> CommandResult:
    p = cfg.params
    rows: list[dict] = []
    total = failed = 0
    for L in p["census_L"]:
        total += 1
        try:
            census = enumerate_ground_space(L)
            rows.append({
                "series": "census", "L": L, "columnar": census.columnar_count,
                "staggered": census.staggered_count, "total": census.total,
            })
        except Exception as err:
            failed += 1
            rows.append({"series": "error", "L": L, "error": f"{type(err).__name__}: {err}"})
    for spec in p["crossings"]:
        total += 1
        try:
            crossing = dimer_level_crossing(0.0, spec["xi_tt"], spec["L"], tuple(spec["range"]))
            rows.append({
                "series": "crossing", "L": spec["L"], "xi_tt": spec["xi_tt"],
                "crossing": crossing,
            })
        except Exception as err:
            failed += 1
            rows.append({"series": "error", "L": spec["L"], "xi_tt": spec["xi_tt"],
                         "error": f"{type(err).__name__}: {err}"})
    return CommandResult(DIMER_COLUMNS, rows, total, failed)


RUNNERS = {
    "phase-ed": _run_phase_ed,
    "gap-scan": _run_gap_scan,
    "gap-scaling": _run_gap_scaling,
    "rg-flow": _run_rg_flow,
    "rg-boundary": _run_rg_boundary,
    "chain-rg": _run_chain_rg,
    "dimer": _run_dimer,
}


# ----------------------------------------------------------------------
# CSV rendering
# ----------------------------------------------------------------------


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return format(float(value), ".17g")


def render_csv(cfg: RunConfig, result: CommandResult, stream, timestamp: str | None = None):
    """Write the metadata header, column header, and data rows.

    Every data row carries the seed and artifact version; the timestamp
    is the only line that varies between identical runs.
    """
    if timestamp is None:
        timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    stream.write(f"# artifact_version = {__version__}\n")
    stream.write(f"# command = {cfg.command}\n")
    stream.write(f"# seed = {cfg.seed}\n")
    stream.write(f"# config_sha256 = {cfg.config_hash()}\n")
    stream.write(f"# generated_at = {timestamp}\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(result.columns)
    for row in result.rows:
        cells = dict(row)
        cells.setdefault("seed", cfg.seed)
        cells.setdefault("version", __version__)
        writer.writerow(_format_cell(cells.get(col)) for col in result.columns)


# ----------------------------------------------------------------------
# entry point
# ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ladderlab",
        description="Frustrated-ladder sweeps: ED observables, gap scans, RG flows and "
        "boundaries, dimer censuses; one CSV per run.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name, help=f"run the {name} sweep")
        cmd.add_argument("--config", help="JSON run configuration file")
        cmd.add_argument("--out", help="output CSV path (default: stdout)")
        cmd.add_argument("--seed", type=int, help="RNG seed recorded in every row")
        cmd.add_argument("--workers", type=int, help="process-pool width (default: cores)")
        cmd.add_argument(
            "--tol", type=float,
            help="solver / flow tolerance; commands with exact arithmetic ignore it",
        )
    return parser


def main(argv: list[str] | None = None) -> int:
    """Console entry point; returns the process exit code.

    0 success, 1 config error, 2 partial failures present, 3 total failure.
    """
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1

    try:
        document: dict = {}
        if args.config is not None:
            try:
                with open(args.config, encoding="utf-8") as fh:
                    document = json.load(fh)
            except OSError as err:
                raise ConfigError(f"cannot read config file: {err}") from None
            except json.JSONDecodeError as err:
                raise ConfigError(f"config file is not valid JSON: {err}") from None
        overrides = {"out": args.out, "seed": args.seed,
                     "workers": args.workers, "tol": args.tol}
        cfg = load_run_config(args.command, document, overrides)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1

    try:
        result = RUNNERS[cfg.command](cfg)
        if cfg.out is None:
            render_csv(cfg, result, sys.stdout)
        else:
            with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
                render_csv(cfg, result, fh)
    except Exception as err:  # post-config crash: nothing usable was produced
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return 3

    if result.units_total and result.units_failed == result.units_total:
        return 3
    if any(row.get("error") for row in result.rows):
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
