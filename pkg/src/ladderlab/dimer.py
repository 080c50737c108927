"""Dual-lattice dimer picture of the strongly frustrated ladder.

Zero-penalty spin configurations map one-to-one onto hardcore dimer
coverings of the dual two-leg ladder: a top down spin becomes a top
horizontal dimer, a ferromagnetic top bond a vertical dimer, and an
antiferromagnetic rung a bottom horizontal dimer. Coverings split into
winding sectors w = 0 (columnar) and w = +-1 (the two staggered states),
and the restricted Hamiltonian never mixes sectors, so the transition in
this limit is a strict level crossing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import SpinConfig

__all__ = [
    "DimerCovering",
    "SectorCensus",
    "spin_to_dimer",
    "enumerate_ground_space",
    "build_dimer_hamiltonian",
    "dimer_level_crossing",
]

MAX_DIMER_BASIS = 20000


# ----------------------------------------------------------------------
# covering and census types
# ----------------------------------------------------------------------


def _bit(mask: int, i: int, L: int) -> int:
    return (mask >> (i % L)) & 1


def _winding_values(L: int, top: int, bottom: int) -> set[int]:
    # per-column sublattice-signed difference; the sign anchors the
    # covering with top dimers on even 0-based columns at w = +1
    values = set()
    for i in range(L):
        t, b = _bit(top, i, L), _bit(bottom, i, L)
        if t != b:
            values.add((t - b) if i % 2 == 0 else (b - t))
    return values or {0}


@dataclass(frozen=True)
class DimerCovering:
    """Hardcore dimer covering of the dual two-leg ladder of length L.

    Bit i of ``top_dimers`` / ``bottom_dimers`` marks a horizontal dimer
    on the row edge centered at column i; bit i of ``vertical_dimers``
    marks a rung at bond (i, i+1). ``w`` is the winding number: the
    signed top-minus-bottom dimer difference, identical on every
    plaquette.
    """

    L: int
    top_dimers: int
    bottom_dimers: int
    vertical_dimers: int
    w: int

    def __post_init__(self):
        if not isinstance(self.L, int) or isinstance(self.L, bool) or self.L < 4 or self.L % 2:
            raise ValueError(f"L must be an even integer >= 4, got {self.L!r}")
        for name in ("top_dimers", "bottom_dimers", "vertical_dimers"):
            mask = getattr(self, name)
            if not isinstance(mask, int) or isinstance(mask, bool):
                raise TypeError(f"{name} must be an int bit mask, got {mask!r}")
            if not 0 <= mask < (1 << self.L):
                raise ValueError(f"{name} out of range for L = {self.L}: {mask}")
        L, t, b, v = self.L, self.top_dimers, self.bottom_dimers, self.vertical_dimers
        for j in range(L):
            # dual site between columns j and j+1, on each row
            if _bit(t, j, L) + _bit(t, j + 1, L) + _bit(v, j, L) != 1:
                raise ValueError(f"hardcore constraint broken at top dual site {j}")
            if _bit(b, j, L) + _bit(b, j + 1, L) + _bit(v, j, L) != 1:
                raise ValueError(f"hardcore constraint broken at bottom dual site {j}")
        values = _winding_values(L, t, b)
        if len(values) != 1:
            raise ValueError(f"winding number is not plaquette-independent: {sorted(values)}")
        if self.w != next(iter(values)):
            raise ValueError(f"stated w = {self.w} but masks give {next(iter(values))}")


@dataclass(frozen=True)
class SectorCensus:
    """Size of the zero-penalty space, split by winding sector."""

    L: int
    columnar_count: int
    staggered_count: int
    total: int

    def __post_init__(self):
        if self.staggered_count != 2:
            raise ValueError(f"staggered sector always holds 2 states, got {self.staggered_count}")
        if self.total != self.columnar_count + self.staggered_count:
            raise ValueError("total must equal columnar_count + staggered_count")


# ----------------------------------------------------------------------
# spin-to-dimer mapping
# ----------------------------------------------------------------------


def spin_to_dimer(config: SpinConfig) -> DimerCovering | None:
    """Covering for a zero-penalty configuration, None for anything else.

    Rules: top down spin -> top dimer at that column; ferromagnetic top
    bond -> vertical dimer; antiferromagnetic rung -> bottom dimer.
    """
    L = config.L
    top = [config.top(i) for i in range(L)]
    bottom = [config.bottom(i) for i in range(L)]
    columnar = all(s == 1 for s in bottom) and all(
        (top[i], top[(i + 1) % L]) != (-1, -1) for i in range(L)
    )
    staggered = all(s == -1 for s in bottom) and all(
        top[i] != top[(i + 1) % L] for i in range(L)
    )
    if not (columnar or staggered):
        return None
    t = sum(1 << i for i in range(L) if top[i] == -1)
    v = sum(1 << i for i in range(L) if top[i] == top[(i + 1) % L])
    b = sum(1 << i for i in range(L) if top[i] != bottom[i])
    w = next(iter(_winding_values(L, t, b)))
    return DimerCovering(L=L, top_dimers=t, bottom_dimers=b, vertical_dimers=v, w=w)


# ----------------------------------------------------------------------
# ground-space enumeration
# ----------------------------------------------------------------------


def _fibonacci_like(n: int) -> int:
    # F_1 = 2, F_2 = 3, F_n = F_{n-1} + F_{n-2}
    a, b = 2, 3
    if n == 1:
        return a
    for _ in range(n - 2):
        a, b = b, a + b
    return b


def _columnar_top_masks(L: int) -> list[int]:
    """Top down-spin masks with no two cyclically adjacent bits set."""
    out: list[int] = []

    def grow(pos: int, mask: int, prev: int, first: int) -> None:
        if pos == L:
            if not (prev and first):
                out.append(mask)
            return
        grow(pos + 1, mask, 0, first)
        if not prev:
            grow(pos + 1, mask | (1 << pos), 1, first if pos else 1)

    grow(0, 0, 0, 0)
    out.sort()
    return out


def enumerate_ground_space(L) -> SectorCensus:
    """Census of the zero-penalty space for an even 4 <= L <= 20.

    The columnar sector is built by the no-adjacent-down recursion and
    checked against the closed count F_{L-1} + F_{L-3}; the staggered
    sector always holds the two bottom-down states.
    """
    if not isinstance(L, int) or isinstance(L, bool) or L % 2 or not 4 <= L <= 20:
        raise ValueError(f"L must be an even integer in [4, 20], got {L!r}")
    columnar = len(_columnar_top_masks(L))
    expected = _fibonacci_like(L - 1) + _fibonacci_like(L - 3)
    if columnar != expected:
        raise AssertionError(
            f"columnar enumeration gave {columnar}, closed count gives {expected}"
        )
    return SectorCensus(L=L, columnar_count=columnar, staggered_count=2, total=columnar + 2)


# ----------------------------------------------------------------------
# restricted Hamiltonian
# ----------------------------------------------------------------------


def _covering_from_top_mask(L: int, t: int) -> DimerCovering:
    # columnar sector: bottom dimers pair with top ones, rungs fill bonds
    # between consecutive empty columns
    v = sum(
        1 << i
        for i in range(L)
        if not _bit(t, i, L) and not _bit(t, i + 1, L)
    )
    return DimerCovering(L=L, top_dimers=t, bottom_dimers=t, vertical_dimers=v, w=0)


def _dimer_basis(L: int) -> list[DimerCovering]:
    """Canonical basis: columnar sector by top-dimer mask, then w=+1, w=-1."""
    basis = [_covering_from_top_mask(L, t) for t in _columnar_top_masks(L)]
    even = sum(1 << i for i in range(0, L, 2))
    odd = sum(1 << i for i in range(1, L, 2))
    basis.append(DimerCovering(L=L, top_dimers=even, bottom_dimers=odd, vertical_dimers=0, w=1))
    basis.append(DimerCovering(L=L, top_dimers=odd, bottom_dimers=even, vertical_dimers=0, w=-1))
    return basis


def _columnar_parts(L: int):
    """Diagonal counts and the flip / shift adjacency of the w=0 block."""
    masks = _columnar_top_masks(L)
    index = {t: a for a, t in enumerate(masks)}
    n = len(masks)
    diag = np.empty(n)
    flip = np.zeros((n, n))
    shift = np.zeros((n, n))
    for a, t in enumerate(masks):
        cov = _covering_from_top_mask(L, t)
        n_vert = bin(cov.vertical_dimers).count("1")
        n_eq = bin(cov.top_dimers & cov.bottom_dimers).count("1")
        diag[a] = n_vert + 2 * n_eq
        for i in range(L):
            if _bit(t, i, L):
                # both horizontal dimers on plaquette i flip to two rungs
                b = index[t ^ (1 << i)]
                flip[a, b] = flip[b, a] = 1.0
                # horizontal pair plus the rung one bond over slides right
                if _bit(cov.vertical_dimers, i + 1, L):
                    b = index[t ^ (1 << i) ^ (1 << ((i + 1) % L))]
                    shift[a, b] = shift[b, a] = 1.0
    return diag, flip, shift


def build_dimer_hamiltonian(U: float, gamma_t: float, xi_tt: float, L) -> np.ndarray:
    """Dense restricted Hamiltonian over the canonical covering basis.

    Potential U per vertical dimer plus 2U per horizontal-dimer pair,
    kinetic -gamma_t plaquette flips and -xi_tt pair shifts. Every
    off-diagonal element lives inside the w=0 block; the two staggered
    rows are exactly zero.
    """
    for name, val in (("U", U), ("gamma_t", gamma_t), ("xi_tt", xi_tt)):
        if isinstance(val, bool) or not isinstance(val, (int, float, np.integer, np.floating)):
            raise TypeError(f"{name} must be a real number, got {val!r}")
        if not math.isfinite(float(val)):
            raise ValueError(f"{name} must be finite, got {val!r}")
    if not isinstance(L, int) or isinstance(L, bool) or L % 2 or L < 4:
        raise ValueError(f"L must be an even integer >= 4, got {L!r}")
    size = _fibonacci_like(L - 1) + _fibonacci_like(L - 3) + 2
    if size > MAX_DIMER_BASIS:
        raise ValueError(f"covering basis holds {size} states, cap is {MAX_DIMER_BASIS}")
    diag, flip, shift = _columnar_parts(L)
    n = len(diag)
    h = np.zeros((n + 2, n + 2))
    h[:n, :n] = float(U) * np.diag(diag) - float(gamma_t) * flip - float(xi_tt) * shift
    return h


# ----------------------------------------------------------------------
# level crossing
# ----------------------------------------------------------------------


def dimer_level_crossing(K_ignored, xi_tt: float, L: int, gamma_range) -> float:
    """Gamma_t/U where the columnar ground level crosses the staggered one.

    K drops out in this limit, hence the ignored first argument; xi_tt is
    measured in units of U. The staggered levels sit exactly at zero, so
    the columnar ground energy is a sign-definite objective and bisection
    resolves the strict crossing to 1e-8.
    """
    lo, hi = float(gamma_range[0]), float(gamma_range[1])
    if not lo < hi:
        raise ValueError(f"range must satisfy lo < hi, got ({lo}, {hi})")
    if not isinstance(L, int) or isinstance(L, bool) or L % 2 or L < 4:
        raise ValueError(f"L must be an even integer >= 4, got {L!r}")
    if _fibonacci_like(L - 1) + _fibonacci_like(L - 3) + 2 > MAX_DIMER_BASIS:
        raise ValueError(f"covering basis for L = {L} exceeds the cap {MAX_DIMER_BASIS}")
    diag, flip, shift = _columnar_parts(L)
    base = np.diag(diag) - float(xi_tt) * shift

    def columnar_ground(g: float) -> float:
        return float(np.linalg.eigvalsh(base - g * flip)[0])

    f_lo, f_hi = columnar_ground(lo), columnar_ground(hi)
    if not (f_lo > 0.0 > f_hi):
        raise ValueError(
            f"no sign change in range: E({lo}) = {f_lo:.6g}, E({hi}) = {f_hi:.6g}"
        )
    while hi - lo > 1e-8:
        mid = 0.5 * (lo + hi)
        if columnar_ground(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
