"""Lattice, couplings, basis encoding, and the matrix-free ladder Hamiltonian.

The model lives on a two-leg ladder of length L with periodic boundaries.
Row "t" (top) carries antiferromagnetic nearest-neighbor ZZ bonds and a
longitudinal field, row "b" (bottom) carries ferromagnetic ZZ bonds and a
counter-field U/2; the rungs are ferromagnetic.  All four K-scale terms share
the same magnitude K, which is what frustrates the top row.  Transverse
fields and XX couplings enter with an overall minus sign:

    H = sum_i [ K (Zt_i Zt_{i+1} - Zb_i Zb_{i+1} - Zt_i Zb_i - Zt_i)
                + (U/2) Zb_i
                - (gamma_t Xt_i + gamma_b Xb_i)
                - (xi_tt Xt_i Xt_{i+1} + xi_bb Xb_i Xb_{i+1}
                   + xi_tb Xt_i Xb_i) ]

Basis states are bit-packed integers: bit 2j holds the top spin of site j,
bit 2j+1 the bottom spin (j = 0..L-1), bit value 1 meaning Z = +1.  The
interleaved layout keeps every bond term inside a window of four adjacent
bits, which is friendly to the flip-mask matvec kernel.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numba
import numpy as np

__all__ = [
    "CouplingSet",
    "LatticeSpec",
    "SpinConfig",
    "HamiltonianOperator",
    "Stoquasticity",
    "build_hamiltonian",
    "classify_stoquasticity",
    "apply_curing_transform",
    "top_bit",
    "bottom_bit",
    "translation_permutation",
]

# Hilbert-space cap: 2L > 26 spins would need > 0.5 GB per state vector.
MAX_TOTAL_SPINS = 26


def top_bit(site: int) -> int:
    """Bit index of the top-row spin at 0-based ``site``."""
    return 2 * site


def bottom_bit(site: int) -> int:
    """Bit index of the bottom-row spin at 0-based ``site``."""
    return 2 * site + 1


# ----------------------------------------------------------------------
# couplings and lattice
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class CouplingSet:
    """All energy couplings of the ladder Hamiltonian.

    K is the shared magnitude of the four frustration-scale terms, U the
    bottom-row counter-field, ``gamma_*`` the transverse fields and
    ``xi_*`` the XX couplings.  Any finite real values are accepted here;
    the K > 0 requirement is enforced when a Hamiltonian is built.
    """

    K: float
    U: float = 0.0
    gamma_t: float = 0.0
    gamma_b: float = 0.0
    xi_tt: float = 0.0
    xi_bb: float = 0.0
    xi_tb: float = 0.0

    def __post_init__(self) -> None:
        for name in ("K", "U", "gamma_t", "gamma_b", "xi_tt", "xi_bb", "xi_tb"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise TypeError(f"coupling {name} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise ValueError(f"coupling {name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))


@dataclass(frozen=True)
class LatticeSpec:
    """Two-leg ladder geometry: L sites per row, periodic boundaries."""

    L: int
    boundary: str = "periodic"

    def __post_init__(self) -> None:
        if not isinstance(self.L, int) or isinstance(self.L, bool):
            raise TypeError(f"L must be an integer, got {self.L!r}")
        if self.L < 4 or self.L % 2 != 0:
            raise ValueError(f"L must be even and >= 4, got {self.L}")
        if 2 * self.L > MAX_TOTAL_SPINS:
            raise ValueError(
                f"2L = {2 * self.L} spins exceeds the desk-scale cap of {MAX_TOTAL_SPINS}"
            )
        if self.boundary != "periodic":
            raise ValueError(f"only periodic boundaries are supported, got {self.boundary!r}")

    @property
    def n_spins(self) -> int:
        return 2 * self.L

    @property
    def dim(self) -> int:
        return 1 << (2 * self.L)


_ARROWS = {"↑": 1, "↓": 0}  # up arrow = bit 1 = Z eigenvalue +1


@dataclass(frozen=True)
class SpinConfig:
    """One computational-basis state of the 2L-spin ladder, bit-packed."""

    bits: int
    L: int

    def __post_init__(self) -> None:
        if not (0 <= self.bits < (1 << (2 * self.L))):
            raise ValueError(f"bits out of range for 2L = {2 * self.L} spins: {self.bits}")

    def top(self, site: int) -> int:
        """Z eigenvalue (+1 or -1) of the top spin at 0-based ``site``."""
        return 1 if (self.bits >> top_bit(site)) & 1 else -1

    def bottom(self, site: int) -> int:
        return 1 if (self.bits >> bottom_bit(site)) & 1 else -1

    def render(self) -> str:
        """Two-row arrow string, top row first, site 0 leftmost."""
        top = "".join("↑" if self.top(j) == 1 else "↓" for j in range(self.L))
        bot = "".join("↑" if self.bottom(j) == 1 else "↓" for j in range(self.L))
        return top + "\n" + bot

    @classmethod
    def from_text(cls, text: str) -> "SpinConfig":
        """Inverse of :meth:`render`."""
        rows = text.strip().split("\n")
        if len(rows) != 2 or len(rows[0]) != len(rows[1]):
            raise ValueError("expected two equal-length arrow rows")
        L = len(rows[0])
        bits = 0
        for j in range(L):
            for row, bit_of in ((rows[0], top_bit), (rows[1], bottom_bit)):
                try:
                    value = _ARROWS[row[j]]
                except KeyError:
                    raise ValueError(f"unexpected character {row[j]!r} in spin text") from None
                bits |= value << bit_of(j)
        return cls(bits=bits, L=L)


# ----------------------------------------------------------------------
# matrix-free Hamiltonian
# ----------------------------------------------------------------------

@numba.njit(cache=True)
def _matvec_kernel(v, diag, masks, coefs, out):  # pragma: no cover - jitted
    dim = v.shape[0]
    n_masks = masks.shape[0]
    for a in range(dim):
        acc = diag[a] * v[a]
        for t in range(n_masks):
            acc += coefs[t] * v[a ^ masks[t]]
        out[a] = acc


@numba.njit(cache=True)
def _matmat_kernel(v, diag, masks, coefs, out):  # pragma: no cover - jitted
    # one gather index per (row, term) serves every column; rows are
    # contiguous in C order, so the inner column loops stream; the
    # two-column case (the solver's block width) runs in registers
    dim, ncols = v.shape
    n_masks = masks.shape[0]
    if ncols == 2:
        for a in range(dim):
            d = diag[a]
            acc0 = d * v[a, 0]
            acc1 = d * v[a, 1]
            for t in range(n_masks):
                c = coefs[t]
                ax = a ^ masks[t]
                acc0 += c * v[ax, 0]
                acc1 += c * v[ax, 1]
            out[a, 0] = acc0
            out[a, 1] = acc1
    else:
        for a in range(dim):
            d = diag[a]
            for j in range(ncols):
                out[a, j] = d * v[a, j]
            for t in range(n_masks):
                c = coefs[t]
                ax = a ^ masks[t]
                for j in range(ncols):
                    out[a, j] += c * v[ax, j]


def _z_pattern(bit: int, dim: int) -> np.ndarray:
    """Z eigenvalues (+-1, int8) of ``bit`` across all basis indices 0..dim-1."""
    period = 1 << bit
    block = np.repeat(np.array([-1, 1], dtype=np.int8), period)
    return np.tile(block, dim // (2 * period))


class HamiltonianOperator:
    """The ladder Hamiltonian as a matrix-free linear operator.

    The diagonal (all ZZ and Z terms) is precomputed once; off-diagonal X
    and XX terms are XOR flip masks applied on the fly.  All matrix
    elements are real and the operator is symmetric by construction.
    """

    def __init__(self, couplings: CouplingSet, lattice: LatticeSpec) -> None:
        if couplings.K <= 0.0:
            raise ValueError(f"K must be positive to build a Hamiltonian, got {couplings.K}")
        self.couplings = couplings
        self.lattice = lattice
        self._diag = self._build_diagonal()
        self._masks, self._coefs = self._build_flip_terms()

    # -- assembly ------------------------------------------------------

    def _build_diagonal(self) -> np.ndarray:
        c, L, dim = self.couplings, self.lattice.L, self.lattice.dim
        diag = np.zeros(dim, dtype=np.float64)
        z = {b: _z_pattern(b, dim) for b in range(2 * L)}
        for j in range(L):
            nxt = (j + 1) % L
            t, b = top_bit(j), bottom_bit(j)
            tn, bn = top_bit(nxt), bottom_bit(nxt)
            diag += c.K * (z[t] * z[tn]).astype(np.float64)
            diag -= c.K * (z[b] * z[bn]).astype(np.float64)
            diag -= c.K * (z[t] * z[b]).astype(np.float64)
            diag -= c.K * z[t]
            diag += 0.5 * c.U * z[b]
        return diag

    def _build_flip_terms(self) -> tuple[np.ndarray, np.ndarray]:
        c, L = self.couplings, self.lattice.L
        masks: list[int] = []
        coefs: list[float] = []

        def add(mask: int, coef: float) -> None:
            if coef != 0.0:
                masks.append(mask)
                coefs.append(coef)

        for j in range(L):
            nxt = (j + 1) % L
            add(1 << top_bit(j), -c.gamma_t)
            add(1 << bottom_bit(j), -c.gamma_b)
            add((1 << top_bit(j)) | (1 << top_bit(nxt)), -c.xi_tt)
            add((1 << bottom_bit(j)) | (1 << bottom_bit(nxt)), -c.xi_bb)
            add((1 << top_bit(j)) | (1 << bottom_bit(j)), -c.xi_tb)
        return (
            np.asarray(masks, dtype=np.int64),
            np.asarray(coefs, dtype=np.float64),
        )

    # -- application ---------------------------------------------------

    @property
    def dim(self) -> int:
        return self.lattice.dim

    @property
    def diagonal(self) -> np.ndarray:
        """Read-only view of the precomputed diagonal."""
        view = self._diag.view()
        view.flags.writeable = False
        return view

    @property
    def is_diagonal(self) -> bool:
        """True when every transverse coefficient vanishes."""
        return self._masks.size == 0

    @property
    def offdiag_abs_sum(self) -> float:
        """Sum of |off-diagonal| entries in any row.

        Every flip mask hits every row exactly once, so the row sums are
        all equal; min(diagonal) - offdiag_abs_sum is a Gershgorin lower
        bound on the spectrum.
        """
        return float(np.sum(np.abs(self._coefs)))

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.ascontiguousarray(v, dtype=np.float64)
        if v.shape != (self.dim,):
            raise ValueError(f"vector shape {v.shape} does not match dimension {self.dim}")
        out = np.empty_like(v)
        if self._masks.size == 0:
            np.multiply(self._diag, v, out=out)
        else:
            _matvec_kernel(v, self._diag, self._masks, self._coefs, out)
        return out

    def matmat(self, block: np.ndarray) -> np.ndarray:
        """Apply to each column of a (dim, m) block in one fused pass."""
        block = np.ascontiguousarray(block, dtype=np.float64)
        if block.ndim != 2 or block.shape[0] != self.dim:
            raise ValueError(f"block shape {block.shape} does not match dimension {self.dim}")
        out = np.empty_like(block)
        if self._masks.size == 0:
            np.multiply(self._diag[:, None], block, out=out)
        else:
            _matmat_kernel(block, self._diag, self._masks, self._coefs, out)
        return out


def build_hamiltonian(couplings: CouplingSet, lattice: LatticeSpec) -> HamiltonianOperator:
    """Construct the matrix-free operator for the given couplings and lattice."""
    return HamiltonianOperator(couplings, lattice)


def translation_permutation(lattice: LatticeSpec) -> np.ndarray:
    """Basis-index permutation of a one-site translation around the ring.

    Site i occupies bits (2i, 2i+1), so shifting every site by one is a
    rotation of the packed bits by two positions.  perm[s] is the index
    of the translated configuration; applying it L times is the
    identity.  The Hamiltonian commutes with this permutation for every
    coupling set, which makes translation-symmetric subspaces invariant.
    """
    L, dim = lattice.L, lattice.dim
    idx = np.arange(dim, dtype=np.int64)
    return ((idx << 2) | (idx >> (2 * L - 2))) & (dim - 1)


# ----------------------------------------------------------------------
# stoquasticity
# ----------------------------------------------------------------------

class Stoquasticity(str, enum.Enum):
    AS_GIVEN = "stoquastic_as_given"
    AFTER_CURING = "stoquastic_after_curing"
    NON_STOQUASTIC = "non_stoquastic"
    UNDETERMINED = "undetermined"


def classify_stoquasticity(couplings: CouplingSet) -> Stoquasticity:
    """Classify the computational-basis sign structure of the Hamiltonian.

    ``AS_GIVEN``: all XX couplings are >= 0, so every off-diagonal element
    is already nonpositive.  ``AFTER_CURING``: no transverse fields and all
    XX couplings <= 0, so conjugating alternate spins by Z (equivalently,
    flipping the signs of all three XX couplings) cures the signs.
    ``NON_STOQUASTIC``: positive transverse fields, at least one negative
    XX coupling, and the field hierarchy |U/2| < K, |xi_tb| < K under which
    no single-qubit Clifford conjugation can cure the Hamiltonian.
    Everything else is ``UNDETERMINED``; deciding curability in general is
    NP-complete, so no search is attempted.
    """
    c = couplings
    if c.xi_tt >= 0.0 and c.xi_bb >= 0.0 and c.xi_tb >= 0.0:
        return Stoquasticity.AS_GIVEN
    if c.gamma_t == 0.0 and c.gamma_b == 0.0 and c.xi_tt <= 0.0 and c.xi_bb <= 0.0 and c.xi_tb <= 0.0:
        return Stoquasticity.AFTER_CURING
    if (
        c.gamma_t > 0.0
        and c.gamma_b > 0.0
        and (c.xi_tt < 0.0 or c.xi_bb < 0.0 or c.xi_tb < 0.0)
        and abs(c.U) / 2.0 < c.K
        and abs(c.xi_tb) < c.K
    ):
        return Stoquasticity.NON_STOQUASTIC
    return Stoquasticity.UNDETERMINED


def apply_curing_transform(couplings: CouplingSet) -> CouplingSet:
    """Flip the signs of all three XX couplings.

    Valid only without transverse fields: the transform conjugates odd
    top-row and even bottom-row spins by Z, which would also flip X terms.
    The returned couplings generate a unitarily equivalent Hamiltonian.
    """
    if couplings.gamma_t != 0.0 or couplings.gamma_b != 0.0:
        raise ValueError("curing transform requires gamma_t = gamma_b = 0")
    return replace(
        couplings,
        xi_tt=-couplings.xi_tt,
        xi_bb=-couplings.xi_bb,
        xi_tb=-couplings.xi_tb,
    )
