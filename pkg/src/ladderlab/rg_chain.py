"""Two-site block RG for the transverse-field Ising chain with XX terms.

In the limit of a strong bottom-row field the ladder reduces to a single
antiferromagnetic chain; after a gauge flip it is the ferromagnetic chain
with couplings (K, Gamma, Xi). Blocking two sites and keeping the low
doublet of the intrablock Hamiltonian gives closed recurrences for the
ratios gamma = Gamma/K and xi = Xi/K. The XX ratio dies after one step,
so the flow degenerates to the exactly solvable gamma' = gamma**2 map.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ChainCouplings",
    "ChainPhase",
    "chain_rg_step",
    "chain_critical_xi",
    "chain_flow_classify",
    "chain_nu_exponent",
]

SCALE_FACTOR = 2

_MAX_STEPS = 200
_GAMMA_HIGH = 1e6
_GAMMA_LOW = 1e-6
# band around the unstable fixed point; boundary points computed in double
# precision land within a few ulps of 1, far inside
_CRITICAL_BAND = 1e-12


# ----------------------------------------------------------------------
# couplings
# ----------------------------------------------------------------------


def _as_float(name: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float, np.integer, np.floating)):
        raise TypeError(f"{name} must be a real number, got {value!r}")
    out = float(value)
    if not math.isfinite(out):
        raise ValueError(f"{name} must be finite, got {out!r}")
    return out


@dataclass(frozen=True)
class ChainCouplings:
    """Coupling ratios (gamma, xi) = (Gamma/K, Xi/K) of the chain.

    Requires gamma >= 0 (the gauge transformation fixes the sign) and
    |xi| <= sqrt(1 + gamma**2); the block projection is built on the low
    doublet, which stops being the low doublet outside that region. The
    boundary itself is kept so the curve endpoint (0, 1) is representable.
    """

    gamma: float
    xi: float

    def __post_init__(self):
        g = _as_float("gamma", self.gamma)
        x = _as_float("xi", self.xi)
        if g < 0.0:
            raise ValueError(f"gamma must be nonnegative, got {g}")
        if abs(x) > math.sqrt(1.0 + g * g):
            raise ValueError(
                f"|xi| = {abs(x)} exceeds sqrt(1 + gamma^2) = {math.sqrt(1.0 + g * g)}"
            )
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "xi", x)


class ChainPhase(str, enum.Enum):
    STAGGERED = "antiferromagnetic_staggered"
    SYMMETRIC = "paramagnetic_symmetric"
    CRITICAL = "critical"


# ----------------------------------------------------------------------
# recurrence and critical curve
# ----------------------------------------------------------------------


def chain_rg_step(c: ChainCouplings) -> ChainCouplings:
    """One blocking step: gamma' = gamma^2 + xi (1 + 2 gamma^2) / sqrt(1 + gamma^2), xi' = 0.

    A strongly negative xi can drive gamma' negative; with xi' = 0 that
    sign is pure gauge (conjugate every site by Z), so the step flips it
    back into the gamma >= 0 half-plane.
    """
    g, x = c.gamma, c.xi
    g_next = g * g + x * (1.0 + 2.0 * g * g) / math.sqrt(1.0 + g * g)
    return ChainCouplings(gamma=abs(g_next), xi=0.0)


def chain_critical_xi(gamma: float) -> float:
    """xi on the critical curve: (1 - gamma^2) sqrt(1 + gamma^2) / (1 + 2 gamma^2).

    One step from (gamma, chain_critical_xi(gamma)) lands on the unstable
    fixed point gamma' = 1. Every curve point except (0, 1) lies strictly
    inside the validity region.
    """
    g = _as_float("gamma", gamma)
    if g < 0.0:
        raise ValueError(f"gamma must be nonnegative, got {g}")
    return (1.0 - g * g) * math.sqrt(1.0 + g * g) / (1.0 + 2.0 * g * g)


def chain_flow_classify(c: ChainCouplings) -> ChainPhase:
    """Iterate the flow and report which fixed point absorbs it.

    After the first step the flow is the pure quadratic map, so escape in
    either direction is doubly exponential; a trajectory pinned near 1 is
    critical at double precision.
    """
    g = chain_rg_step(c).gamma
    for _ in range(_MAX_STEPS):
        if abs(g - 1.0) <= _CRITICAL_BAND:
            return ChainPhase.CRITICAL
        if g > _GAMMA_HIGH:
            return ChainPhase.SYMMETRIC
        if g < _GAMMA_LOW:
            return ChainPhase.STAGGERED
        g = g * g
    return ChainPhase.CRITICAL


def _flow_slope(gamma: float, h: float = 2.0**-20) -> float:
    """Finite-difference d(gamma')/d(gamma) of the xi = 0 flow.

    Centered stencil, falling back to a forward one when gamma - h would
    leave the domain.
    """
    g = _as_float("gamma", gamma)
    lo = g - h
    if lo < 0.0:
        lo = g
    hi = g + h
    g_hi = chain_rg_step(ChainCouplings(gamma=hi, xi=0.0)).gamma
    g_lo = chain_rg_step(ChainCouplings(gamma=lo, xi=0.0)).gamma
    return (g_hi - g_lo) / (hi - lo)


def chain_nu_exponent() -> float:
    """Correlation-length exponent nu = 1 / y_gamma from the linearized flow.

    The slope at the unstable fixed point gamma = 1 is differenced with a
    power-of-two step, which keeps the symmetric difference of the
    quadratic map exact, so y_gamma = log2(slope) comes out on the nose.
    """
    slope = _flow_slope(1.0)
    y_gamma = math.log(slope) / math.log(SCALE_FACTOR)
    return 1.0 / y_gamma


# ----------------------------------------------------------------------
# direct block projection (internal cross-check of the closed form)
# ----------------------------------------------------------------------

_X1 = np.array([[0.0, 1.0], [1.0, 0.0]])
_Z1 = np.array([[1.0, 0.0], [0.0, -1.0]])
_I1 = np.eye(2)


def _kron4(a, b, c, d):
    # site 0 is the leftmost factor
    return np.kron(np.kron(np.kron(a, b), c), d)


def _projected_segment(gamma: float, xi: float):
    """Project a two-block chain segment onto the kept doublets.

    Sites 0..3 with K = 1; blocks are (0, 1) and (2, 3), one interblock
    bond. Fields sit on the left site of each block and on the bond site.
    Returns the coarse couplings read off by Pauli traces:
    (k, field_1, field_2, xx), where field_1 carries the bond contribution
    and field_2 only the intrablock xi of the dangling block.
    """
    def site(op, s):
        mats = [_I1] * 4
        mats[s] = op
        return _kron4(*mats)

    def zz(i, j):
        return site(_Z1, i) @ site(_Z1, j)

    def xx(i, j):
        return site(_X1, i) @ site(_X1, j)

    intra = lambda i: -zz(i, i + 1) - gamma * site(_X1, i) - xi * xx(i, i + 1)
    h = intra(0) + intra(2) - zz(1, 2) - gamma * site(_X1, 1) - xi * xx(1, 2)

    root = math.sqrt(1.0 + gamma * gamma)
    cp = math.sqrt(0.5 * (1.0 + gamma / root))
    cm = math.sqrt(0.5 * (1.0 - gamma / root))
    plus = np.array([1.0, 1.0]) / math.sqrt(2.0)   # X = +1, components (up, down)
    minus = np.array([1.0, -1.0]) / math.sqrt(2.0)
    # kept doublet of one block, left site first in the kron order
    sym = cp * np.kron(plus, plus) + cm * np.kron(minus, minus)
    anti = cp * np.kron(plus, minus) + cm * np.kron(minus, plus)
    up_t = (sym + anti) / math.sqrt(2.0)
    dn_t = (sym - anti) / math.sqrt(2.0)

    basis = np.column_stack(
        [np.kron(v1, v2) for v1 in (up_t, dn_t) for v2 in (up_t, dn_t)]
    )
    m = basis.T @ h @ basis

    zz_c = np.kron(_Z1, _Z1)
    x1_c = np.kron(_X1, _I1)
    x2_c = np.kron(_I1, _X1)
    xx_c = np.kron(_X1, _X1)
    coeff = lambda op: -float(np.trace(m @ op)) / 4.0
    return coeff(zz_c), coeff(x1_c), coeff(x2_c), coeff(xx_c)
