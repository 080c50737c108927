"""Real-space RG in the strong-rung limit.

Coarse-grains three columns into one. Each step solves a small constrained
variational problem for the block projector, then updates the couplings
(U, Gamma, V, Xi) and the running critical estimate Ubar by closed-form
recurrences. The fixed-point structure (Ubar limit, scaling dimension of U)
and the penalty-table flow live here too.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
import scipy.optimize

__all__ = [
    "DimerRGCouplings",
    "VariationalPoint",
    "FlowState",
    "PenaltyTable",
    "DimerPhase",
    "variational_objective",
    "minimize_variational",
    "rg_step",
    "initial_flow_state",
    "run_flow",
    "critical_ubar",
    "classify_phase",
    "phase_boundary",
    "scaling_dimension_yU",
    "anomalous_dimension",
    "renormalized_penalties",
    "bare_penalty_table",
    "PENALTY_KEYS",
]

PHI_SQ = (3.0 + math.sqrt(5.0)) / 2.0  # golden ratio squared
SCALE_FACTOR = 3  # odd, so the staggered pattern survives coarse-graining

_CONSTRAINT_TOL = 1e-12


# ----------------------------------------------------------------------
# domain types
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class DimerRGCouplings:
    """Couplings of the coarse-grained top-row Hamiltonian.

    U is the bottom-row longitudinal field, Gamma the top-row transverse
    field, V the emergent top-row longitudinal field (zero before the
    first step), Xi the top-row XX coupling.
    """

    U: float
    Gamma: float
    V: float
    Xi: float

    def __post_init__(self) -> None:
        for name in ("U", "Gamma", "V", "Xi"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ValueError(f"{name} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))

    def scaled(self, c: float) -> DimerRGCouplings:
        return DimerRGCouplings(c * self.U, c * self.Gamma, c * self.V, c * self.Xi)


@dataclass(frozen=True)
class VariationalPoint:
    """Block-projector amplitudes (alpha1, alpha2, z, beta1, beta2).

    beta3 = beta2 is fixed by the symmetric ansatz. Both normalization
    constraints must hold to 1e-12; the canonical gauge representative
    has alpha2 >= 0 and beta2 >= 0.
    """

    alpha1: float
    alpha2: float
    z: float
    beta1: float
    beta2: float

    def __post_init__(self) -> None:
        a = self.alpha1**2 + self.alpha2**2
        b = self.z**2 + self.beta1**2 + 2.0 * self.beta2**2
        if abs(a - 1.0) > _CONSTRAINT_TOL or abs(b - 1.0) > _CONSTRAINT_TOL:
            raise ValueError(
                f"constraint violation: alpha norm {a!r}, block norm {b!r}"
            )

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.alpha1, self.alpha2, self.z, self.beta1, self.beta2)


@dataclass(frozen=True)
class FlowState:
    """One point of the RG trajectory.

    `varpoint` is the minimizer for this state's couplings (the projector
    used by the step that leaves this state). `system_scale` is L(l)/L(0),
    divided by 3 each step. `ubar` tracks U(0) - 3^{-l} U(l) through its
    own recurrence, which stays stable when U(l) diverges; U(l) itself is
    reconstructed as 3^l (bare_u - ubar), never iterated through the x3
    recurrence, whose roundoff would swamp critical flows by l ~ 30.
    """

    l: int
    couplings: DimerRGCouplings
    ubar: float
    varpoint: VariationalPoint
    system_scale: float
    bare_u: float


PENALTY_KEYS = (
    "dd/uu", "uu/dd", "dd/dd", "uu/du", "du/du", "ud/du",
    "dd/du", "uu/ud", "du/ud", "ud/ud", "dd/ud",
)

# Bare penalties in units of K, keyed top-pair/bottom-pair with u=up, d=down.
_BARE_PENALTIES = {
    "dd/uu": 4.0, "uu/dd": 2.0, "dd/dd": 2.0, "uu/du": 3.0, "du/du": 1.0,
    "ud/du": 3.0, "dd/du": 5.0, "uu/ud": 3.0, "du/ud": 3.0, "ud/ud": 1.0,
    "dd/ud": 5.0,
}


@dataclass(frozen=True)
class PenaltyTable:
    """Energy penalties (units of K) for the 11 defect column pairs."""

    values: dict

    def __post_init__(self) -> None:
        if set(self.values) != set(PENALTY_KEYS):
            missing = sorted(set(PENALTY_KEYS) - set(self.values))
            extra = sorted(set(self.values) - set(PENALTY_KEYS))
            raise ValueError(f"bad penalty keys: missing {missing}, extra {extra}")
        for key, value in self.values.items():
            if not (isinstance(value, (int, float)) and not isinstance(value, bool)):
                raise ValueError(f"penalty {key} must be a number, got {value!r}")
            if not math.isfinite(value) or value <= 0.0:
                raise ValueError(f"penalty {key} must be positive, got {value!r}")

    def __getitem__(self, key: str) -> float:
        return self.values[key]


def bare_penalty_table() -> PenaltyTable:
    return PenaltyTable(dict(_BARE_PENALTIES))


class DimerPhase(str, enum.Enum):
    SYMMETRIC = "symmetric"
    STAGGERED = "staggered"
    CRITICAL = "critical"


# ----------------------------------------------------------------------
# variational problem
# ----------------------------------------------------------------------

def variational_objective(
    gamma: float, v: float, xi: float, point: VariationalPoint
) -> float:
    """Trace of the projected block Hamiltonian, up to a constant.

    f = -gamma [(phi^2 - z^2) a1 a2 + 2 b2 (b1 + z a1)]
        - v [(phi^2 - z^2) a1^2 + b1^2] + 2 xi b2 z a2.
    """
    a1, a2, z, b1, b2 = point.as_tuple()
    a = a1**2 + a2**2
    b = z**2 + b1**2 + 2.0 * b2**2
    if abs(a - 1.0) > 1e-8 or abs(b - 1.0) > 1e-8:
        raise ValueError(f"constraint violation: alpha norm {a!r}, block norm {b!r}")
    return (
        -gamma * ((PHI_SQ - z**2) * a1 * a2 + 2.0 * b2 * (b1 + z * a1))
        - v * ((PHI_SQ - z**2) * a1**2 + b1**2)
        + 2.0 * xi * b2 * z * a2
    )


def _angles_objective(angles: np.ndarray, gamma: float, v: float, xi: float):
    """Objective and gradient on the 3-angle chart; vectorized over columns.

    a1 = cos t, a2 = sin t; (z, b1, sqrt2 b2) spherical in (p, q). The
    constraints hold identically, so descent is unconstrained.
    """
    t, p, q = angles
    a1, a2 = np.cos(t), np.sin(t)
    sp, cp = np.sin(p), np.cos(p)
    sq, cq = np.sin(q), np.cos(q)
    z = cp
    b1 = sp * cq
    b2 = sp * sq / np.sqrt(2.0)

    w = PHI_SQ - z**2
    f = (
        -gamma * (w * a1 * a2 + 2.0 * b2 * (b1 + z * a1))
        - v * (w * a1**2 + b1**2)
        + 2.0 * xi * b2 * z * a2
    )
    # partials in point coordinates
    d_a1 = -gamma * (w * a2 + 2.0 * b2 * z) - 2.0 * v * w * a1
    d_a2 = -gamma * w * a1 + 2.0 * xi * b2 * z
    d_z = 2.0 * z * (gamma * a1 * a2 + v * a1**2) - 2.0 * gamma * b2 * a1 + 2.0 * xi * b2 * a2
    d_b1 = -2.0 * gamma * b2 - 2.0 * v * b1
    d_b2 = -2.0 * gamma * (b1 + z * a1) + 2.0 * xi * z * a2
    # chain rule onto the angles
    g_t = d_a1 * (-a2) + d_a2 * a1
    g_p = d_z * (-sp) + d_b1 * cp * cq + d_b2 * cp * sq / np.sqrt(2.0)
    g_q = d_b1 * (-sp * sq) + d_b2 * sp * cq / np.sqrt(2.0)
    return f, np.stack([g_t, g_p, g_q])


def _angles_to_point(t: float, p: float, q: float) -> VariationalPoint:
    return VariationalPoint(
        alpha1=math.cos(t),
        alpha2=math.sin(t),
        z=math.cos(p),
        beta1=math.sin(p) * math.cos(q),
        beta2=math.sin(p) * math.sin(q) / math.sqrt(2.0),
    )


def _canonical_gauge(point: VariationalPoint) -> VariationalPoint:
    # four gauge copies: negate (a1, a2, z) and/or (z, b1, b2); pick the
    # lexicographically largest (a2, b2, a1, b1, z), which lands on
    # a2 >= 0, b2 >= 0 with deterministic tie-breaks at zeros
    a1, a2, z, b1, b2 = point.as_tuple()
    copies = []
    for sa in (1.0, -1.0):
        for sb in (1.0, -1.0):
            copies.append((
                sa * a2 + 0.0, sb * b2 + 0.0, sa * a1 + 0.0,
                sb * b1 + 0.0, sa * sb * z + 0.0,
            ))
    ca2, cb2, ca1, cb1, cz = max(copies)
    return VariationalPoint(alpha1=ca1, alpha2=ca2, z=cz, beta1=cb1, beta2=cb2)


_CANONICAL_ZERO = VariationalPoint(alpha1=1.0, alpha2=0.0, z=0.0, beta1=1.0, beta2=0.0)


def _newton_polish(x: np.ndarray, gamma: float, v: float, xi: float) -> np.ndarray:
    """Drive the analytic gradient to the floor with a damped Newton loop.

    The Hessian comes from central differences of the gradient; near a
    nondegenerate minimum a couple of steps reach point accuracy ~1e-13,
    making the result independent of the descent path that led here.
    """
    h = 1e-6
    for _ in range(6):
        f0, g0 = _angles_objective(x.reshape(3, 1), gamma, v, xi)
        if np.max(np.abs(g0)) < 1e-14:
            break
        hess = np.empty((3, 3))
        for i in range(3):
            e = np.zeros((3, 1))
            e[i] = h
            _, gp = _angles_objective(x.reshape(3, 1) + e, gamma, v, xi)
            _, gm = _angles_objective(x.reshape(3, 1) - e, gamma, v, xi)
            hess[:, i] = (gp - gm)[:, 0] / (2.0 * h)
        try:
            step = np.linalg.solve(0.5 * (hess + hess.T), g0[:, 0])
        except np.linalg.LinAlgError:
            break
        scale = 1.0
        while scale > 1e-4:
            trial = x - scale * step
            f1, _ = _angles_objective(trial.reshape(3, 1), gamma, v, xi)
            if f1 <= f0:
                x = trial
                break
            scale *= 0.5
        else:
            break
    return x


def minimize_variational(gamma: float, v: float, xi: float) -> VariationalPoint:
    """Global minimizer of the projector objective, in canonical gauge.

    Multistart: 48 deterministic seeded starts descend in parallel on the
    angle chart, the best handful get a BFGS polish with the analytic
    gradient plus a Newton finish. Couplings are normalized first, so a
    common positive rescaling returns the same point. Raises if no start
    reaches a stationary point.
    """
    # with only a nonnegative longitudinal field the minimizer is exact
    # (maximize (phi^2 - z^2) a1^2 + b1^2); keeping it exact lets critical
    # flows freeze to the fixed point in floating point
    if gamma == 0.0 and xi == 0.0 and v >= 0.0:
        return _CANONICAL_ZERO
    norm = max(abs(gamma), abs(v), abs(xi))
    gamma, v, xi = gamma / norm, v / norm, xi / norm

    rng = np.random.default_rng(7)
    n = 48
    angles = np.empty((3, n))
    angles[0] = rng.uniform(0.0, 2.0 * np.pi, n)
    angles[1] = rng.uniform(0.0, np.pi, n)
    angles[2] = rng.uniform(0.0, 2.0 * np.pi, n)
    # a few structured starts on the coordinate axes of the chart
    angles[:, 0] = (0.0, 0.5 * np.pi, 0.0)          # a1 = b1 = 1
    angles[:, 1] = (0.25 * np.pi, 0.5 * np.pi, 0.25 * np.pi)
    angles[:, 2] = (-0.25 * np.pi, 0.5 * np.pi, 0.75 * np.pi)
    angles[:, 3] = (0.25 * np.pi, 0.25 * np.pi, 0.5 * np.pi)

    step = np.full(n, 0.1)
    f, g = _angles_objective(angles, gamma, v, xi)
    for _ in range(150):
        trial = angles - step * g
        f_new, g_new = _angles_objective(trial, gamma, v, xi)
        accept = f_new <= f
        angles = np.where(accept, trial, angles)
        f = np.where(accept, f_new, f)
        g = np.where(accept, g_new, g)
        step = np.where(accept, step * 1.2, step * 0.5)
        if np.max(np.abs(g)) < 1e-12 or np.max(step) < 1e-14:
            break

    order = np.argsort(f)
    best_val, best_angles = np.inf, None
    for idx in order[:6]:
        res = scipy.optimize.minimize(
            _angles_objective,
            angles[:, idx],
            args=(gamma, v, xi),
            jac=True,
            method="BFGS",
            options={"gtol": 1e-12, "maxiter": 300},
        )
        if res.fun < best_val:
            best_val, best_angles = res.fun, res.x
    best_angles = _newton_polish(best_angles, gamma, v, xi)
    _, best_grad = _angles_objective(best_angles.reshape(3, 1), gamma, v, xi)
    if np.max(np.abs(best_grad)) > 1e-6:
        raise RuntimeError(
            f"variational search stagnated; best value {best_val:.12g} with "
            f"gradient norm {float(np.max(np.abs(best_grad))):.3g}"
        )
    return _canonical_gauge(_angles_to_point(*best_angles))


# ----------------------------------------------------------------------
# RG recurrences and flows
# ----------------------------------------------------------------------

def initial_flow_state(bare: DimerRGCouplings) -> FlowState:
    """Flow start: l = 0, Ubar = 0, minimizer for the bare couplings."""
    point = minimize_variational(bare.Gamma, bare.V, bare.Xi)
    return FlowState(
        l=0, couplings=bare, ubar=0.0, varpoint=point,
        system_scale=1.0, bare_u=bare.U,
    )


def rg_step(state: FlowState) -> FlowState:
    """One coarse-graining step: three columns become one."""
    c = state.couplings
    a1, a2, z, b1, b2 = state.varpoint.as_tuple()

    pair = 2.0 * b2 * (b1 + z * a1)
    cross = 2.0 * b2 * z * a2
    u_gain = c.Gamma * (pair + (1.0 - z**2) * a1 * a2)
    v_drop = c.V * (2.0 - (1.0 - z**2) * a1**2 - b1**2)

    gamma_next = (
        c.Gamma * (2.0 * b2 * a2 + z * (a1**2 - a2**2))
        - 2.0 * c.V * z * a1 * a2
        + 2.0 * c.Xi * b2 * a1
    )
    v_next = (
        c.Gamma * (pair - (1.0 + z**2) * a1 * a2)
        + c.V * (1.0 - (1.0 + z**2) * a1**2 + b1**2)
        - c.Xi * cross
    )
    xi_next = c.Xi * a2**2 * b2**2
    # Ubar recurrence: the non-3U part of the U update with its sign
    # flipped, damped by 3^{-l-1}; independent of U and numerically stable.
    # U(l+1) then follows from the defining identity U(l) = 3^l (U - Ubar(l)),
    # equivalent to U(l+1) = 3U(l) - ... but free of its 3^l roundoff growth.
    ubar_next = state.ubar + 3.0 ** (-state.l - 1) * (u_gain - v_drop - c.Xi * cross)
    u_next = 3.0 ** (state.l + 1) * (state.bare_u - ubar_next)

    couplings = DimerRGCouplings(u_next, gamma_next, v_next, xi_next)
    point = minimize_variational(gamma_next, v_next, xi_next)
    return FlowState(
        l=state.l + 1,
        couplings=couplings,
        ubar=ubar_next,
        varpoint=point,
        system_scale=state.system_scale / SCALE_FACTOR,
        bare_u=state.bare_u,
    )


def run_flow(
    bare: DimerRGCouplings, l_max: int = 200, ubar_tol: float = 1e-10
) -> list[FlowState]:
    """Iterate rg_step from a bare coupling set, recording every state.

    Stops early once successive Ubar values differ by less than ubar_tol
    (pass 0 to disable). The bare set must have V = 0.
    """
    if not isinstance(l_max, int) or isinstance(l_max, bool) or not 1 <= l_max <= 200:
        raise ValueError(f"l_max must be an integer in [1, 200], got {l_max!r}")
    if ubar_tol < 0.0:
        raise ValueError(f"ubar_tol must be nonnegative, got {ubar_tol!r}")
    if bare.V != 0.0:
        raise ValueError(f"bare couplings must have V = 0, got V = {bare.V!r}")

    states = [initial_flow_state(bare)]
    for _ in range(l_max):
        state = rg_step(states[-1])
        states.append(state)
        if abs(state.ubar - states[-2].ubar) < ubar_tol:
            break
    return states


def critical_ubar(
    gamma: float, xi: float, ubar_tol: float = 1e-10, l_max: int = 200
) -> float:
    """Limit of Ubar(l), the critical bare U for the given (Gamma, Xi).

    Independent of the bare U, so the flow runs with U = 0.
    """
    if ubar_tol <= 0.0:
        raise ValueError(f"ubar_tol must be positive, got {ubar_tol!r}")
    flow = run_flow(DimerRGCouplings(0.0, gamma, 0.0, xi), l_max, ubar_tol)
    if abs(flow[-1].ubar - flow[-2].ubar) >= ubar_tol:
        raise RuntimeError(
            f"Ubar not converged after {l_max} steps; last increment "
            f"{abs(flow[-1].ubar - flow[-2].ubar):.3g}"
        )
    return flow[-1].ubar


def classify_phase(U: float, gamma: float, xi: float) -> DimerPhase:
    """Phase from the sign of U - Ubar (critical within 1e-9 relative)."""
    ubar = critical_ubar(gamma, xi)
    if abs(U - ubar) <= 1e-9 * max(1.0, abs(U)):
        return DimerPhase.CRITICAL
    return DimerPhase.SYMMETRIC if U < ubar else DimerPhase.STAGGERED


def _boundary_ray(r: float) -> tuple[float, float, float, int]:
    """One critical ray: (Xi/U, Gamma/U, Ubar, converged flow length).

    Finds the ray Xi = s * Gamma with s / Ubar(1, s) = r (scale
    covariance makes rays sufficient); the boundary point is then
    (r, 1 / Ubar(1, s)).
    """
    r = float(r)
    if r == 0.0:
        s_star = 0.0
    else:

        def mismatch(s: float) -> float:
            return s - r * critical_ubar(1.0, s)

        # expand the bracket away from 0 until the mismatch changes sign
        inner, outer = 0.0, r * critical_ubar(1.0, 0.0)
        for _ in range(80):
            if mismatch(outer) * (-r) < 0.0:
                break
            inner, outer = outer, 2.0 * outer
        else:
            raise RuntimeError(f"no bracket for boundary ray at Xi/U = {r!r}")
        lo_s, hi_s = sorted((inner, outer))
        s_star = scipy.optimize.brentq(mismatch, lo_s, hi_s, xtol=1e-12)

    flow = run_flow(DimerRGCouplings(0.0, 1.0, 0.0, s_star), 200, 1e-10)
    if abs(flow[-1].ubar - flow[-2].ubar) >= 1e-10:
        raise RuntimeError(f"Ubar not converged on the ray at Xi/U = {r!r}")
    ubar = flow[-1].ubar
    return r, 1.0 / ubar, ubar, flow[-1].l


def phase_boundary(
    xi_over_u_range: tuple[float, float], n_points: int
) -> list[tuple[float, float]]:
    """Critical curve in the (Xi/U, Gamma/U) plane.

    For each requested ratio r = Xi/U, solves the ray condition of
    :func:`_boundary_ray` and emits (r, Gamma/U) = (r, 1 / Ubar(1, s)).
    """
    lo, hi = float(xi_over_u_range[0]), float(xi_over_u_range[1])
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ValueError(f"bad ratio range ({lo!r}, {hi!r})")
    if not isinstance(n_points, int) or isinstance(n_points, bool) or n_points < 2:
        raise ValueError(f"n_points must be an integer >= 2, got {n_points!r}")

    points = []
    for r in np.linspace(lo, hi, n_points):
        ray = _boundary_ray(float(r))
        points.append((ray[0], ray[1]))
    return points


def scaling_dimension_yU(
    gamma: float, xi: float, u0: float | None = None, l_max: int = 40
) -> float:
    """Growth exponent of U(l) near the unstable fixed point.

    Measures log3 of the tail ratios U(l+1)/U(l) along a slightly
    off-critical flow; the offset defaults to 1e-6 relative to Ubar.
    """
    ubar = critical_ubar(gamma, xi)
    if u0 is None:
        u0 = ubar + 1e-6 * max(1.0, abs(ubar))
    elif abs(u0 - ubar) <= 1e-12 * max(1.0, abs(ubar)):
        raise ValueError(
            f"bare U = {u0!r} is exactly critical; the tail of U(l) decays "
            "to zero there, so an off-critical U is required"
        )
    flow = run_flow(DimerRGCouplings(u0, gamma, 0.0, xi), l_max=l_max, ubar_tol=0.0)
    tail = [s.couplings.U for s in flow[-9:]]
    for a, b in zip(tail, tail[1:]):
        if a == 0.0 or b / a <= 0.0:
            raise RuntimeError("insufficient flow tail: U(l) vanished or flipped sign")
    return float(np.mean([math.log(b / a) / math.log(3.0) for a, b in zip(tail, tail[1:])]))


def anomalous_dimension(y_u: float) -> float:
    """eta = 2 + d - 2 y_U at spatial dimension d = 1."""
    return 3.0 - 2.0 * y_u


# ----------------------------------------------------------------------
# penalty-table flow (diagnostic; does not feed back into the couplings)
# ----------------------------------------------------------------------

def renormalized_penalties(table: PenaltyTable, point: VariationalPoint) -> PenaltyTable:
    """One step of the defect-penalty updates.

    All outputs stay positive as long as beta1 or beta2 is nonzero; the
    point with both zero collapses the kept block states onto pure z and
    breaks the dimer structure, so it is rejected.
    """
    z, b1, b2 = point.z, point.beta1, point.beta2
    if b1 == 0.0 and b2 == 0.0:
        raise ValueError(
            "variational point has beta1 = beta2 = 0; the renormalized "
            "penalties lose positivity and the dimer structure breaks"
        )
    zb = z**2 + b2**2
    bb = b1**2 + b2**2
    k = table.values
    return PenaltyTable({
        "dd/uu": k["dd/uu"] * bb * bb,
        "uu/dd": k["uu/dd"],
        "dd/dd": k["dd/dd"],
        "uu/ud": k["uu/ud"],
        "uu/du": k["uu/du"],
        "ud/ud": k["ud/ud"],
        "du/du": k["du/du"],
        "du/ud": k["uu/ud"] * zb + k["du/ud"] * bb,
        "ud/du": k["uu/du"] * zb + k["ud/du"] * bb,
        "dd/ud": k["ud/ud"] * zb + k["dd/ud"] * bb,
        "dd/du": k["du/du"] * zb + k["dd/du"] * bb,
    })
