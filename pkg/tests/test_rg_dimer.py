"""Variational minimizer, coupling recurrences, flows, and penalty updates."""

from __future__ import annotations

import math
from dataclasses import FrozenInstanceError

import numpy as np
import pytest

from oracles import (
    GOLDEN_RATIO_SQ,
    grid_search_minimum,
    recurrence_step,
    refine_minimum,
    renormalized_penalty_map,
    variational_f,
)
from ladderlab.rg_dimer import (
    DimerPhase,
    DimerRGCouplings,
    FlowState,
    PenaltyTable,
    VariationalPoint,
    anomalous_dimension,
    bare_penalty_table,
    classify_phase,
    critical_ubar,
    initial_flow_state,
    minimize_variational,
    phase_boundary,
    renormalized_penalties,
    rg_step,
    run_flow,
    scaling_dimension_yU,
    variational_objective,
)

UBAR_NO_CATALYST = 0.51773501


def canonicalize(a1, a2, z, b1, b2):
    """Reference gauge fixing: lexicographically largest of the 4 copies."""
    copies = [
        (sa * a2, sb * b2, sa * a1, sb * b1, sa * sb * z)
        for sa in (1.0, -1.0)
        for sb in (1.0, -1.0)
    ]
    ca2, cb2, ca1, cb1, cz = max(copies)
    return ca1, ca2, cz, cb1, cb2


def random_point(rng) -> VariationalPoint:
    t, p, q = rng.uniform(0, 2 * np.pi), rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi)
    return VariationalPoint(
        alpha1=math.cos(t),
        alpha2=math.sin(t),
        z=math.cos(p),
        beta1=math.sin(p) * math.cos(q),
        beta2=math.sin(p) * math.sin(q) / math.sqrt(2.0),
    )


# ----------------------------------------------------------------------
# domain types
# ----------------------------------------------------------------------

def test_couplings_validation():
    DimerRGCouplings(0.5, 1.0, 0.0, -1.0)
    for bad in (float("nan"), float("inf"), True, "1.0", None):
        with pytest.raises(ValueError):
            DimerRGCouplings(bad, 1.0, 0.0, 0.0)


def test_point_constraint_validation():
    VariationalPoint(alpha1=1.0, alpha2=0.0, z=0.0, beta1=1.0, beta2=0.0)
    with pytest.raises(ValueError):
        VariationalPoint(alpha1=1.0, alpha2=1e-3, z=0.0, beta1=1.0, beta2=0.0)
    with pytest.raises(ValueError):
        VariationalPoint(alpha1=1.0, alpha2=0.0, z=0.1, beta1=1.0, beta2=0.0)


def test_point_is_frozen():
    p = VariationalPoint(alpha1=1.0, alpha2=0.0, z=0.0, beta1=1.0, beta2=0.0)
    with pytest.raises(FrozenInstanceError):
        p.alpha1 = 0.0


def test_penalty_table_validation():
    table = bare_penalty_table()
    assert table["dd/uu"] == 4.0 and table["du/du"] == 1.0 and table["dd/ud"] == 5.0
    bad = dict(table.values)
    bad.pop("dd/uu")
    with pytest.raises(ValueError):
        PenaltyTable(bad)
    bad = dict(table.values)
    bad["xx/yy"] = 1.0
    with pytest.raises(ValueError):
        PenaltyTable(bad)
    bad = dict(table.values)
    bad["dd/uu"] = 0.0
    with pytest.raises(ValueError):
        PenaltyTable(bad)


# ----------------------------------------------------------------------
# variational objective and minimizer
# ----------------------------------------------------------------------

def test_objective_pure_longitudinal_value():
    point = VariationalPoint(alpha1=1.0, alpha2=0.0, z=0.0, beta1=1.0, beta2=0.0)
    value = variational_objective(0.0, 1.0, 0.0, point)
    assert value == pytest.approx(-(GOLDEN_RATIO_SQ + 1.0), abs=1e-12)
    assert value == pytest.approx(-3.6180340, abs=1e-7)


def test_objective_zero_couplings_vanishes():
    rng = np.random.default_rng(11)
    for _ in range(10):
        assert variational_objective(0.0, 0.0, 0.0, random_point(rng)) == 0.0


def test_objective_rejects_constraint_violation():
    bad = object.__new__(VariationalPoint)
    for name, val in zip(("alpha1", "alpha2", "z", "beta1", "beta2"),
                         (1.0, 0.01, 0.0, 1.0, 0.0)):
        object.__setattr__(bad, name, val)
    with pytest.raises(ValueError):
        variational_objective(1.0, 0.0, 0.0, bad)


def test_objective_matches_reference_formula():
    rng = np.random.default_rng(17)
    for _ in range(20):
        point = random_point(rng)
        g, v, x = rng.uniform(-2, 2, 3)
        assert variational_objective(g, v, x, point) == pytest.approx(
            variational_f(g, v, x, *point.as_tuple()), abs=1e-13
        )


def test_minimizer_zero_couplings_canonical_point():
    p = minimize_variational(0.0, 0.0, 0.0)
    assert p.as_tuple() == (1.0, 0.0, 0.0, 1.0, 0.0)


def test_minimizer_pure_longitudinal():
    p = minimize_variational(0.0, 2.5, 0.0)
    assert p.as_tuple() == (1.0, 0.0, 0.0, 1.0, 0.0)


def test_minimizer_pure_transverse_matches_grid_oracle():
    value, point = grid_search_minimum(1.0, 0.0, 0.0, levels=3, keep=60)
    value, point = refine_minimum(1.0, 0.0, 0.0, *grid_to_angles(point))
    p = minimize_variational(1.0, 0.0, 0.0)
    assert variational_objective(1.0, 0.0, 0.0, p) == pytest.approx(value, abs=1e-8)
    want = canonicalize(*point)
    assert np.allclose(p.as_tuple(), want, atol=1e-5)


def grid_to_angles(point):
    a1, a2, z, b1, b2 = point
    theta = math.atan2(a2, a1)
    p1 = math.acos(max(-1.0, min(1.0, z)))
    p2 = math.atan2(b2 * math.sqrt(2.0), b1)
    return theta, p1, p2


def test_minimizer_pure_xx_sign_structure():
    p = minimize_variational(0.0, 0.0, 1.0)
    assert p.beta2 * p.z * p.alpha2 < 0.0
    value = variational_objective(0.0, 0.0, 1.0, p)
    # optimum of 2 b2 z a2: |a2| = 1, |b2 z| maximal at 1/(2 sqrt 2)
    assert value == pytest.approx(-1.0 / math.sqrt(2.0), abs=1e-9)


def test_minimizer_canonical_gauge_and_degeneracy():
    rng = np.random.default_rng(23)
    for _ in range(8):
        g, v, x = rng.uniform(-1.5, 1.5, 3)
        p = minimize_variational(g, float(abs(v)), x)
        assert p.alpha2 >= 0.0 and p.beta2 >= 0.0
        f0 = variational_objective(g, abs(v), x, p)
        a1, a2, z, b1, b2 = p.as_tuple()
        flip_a = VariationalPoint(alpha1=-a1, alpha2=-a2, z=-z, beta1=b1, beta2=b2)
        flip_b = VariationalPoint(alpha1=a1, alpha2=a2, z=-z, beta1=-b1, beta2=-b2)
        assert variational_objective(g, abs(v), x, flip_a) == pytest.approx(f0, abs=1e-12)
        assert variational_objective(g, abs(v), x, flip_b) == pytest.approx(f0, abs=1e-12)


# ----------------------------------------------------------------------
# single RG step
# ----------------------------------------------------------------------

def make_state(couplings: DimerRGCouplings, ubar=0.0, l=0) -> FlowState:
    point = minimize_variational(couplings.Gamma, couplings.V, couplings.Xi)
    return FlowState(l=l, couplings=couplings, ubar=ubar, varpoint=point,
                     system_scale=3.0 ** (-l), bare_u=couplings.U * 3.0 ** (-l) + ubar)


def test_step_fixed_point_pure_v():
    state = make_state(DimerRGCouplings(0.0, 0.0, 1.0, 0.0))
    nxt = rg_step(state)
    assert nxt.couplings == DimerRGCouplings(0.0, 0.0, 1.0, 0.0)
    assert nxt.ubar == 0.0
    assert nxt.l == 1 and nxt.system_scale == pytest.approx(1.0 / 3.0)


def test_step_all_zero_couplings():
    nxt = rg_step(make_state(DimerRGCouplings(0.0, 0.0, 0.0, 0.0)))
    assert nxt.couplings == DimerRGCouplings(0.0, 0.0, 0.0, 0.0)


def test_step_matches_independent_recurrences():
    bare = DimerRGCouplings(UBAR_NO_CATALYST, 1.0, 0.0, 0.0)
    nxt = rg_step(make_state(bare))

    _, coarse = grid_search_minimum(1.0, 0.0, 0.0, levels=3, keep=60)
    _, point = refine_minimum(1.0, 0.0, 0.0, *grid_to_angles(coarse))
    u2, g2, v2, x2 = recurrence_step(bare.U, bare.Gamma, bare.V, bare.Xi, *point)
    assert nxt.couplings.U == pytest.approx(u2, abs=1e-8)
    assert abs(nxt.couplings.Gamma) == pytest.approx(abs(g2), abs=1e-8)
    assert nxt.couplings.V == pytest.approx(v2, abs=1e-8)
    assert nxt.couplings.Xi == pytest.approx(x2, abs=1e-8)
    assert nxt.ubar == pytest.approx(bare.U - u2 / 3.0, abs=1e-8)


def test_step_linearity_in_couplings():
    base = DimerRGCouplings(0.3, 1.0, 0.0, -0.7)
    c = 2.5
    a = rg_step(make_state(base))
    b = rg_step(make_state(base.scaled(c)))
    assert b.couplings.U == pytest.approx(c * a.couplings.U, rel=1e-9, abs=1e-12)
    assert b.couplings.Gamma == pytest.approx(c * a.couplings.Gamma, rel=1e-9, abs=1e-9)
    assert b.couplings.V == pytest.approx(c * a.couplings.V, rel=1e-9, abs=1e-12)
    assert b.couplings.Xi == pytest.approx(c * a.couplings.Xi, rel=1e-9, abs=1e-12)
    # same point up to the rounding of the normalized couplings
    assert np.allclose(b.varpoint.as_tuple(), a.varpoint.as_tuple(), atol=1e-11)


def test_step_gauge_flip_only_negates_gamma():
    bare = DimerRGCouplings(0.4, 0.9, 0.0, -0.5)
    state = make_state(bare)
    a1, a2, z, b1, b2 = state.varpoint.as_tuple()
    flipped = FlowState(
        l=state.l, couplings=state.couplings, ubar=state.ubar,
        varpoint=VariationalPoint(alpha1=-a1, alpha2=-a2, z=-z, beta1=b1, beta2=b2),
        system_scale=state.system_scale, bare_u=state.bare_u,
    )
    a, b = rg_step(state), rg_step(flipped)
    assert b.couplings.Gamma == pytest.approx(-a.couplings.Gamma, rel=1e-12, abs=1e-15)
    assert b.couplings.U == pytest.approx(a.couplings.U, rel=1e-12, abs=1e-15)
    assert b.couplings.V == pytest.approx(a.couplings.V, rel=1e-12, abs=1e-15)
    assert b.couplings.Xi == pytest.approx(a.couplings.Xi, rel=1e-12, abs=1e-15)
    assert b.ubar == pytest.approx(a.ubar, rel=1e-12, abs=1e-15)


# ----------------------------------------------------------------------
# flows
# ----------------------------------------------------------------------

def test_critical_ubar_frozen_values():
    assert critical_ubar(1.0, 0.0) == pytest.approx(0.51773501, rel=1e-5)
    assert critical_ubar(1.0, -1.0) == pytest.approx(0.52956828, rel=1e-5)
    assert critical_ubar(1.0, 1.0) == pytest.approx(0.61474501, rel=1e-5)
    assert 1.0 / critical_ubar(1.0, 0.0) == pytest.approx(1.9314900, rel=1e-5)


def test_ubar_scale_covariance():
    assert critical_ubar(2.0, 0.0) == pytest.approx(2.0 * critical_ubar(1.0, 0.0), abs=1e-9)
    assert critical_ubar(1.5, -3.0) == pytest.approx(1.5 * critical_ubar(1.0, -2.0), abs=1e-9)


def test_ubar_gamma_zero_sign_symmetry():
    for xi in (0.5, 1.0, 2.0):
        assert abs(critical_ubar(0.0, xi) - critical_ubar(0.0, -xi)) < 1e-10


def test_ubar_independent_of_bare_u():
    flows = [
        run_flow(DimerRGCouplings(u, 1.0, 0.0, 0.0), l_max=15, ubar_tol=0.0)
        for u in (0.0, 0.5, 1.0)
    ]
    for other in flows[1:]:
        for a, b in zip(flows[0], other):
            assert abs(a.ubar - b.ubar) <= 1e-12


def test_flow_reaches_fixed_point_structure():
    # transverse and XX couplings die, the longitudinal pair survives
    rng = np.random.default_rng(31)
    for _ in range(6):
        g = rng.uniform(0.2, 2.0) * rng.choice([-1.0, 1.0])
        x = rng.uniform(-2.0, 2.0) * abs(g)
        flow = run_flow(DimerRGCouplings(0.0, g, 0.0, x), l_max=60, ubar_tol=0.0)
        last = flow[-1].couplings
        assert abs(last.Gamma) < 1e-8 and abs(last.Xi) < 1e-8
        assert last.V > 0.0
        assert flow[-1].ubar > 0.0


def test_flow_state_identity_and_scale():
    flow = run_flow(DimerRGCouplings(0.3, 1.0, 0.0, -0.5), l_max=12, ubar_tol=0.0)
    for st in flow:
        assert st.ubar == pytest.approx(0.3 - 3.0 ** (-st.l) * st.couplings.U, abs=1e-12)
        assert st.system_scale == pytest.approx(3.0 ** (-st.l), rel=1e-12)
    assert [st.l for st in flow] == list(range(13))


def test_flow_early_stop():
    flow = run_flow(DimerRGCouplings(0.0, 1.0, 0.0, 0.0), l_max=200, ubar_tol=1e-10)
    assert len(flow) < 30
    assert abs(flow[-1].ubar - flow[-2].ubar) < 1e-10


def test_flow_validation():
    bare = DimerRGCouplings(0.0, 1.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        run_flow(bare, l_max=0)
    with pytest.raises(ValueError):
        run_flow(bare, l_max=201)
    with pytest.raises(ValueError):
        run_flow(bare, l_max=10.0)
    with pytest.raises(ValueError):
        run_flow(bare, ubar_tol=-1e-3)
    with pytest.raises(ValueError):
        run_flow(DimerRGCouplings(0.0, 1.0, 0.5, 0.0))


def test_classify_phase():
    assert classify_phase(0.4, 1.0, 0.0) is DimerPhase.SYMMETRIC
    assert classify_phase(0.6, 1.0, 0.0) is DimerPhase.STAGGERED
    assert classify_phase(critical_ubar(1.0, 0.0), 1.0, 0.0) is DimerPhase.CRITICAL


# ----------------------------------------------------------------------
# boundary and scaling dimension
# ----------------------------------------------------------------------

def test_boundary_point_without_catalyst():
    [(r, gu)] = phase_boundary((0.0, 1.0), 2)[:1]
    assert r == 0.0
    assert gu == pytest.approx(1.9314900, rel=1e-5)


def test_boundary_shape_and_asymmetry():
    pts = phase_boundary((-1.0, 1.0), 3)
    assert [r for r, _ in pts] == pytest.approx([-1.0, 0.0, 1.0])
    by_r = dict(pts)
    # the staggered phase is sturdier on the negative-catalyst side: the
    # boundary rises toward moderate negative ratios and drops on the
    # positive side
    assert by_r[-1.0] > by_r[0.0] > by_r[1.0]


def test_boundary_validation():
    with pytest.raises(ValueError):
        phase_boundary((1.0, -1.0), 3)
    with pytest.raises(ValueError):
        phase_boundary((-1.0, 1.0), 1)


def test_scaling_dimension_is_one():
    assert scaling_dimension_yU(1.0, 0.0) == pytest.approx(1.0, abs=1e-3)
    assert scaling_dimension_yU(1.0, -1.0) == pytest.approx(1.0, abs=1e-3)


def test_scaling_dimension_rejects_exactly_critical():
    ub = critical_ubar(1.0, 0.0)
    with pytest.raises(ValueError, match="off-critical"):
        scaling_dimension_yU(1.0, 0.0, u0=ub)


def test_anomalous_dimension():
    assert anomalous_dimension(1.0) == 1.0


# ----------------------------------------------------------------------
# penalty updates
# ----------------------------------------------------------------------

def test_penalties_alpha_only_point():
    point = VariationalPoint(alpha1=1.0, alpha2=0.0, z=0.0, beta1=1.0, beta2=0.0)
    out = renormalized_penalties(bare_penalty_table(), point)
    assert out["dd/uu"] == 4.0
    assert out.values == bare_penalty_table().values


def test_penalties_match_reference_map():
    rng = np.random.default_rng(41)
    for _ in range(100):
        point = random_point(rng)
        if point.beta1 == 0.0 and point.beta2 == 0.0:
            continue
        table = PenaltyTable({k: float(v) for k, v in
                              zip(bare_penalty_table().values, rng.uniform(0.5, 5.0, 11))})
        out = renormalized_penalties(table, point)
        want = renormalized_penalty_map(table.values, point.z, point.beta1, point.beta2)
        for key in table.values:
            assert out[key] == pytest.approx(want[key], rel=1e-12)
            assert out[key] > 0.0


def test_penalties_reject_zero_beta_point():
    point = VariationalPoint(alpha1=1.0, alpha2=0.0, z=1.0, beta1=0.0, beta2=0.0)
    with pytest.raises(ValueError):
        renormalized_penalties(bare_penalty_table(), point)
