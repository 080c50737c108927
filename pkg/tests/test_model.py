"""Hamiltonian assembly, validation, and stoquasticity classification."""

from __future__ import annotations

import numpy as np
import pytest
import scipy.sparse.linalg as spla
from hypothesis import given, settings
from hypothesis import strategies as st

from ladderlab.model import (
    CouplingSet,
    LatticeSpec,
    SpinConfig,
    Stoquasticity,
    apply_curing_transform,
    build_hamiltonian,
    classify_stoquasticity,
)

from oracles import dense_ladder_hamiltonian

GENERIC = dict(K=1.0, U=0.3, gamma_t=0.7, gamma_b=0.2, xi_tt=0.1, xi_bb=-0.2, xi_tb=0.05)


def dense_from_operator(H):
    return H.matmat(np.eye(H.dim))


# ----------------------------------------------------------------------
# assembly against the dense oracle
# ----------------------------------------------------------------------

def test_matches_dense_oracle_elementwise():
    H = build_hamiltonian(CouplingSet(**GENERIC), LatticeSpec(4))
    dense = dense_from_operator(H)
    ref = dense_ladder_hamiltonian(4, **GENERIC)
    assert np.max(np.abs(dense - ref)) <= 1e-14


@pytest.mark.parametrize("overrides", [
    dict(),                                  # K only
    dict(U=-1.2),
    dict(gamma_t=0.4, gamma_b=0.4),
    dict(xi_tt=-0.6, xi_bb=0.3, xi_tb=-0.1),
])
def test_matches_dense_oracle_special_cases(overrides):
    params = dict(K=2.5) | overrides
    H = build_hamiltonian(CouplingSet(**params), LatticeSpec(4))
    ref = dense_ladder_hamiltonian(4, **params)
    assert np.max(np.abs(dense_from_operator(H) - ref)) <= 1e-14


@pytest.mark.parametrize("L", [4, 6])
def test_hermiticity_inner_products(L):
    rng = np.random.default_rng(7)
    H = build_hamiltonian(CouplingSet(**GENERIC), LatticeSpec(L))
    for _ in range(5):
        u = rng.standard_normal(H.dim)
        v = rng.standard_normal(H.dim)
        lhs = u @ H.matvec(v)
        rhs = H.matvec(u) @ v
        assert abs(lhs - rhs) <= 1e-12 * np.linalg.norm(u) * np.linalg.norm(v)


def test_diagonal_only_fast_path():
    # no transverse terms: H is diagonal and matvec is elementwise
    H = build_hamiltonian(CouplingSet(K=1.0, U=0.4), LatticeSpec(4))
    rng = np.random.default_rng(3)
    v = rng.standard_normal(H.dim)
    assert np.array_equal(H.matvec(v), H.diagonal * v)
    # all spins up: every site contributes K(1 - 1 - 1 - 1) + U/2
    all_up = H.dim - 1
    assert H.diagonal[all_up] == pytest.approx(4 * (-2.0 * 1.0 + 0.2), abs=1e-14)


def test_matmat_matches_columnwise_matvec():
    H = build_hamiltonian(CouplingSet(**GENERIC), LatticeSpec(4))
    rng = np.random.default_rng(11)
    B = rng.standard_normal((H.dim, 3))
    out = H.matmat(B)
    for c in range(3):
        assert np.array_equal(out[:, c], H.matvec(B[:, c]))


def test_translation_invariance():
    # conjugating by the one-site shift permutation leaves H unchanged
    L = 4
    H = dense_from_operator(build_hamiltonian(CouplingSet(**GENERIC), LatticeSpec(L)))
    n = 2 * L
    perm = np.empty(1 << n, dtype=np.int64)
    for a in range(1 << n):
        shifted = ((a << 2) | (a >> (n - 2))) & ((1 << n) - 1)
        perm[a] = shifted
    assert np.max(np.abs(H[np.ix_(perm, perm)] - H)) <= 1e-14


# ----------------------------------------------------------------------
# curing transform
# ----------------------------------------------------------------------

@pytest.mark.parametrize("L", [4, 6])
def test_curing_preserves_low_spectrum(L):
    original = CouplingSet(K=1.0, U=0.5, xi_tt=-0.4, xi_bb=-0.3, xi_tb=-0.2)
    cured = apply_curing_transform(original)
    assert (cured.xi_tt, cured.xi_bb, cured.xi_tb) == (0.4, 0.3, 0.2)
    assert classify_stoquasticity(original) is Stoquasticity.AFTER_CURING
    assert classify_stoquasticity(cured) is Stoquasticity.AS_GIVEN

    lat = LatticeSpec(L)
    evals = []
    for c in (original, cured):
        H = build_hamiltonian(c, lat)
        if L == 4:
            w = np.linalg.eigvalsh(dense_from_operator(H))[:4]
        else:
            op = spla.LinearOperator((H.dim, H.dim), matvec=H.matvec)
            w = np.sort(spla.eigsh(op, k=4, which="SA", tol=1e-12,
                                   v0=np.ones(H.dim))[0])
        evals.append(w)
    assert np.max(np.abs(evals[0] - evals[1])) <= 1e-10


def test_curing_rejects_transverse_fields():
    with pytest.raises(ValueError):
        apply_curing_transform(CouplingSet(K=1.0, gamma_t=0.1, xi_tt=-0.4))
    with pytest.raises(ValueError):
        apply_curing_transform(CouplingSet(K=1.0, gamma_b=0.1, xi_tt=-0.4))


# ----------------------------------------------------------------------
# stoquasticity classification
# ----------------------------------------------------------------------

@pytest.mark.parametrize("params, expected", [
    (dict(K=1.0, gamma_t=0.5, gamma_b=0.5, xi_tt=0.2, xi_bb=0.0, xi_tb=0.1),
     Stoquasticity.AS_GIVEN),
    (dict(K=1.0, U=0.2, xi_tt=-0.3), Stoquasticity.AFTER_CURING),
    (dict(K=1.0), Stoquasticity.AS_GIVEN),  # all couplings nonneg, trivially
    (dict(K=1.0, U=0.5, gamma_t=0.4, gamma_b=0.4, xi_tt=-0.2, xi_tb=0.1),
     Stoquasticity.NON_STOQUASTIC),
    # |U/2| >= K closes the non-stoquastic window
    (dict(K=1.0, U=2.0, gamma_t=0.4, gamma_b=0.4, xi_tt=-0.2),
     Stoquasticity.UNDETERMINED),
    # |xi_tb| >= K likewise
    (dict(K=1.0, gamma_t=0.4, gamma_b=0.4, xi_tt=-0.2, xi_tb=-1.5),
     Stoquasticity.UNDETERMINED),
    # one transverse field missing: neither curable nor certified
    (dict(K=1.0, gamma_t=0.4, xi_tt=-0.2), Stoquasticity.UNDETERMINED),
    # negative couplings with fields present, but no field on bottom row
    (dict(K=1.0, gamma_b=0.4, xi_bb=-0.2), Stoquasticity.UNDETERMINED),
])
def test_classification_cases(params, expected):
    assert classify_stoquasticity(CouplingSet(**params)) is expected


def test_as_given_wins_over_after_curing():
    # all couplings zero off the diagonal satisfies both descriptions;
    # the classifier reports the stronger one
    c = CouplingSet(K=1.0, U=0.3)
    assert classify_stoquasticity(c) is Stoquasticity.AS_GIVEN


# ----------------------------------------------------------------------
# value objects
# ----------------------------------------------------------------------

@given(st.integers(min_value=0, max_value=(1 << 8) - 1))
@settings(max_examples=60, deadline=None)
def test_spin_config_render_round_trip(bits):
    cfg = SpinConfig(bits, 4)
    text = cfg.render()
    top, bottom = text.splitlines()
    assert len(top) == len(bottom) == 4
    back = SpinConfig.from_text(text)
    assert back.bits == bits and back.L == 4


def test_spin_config_signs_follow_bits():
    cfg = SpinConfig(0b0110, 2)  # top0=0, bottom0=1, top1=1, bottom1=0
    assert cfg.top(0) == -1 and cfg.bottom(0) == +1
    assert cfg.top(1) == +1 and cfg.bottom(1) == -1


@pytest.mark.parametrize("L", [3, 5, 2, 0, 14, 16])
def test_lattice_rejects_bad_sizes(L):
    with pytest.raises(ValueError):
        LatticeSpec(L)


def test_lattice_rejects_open_boundary():
    with pytest.raises(ValueError):
        LatticeSpec(4, boundary="open")


def test_lattice_properties():
    lat = LatticeSpec(6)
    assert lat.n_spins == 12
    assert lat.dim == 4096


@pytest.mark.parametrize("bad", [float("nan"), float("inf"), True, "1.0", 1 + 2j])
def test_couplings_reject_non_real(bad):
    with pytest.raises((ValueError, TypeError)):
        CouplingSet(K=1.0, U=bad)


def test_couplings_coerce_to_float():
    c = CouplingSet(K=2, xi_tt=1)
    assert isinstance(c.K, float) and isinstance(c.xi_tt, float)


@pytest.mark.parametrize("K", [0.0, -1.0])
def test_hamiltonian_requires_positive_K(K):
    with pytest.raises(ValueError):
        build_hamiltonian(CouplingSet(K=K), LatticeSpec(4))
