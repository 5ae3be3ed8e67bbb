import json
from math import sqrt

import numpy as np
import pytest
from scipy import stats

from spinsync.liouvillian import build_superoperator, steady_state
from spinsync.randliouv import (
    choi_minimum_eigenvalue,
    coherent_superoperator,
    dissipator_reference,
    dissipator_superoperator,
    gue_hamiltonian,
    jump_operators,
    matrix_basis,
    perturbation_manifest,
    random_liouvillian,
    trace_preservation_defect,
    wishart_kossakowski,
    write_manifest,
)


# ----------------------------------------------------------------- basis

@pytest.mark.parametrize("dim", [2, 3, 4])
def test_matrix_basis_orthonormal_traceless(dim):
    basis = matrix_basis(dim)
    d = dim * dim - 1
    assert basis.shape == (d, dim, dim)
    flat = basis.reshape(d, dim * dim)
    gram = flat.conj() @ flat.T
    assert np.max(np.abs(gram - np.eye(d))) < 1e-13
    for f in basis:
        assert abs(np.trace(f)) < 1e-14


def test_matrix_basis_layout_two_level():
    basis = matrix_basis(2)
    assert np.allclose(basis[0], np.diag([1, -1]) / sqrt(2))
    e12 = np.zeros((2, 2))
    e12[0, 1] = 1
    assert np.allclose(basis[1], e12)
    assert np.allclose(basis[2], e12.T)
    with pytest.raises(ValueError):
        matrix_basis(1)


# ------------------------------------------------------------------- draws

def test_gue_moments():
    rng = np.random.default_rng(41)
    draws = np.array([gue_hamiltonian(4, rng) for _ in range(2000)])
    assert np.max(np.abs(draws - draws.conj().transpose(0, 2, 1))) < 1e-14
    diag = np.einsum("kii->ki", draws).real
    assert abs(diag.mean()) < 0.05
    assert abs(diag.var() - 2.0) < 0.1
    off = draws[:, np.triu_indices(4, 1)[0], np.triu_indices(4, 1)[1]]
    assert abs(off.real.var() - 1.0) < 0.05
    assert abs(off.imag.var() - 1.0) < 0.05


def test_wishart_kossakowski_properties():
    rng = np.random.default_rng(43)
    for dim in (2, 3, 4):
        d = dim * dim - 1
        k = wishart_kossakowski(dim, rng)
        assert k.shape == (d, d)
        assert np.max(np.abs(k - k.conj().T)) < 1e-13
        assert abs(np.trace(k).real - d) < 1e-10
        assert np.linalg.eigvalsh(k).min() > -1e-12
    # identity factor gives the identity matrix back
    k_id = wishart_kossakowski(2, rng, factor=np.eye(3, dtype=complex))
    assert np.allclose(k_id, np.eye(3), atol=1e-14)
    with pytest.raises(ValueError):
        wishart_kossakowski(2, rng, factor=np.eye(4, dtype=complex))


# -------------------------------------------------------------- dissipator

@pytest.mark.parametrize("dim", [3, 4])
def test_fast_dissipator_matches_reference(dim):
    rng = np.random.default_rng(47)
    basis = matrix_basis(dim)
    k = wishart_kossakowski(dim, rng)
    fast = dissipator_superoperator(k, basis)
    slow = dissipator_reference(k, basis)
    assert np.max(np.abs(fast - slow)) < 1e-12


@pytest.mark.parametrize("dim", [2, 3])
def test_jump_form_matches_kossakowski_form(dim):
    rng = np.random.default_rng(53)
    basis = matrix_basis(dim)
    k = wishart_kossakowski(dim, rng)
    jumps = jump_operators(k, basis)
    assert len(jumps) == dim * dim - 1
    from_jumps = build_superoperator(np.zeros((dim, dim)), jumps)
    direct = dissipator_superoperator(k, basis)
    assert np.max(np.abs(from_jumps - direct)) < 1e-10


def test_depolarizing_kossakowski_steady_state():
    # K = identity on a single qubit: the fully mixed state is stationary
    sop = dissipator_superoperator(np.eye(3), matrix_basis(2))
    res = steady_state(sop)
    assert res.multiplicity == 1
    assert np.max(np.abs(res.rho - np.eye(2) / 2)) < 1e-12


# ------------------------------------------------------------- full draws

def test_random_liouvillian_trace_preserving_and_stable():
    for seed, dim in [(0, 2), (1, 3), (2, 4)]:
        sop = random_liouvillian(dim, np.random.default_rng(seed))
        assert trace_preservation_defect(sop) < 1e-12
        assert np.linalg.eigvals(sop).real.max() < 1e-9


def test_random_liouvillian_draw_order_contract():
    # one rng stream: H first, then K, each from documented constructions
    sop = random_liouvillian(3, np.random.default_rng(7), 0.8, 1.7)
    rng = np.random.default_rng(7)
    ham = gue_hamiltonian(3, rng)
    k = wishart_kossakowski(3, rng)
    manual = 0.8 * coherent_superoperator(ham) + 1.7 * dissipator_superoperator(
        k, matrix_basis(3)
    )
    assert np.array_equal(sop, manual)


def test_random_liouvillian_deterministic():
    a = random_liouvillian(4, np.random.default_rng(11))
    b = random_liouvillian(4, np.random.default_rng(11))
    assert np.array_equal(a, b)


@pytest.mark.parametrize("dim", [3, 4])
def test_choi_positive_at_short_time(dim):
    sop = random_liouvillian(dim, np.random.default_rng(59 + dim))
    assert choi_minimum_eigenvalue(sop, eps=1e-3) > -1e-8


def test_basis_rotation_leaves_ensemble_invariant():
    # rotating the operator basis by a fixed unitary must not change the
    # statistics of the induced dissipators (Wishart K is rotation invariant)
    dim = 3
    d = dim * dim - 1
    basis = matrix_basis(dim)
    q, _ = np.linalg.qr(
        np.random.default_rng(61).normal(size=(d, d))
        + 1j * np.random.default_rng(62).normal(size=(d, d))
    )
    rotated = np.tensordot(q, basis, axes=(1, 0))
    rng_a = np.random.default_rng(63)
    rng_b = np.random.default_rng(64)
    norms_a = []
    norms_b = []
    for _ in range(200):
        norms_a.append(
            np.linalg.norm(dissipator_superoperator(wishart_kossakowski(dim, rng_a), basis))
        )
        norms_b.append(
            np.linalg.norm(dissipator_superoperator(wishart_kossakowski(dim, rng_b), rotated))
        )
    assert stats.ks_2samp(norms_a, norms_b).statistic < 0.15


# ---------------------------------------------------------------- manifest

def test_manifest_checksum_and_roundtrip(tmp_path):
    sop = random_liouvillian(3, np.random.default_rng(71))
    man = perturbation_manifest(71, 3, 1.0, 1.0, sop)
    man_again = perturbation_manifest(71, 3, 1.0, 1.0, sop)
    assert man == man_again
    other = perturbation_manifest(71, 3, 1.0, 1.0, sop * 1.0000001)
    assert other["checksum"] != man["checksum"]
    assert len(man["checksum"]) == 64
    path = tmp_path / "draw.json"
    write_manifest(man, path)
    assert json.loads(path.read_text()) == man
