import numpy as np
import pytest

from spinsync.liouvillian import full_spectrum, steady_state
from spinsync.models import (
    build_preset,
    chain_offdiagonal_positions,
    chain_sectors,
    coherence_eigenvalue,
    coupled_pair_perturbation,
    coupled_spin1_pair,
    exchange_operator,
    flip_operator,
    magnetization_operator,
    mixture_state,
    oscillating_coherence,
    pair_dark_states,
    pair_oscillating_mode,
    sector_steady_states,
    spin1_chain,
    spin_half_pair,
)
from spinsync.operators import SpinSpec, embed, spin_operators


# ---------------------------------------------------------------- spin-1 chain

def test_chain_hamiltonian_is_hermitian_and_symmetric():
    model = spin1_chain(n=3, omega=1.0, j=0.5, delta=0.5, gamma=2.0)
    h = model.hamiltonian
    assert np.max(np.abs(h - h.conj().T)) < 1e-12
    m_op = magnetization_operator(3)
    assert np.max(np.abs(h @ m_op - m_op @ h)) < 1e-12
    for jump in model.jumps:
        assert np.max(np.abs(jump @ m_op - m_op @ jump)) < 1e-12


def test_chain_flip_commutation():
    p = flip_operator(3)
    assert np.allclose(p @ p, np.eye(27))
    model = spin1_chain(n=3, omega=1.0)
    # jump operators commute with the flip; H does not once omega != 0
    for jump in model.jumps:
        assert np.max(np.abs(jump @ p - p @ jump)) < 1e-12
    assert np.max(np.abs(model.hamiltonian @ p - p @ model.hamiltonian)) > 1e-3
    h0 = spin1_chain(n=3, omega=0.0).hamiltonian
    assert np.max(np.abs(h0 @ p - p @ h0)) < 1e-12


def test_chain_rejects_bad_inputs():
    with pytest.raises(ValueError):
        spin1_chain(n=1)
    with pytest.raises(ValueError):
        spin1_chain(gamma=-0.5)


def test_sector_dimensions_and_completeness():
    sectors = dict(chain_sectors(3))
    dims = {label: int(round(np.trace(p).real)) for label, p in sectors.items()}
    assert dims == {
        "M+3": 1, "M+2": 3, "M+1": 6, "M0+": 4, "M0-": 3,
        "M-1": 6, "M-2": 3, "M-3": 1,
    }
    total = sum(sectors.values())
    assert np.allclose(total, np.eye(27), atol=1e-12)
    labels = [lab for lab, _ in chain_sectors(3)]
    assert labels == ["M+3", "M+2", "M+1", "M0+", "M0-", "M-1", "M-2", "M-3"]
    # projectors: idempotent, mutually orthogonal, flip maps M to -M
    p = flip_operator(3)
    for lab, proj in sectors.items():
        assert np.allclose(proj @ proj, proj, atol=1e-12)
    assert np.allclose(p @ sectors["M+2"] @ p, sectors["M-2"], atol=1e-12)
    assert np.allclose(p @ sectors["M0+"] @ p, sectors["M0+"], atol=1e-12)
    assert np.allclose(p @ sectors["M0-"] @ p, sectors["M0-"], atol=1e-12)


def test_sector_states_are_steady():
    model = spin1_chain(n=3, omega=1.0, j=0.5, delta=0.5, gamma=2.0)
    for label, state in sector_steady_states(3).items():
        assert abs(np.trace(state) - 1) < 1e-12, label
        assert np.linalg.norm(model.apply(state)) < 1e-10, label


def test_sector_structure_n2():
    # 2(N+1) sectors for N=2: dims 1,2,2,1,2,1
    dims = {lab: int(round(np.trace(p).real)) for lab, p in chain_sectors(2)}
    assert dims == {"M+2": 1, "M+1": 2, "M0+": 2, "M0-": 1, "M-1": 2, "M-2": 1}
    model = spin1_chain(n=2, omega=0.7, j=0.4, delta=0.3, gamma=1.5)
    for state in sector_steady_states(2).values():
        assert np.linalg.norm(model.apply(state)) < 1e-10


def test_oscillating_coherence_eigenvalues():
    # decay-free coherence between the M and -M sectors; eigenvalue is
    # 2 i omega M (measured, M-dependent)
    omega = 1.3
    model = spin1_chain(n=3, omega=omega, j=0.5, delta=0.5, gamma=2.0)
    for m_total in (1, 2, 3, -1, -2, -3):
        mode = oscillating_coherence(3, m_total)
        assert abs(np.trace(mode)) < 1e-12
        lam, res = coherence_eigenvalue(model, mode)
        assert res < 1e-10
        assert abs(lam - 2j * omega * m_total) < 1e-10
        assert abs(lam.real) < 1e-12
    # the jumps commute with the mode: dissipator contributes nothing
    mode = oscillating_coherence(3, 1)
    for jump in model.jumps:
        assert np.max(np.abs(jump @ mode - mode @ jump)) < 1e-12


def test_oscillating_coherence_transverse_signal():
    # Tr[(S1x)^2 rho_osc] is nonzero only in the |M| = 1 coherences
    spec = SpinSpec((1.0, 1.0, 1.0))
    _, sp, sm = spin_operators(1.0)
    sx = (sp + sm) / 2
    s1x2 = embed(sx @ sx, 0, spec)
    for m_total in (1, 2, 3):
        val = np.trace(s1x2 @ oscillating_coherence(3, m_total))
        if m_total == 1:
            assert abs(val) > 1e-3
        else:
            assert abs(val) < 1e-12


def test_oscillating_coherence_validation():
    with pytest.raises(ValueError):
        oscillating_coherence(3, 0)
    with pytest.raises(ValueError):
        oscillating_coherence(3, 4)


def test_mixture_offdiagonal_entries():
    # trace-one sector states: entry = c+/8 - c-/6 at each flip-pair position
    positions = chain_offdiagonal_positions(3)
    assert len(positions) == 3
    c_plus, c_minus = 0.75, 0.25
    rho = mixture_state(3, {"M0+": c_plus, "M0-": c_minus})
    expected = c_plus / 8 - c_minus / 6
    offdiag = rho - np.diag(np.diag(rho))
    assert np.count_nonzero(np.abs(offdiag) > 1e-14) == 6
    for i, k in positions:
        assert abs(rho[i, k] - expected) < 1e-14
        assert abs(rho[k, i] - expected) < 1e-14
    # dimension-ratio boundary: entries vanish at c+/c- = 4/3, NOT at c+ = c-
    rho_b = mixture_state(3, {"M0+": 4 / 7, "M0-": 3 / 7})
    assert np.max(np.abs(rho_b - np.diag(np.diag(rho_b)))) < 1e-14
    rho_eq = mixture_state(3, {"M0+": 0.5, "M0-": 0.5})
    i, k = positions[0]
    assert abs(rho_eq[i, k] - (0.5 / 8 - 0.5 / 6)) < 1e-14


def test_mixture_validates_labels():
    with pytest.raises(ValueError):
        mixture_state(3, {"M0+": 0.5, "bogus": 0.5})


# ------------------------------------------------------------- spin-1/2 pair

def test_pair_dark_states_and_energies():
    model = spin_half_pair(j=1.0, delta=1.0, b=0.3, gamma=0.5)
    v_plus, v_minus = pair_dark_states()
    jump = model.jumps[0]
    assert np.linalg.norm(jump @ v_plus) < 1e-14
    assert np.linalg.norm(jump @ v_minus) < 1e-14
    h = model.hamiltonian
    e_plus = (v_plus.conj() @ h @ v_plus).real
    e_minus = (v_minus.conj() @ h @ v_minus).real
    # frozen from the independent oracle: Delta - 2B and -(J + Delta)
    assert abs(e_plus - 0.4) < 1e-12
    assert abs(e_minus - (-2.0)) < 1e-12
    assert np.linalg.norm(h @ v_plus - e_plus * v_plus) < 1e-12
    assert np.linalg.norm(h @ v_minus - e_minus * v_minus) < 1e-12


def test_pair_oscillating_mode_frequency():
    # exact decay-free eigenmode at -i(E+ - E-); 2.4 at these parameters
    model = spin_half_pair(j=1.0, delta=1.0, b=0.3, gamma=0.5)
    mode = pair_oscillating_mode()
    lam, res = coherence_eigenvalue(model, mode)
    assert res < 1e-12
    assert abs(lam - (-2.4j)) < 1e-12
    # parameter dependence: frequency tracks E+ - E- = J + 2 Delta - 2 B
    model2 = spin_half_pair(j=0.7, delta=0.2, b=0.1, gamma=0.9)
    lam2, res2 = coherence_eigenvalue(model2, mode)
    assert res2 < 1e-12
    assert abs(lam2 - (-1j * (0.7 + 2 * 0.2 - 2 * 0.1))) < 1e-12


def test_pair_exchange_symmetry():
    model = spin_half_pair()
    swap = exchange_operator()
    assert np.allclose(swap @ swap, np.eye(4))
    h, jump = model.hamiltonian, model.jumps[0]
    assert np.max(np.abs(swap @ h - h @ swap)) < 1e-12
    assert np.max(np.abs(swap @ jump - jump @ swap)) < 1e-12


def test_pair_zero_modes_and_decay_free_line():
    model = spin_half_pair()
    dec = full_spectrum(model.superoperator())
    vals = dec.eigenvalues
    assert np.sum(np.abs(vals) < 1e-9) == 2
    # the +-2.4i coherences are decay free
    assert np.min(np.abs(vals - 2.4j)) < 1e-9
    assert np.min(np.abs(vals + 2.4j)) < 1e-9
    decay_free = vals[np.abs(vals.real) < 1e-9]
    assert len(decay_free) == 4


def test_pair_decoupled_limit_degeneracy():
    # J = Delta = B = 0: the dark coherences join the kernel (4 zero modes)
    model = spin_half_pair(j=0.0, delta=0.0, b=0.0, gamma=0.5)
    vals = full_spectrum(model.superoperator()).eigenvalues
    assert np.sum(np.abs(vals) < 1e-9) == 4


# ------------------------------------------------------- coupled spin-1 pair

def test_coupled_pair_base_zero_structure():
    model = coupled_spin1_pair(omega=1.0, gamma1_gain=0.5, gamma2_decay=0.5)
    vals = full_spectrum(model.superoperator()).eigenvalues
    assert np.sum(np.abs(vals) < 1e-9) == 6
    # cross coherence |0,0><1,-1| is annihilated exactly
    ket0 = np.array([0, 1, 0], dtype=complex)
    ket1 = np.array([1, 0, 0], dtype=complex)
    ketm1 = np.array([0, 0, 1], dtype=complex)
    mode = np.outer(np.kron(ket0, ket0), np.kron(ket1, ketm1).conj())
    assert np.linalg.norm(model.apply(mode)) < 1e-10


def test_coupled_pair_single_site_modes():
    sz, sp, sm = spin_operators(1.0)
    from spinsync.liouvillian import apply_lindblad
    from math import sqrt

    omega, g = 1.0, 0.5
    gain = sqrt(g / 2) * (sp @ sz)
    decay = sqrt(g / 2) * (sm @ sz)
    ket1 = np.array([1, 0, 0], dtype=complex)
    ket0 = np.array([0, 1, 0], dtype=complex)
    ketm1 = np.array([0, 0, 1], dtype=complex)
    mode1 = np.outer(ket0, ket1.conj())
    out1 = apply_lindblad(omega * sz, [gain], mode1)
    assert np.linalg.norm(out1 - 1j * omega * mode1) < 1e-12
    mode2 = np.outer(ketm1, ket0.conj())
    out2 = apply_lindblad(omega * sz, [decay], mode2)
    assert np.linalg.norm(out2 - 1j * omega * mode2) < 1e-12


def test_coupled_pair_weak_regime_steady_state():
    base = coupled_spin1_pair()
    pert = coupled_pair_perturbation()
    sop = base.superoperator() + pert.superoperator()
    res = steady_state(sop)
    assert res.multiplicity == 1
    ket0 = np.array([0, 1, 0], dtype=complex)
    ket1 = np.array([1, 0, 0], dtype=complex)
    ketm1 = np.array([0, 0, 1], dtype=complex)
    i = int(np.argmax(np.kron(ket0, ket0)))
    k = int(np.argmax(np.kron(ket1, ketm1)))
    assert abs(res.rho[i, k]) > 1e-4


def test_coupled_pair_rate_validation():
    with pytest.raises(ValueError):
        coupled_spin1_pair(gamma1_gain=-1.0)
    with pytest.raises(ValueError):
        coupled_pair_perturbation(gamma2_gain=-0.1)


# --------------------------------------------------------------------- presets

def test_presets_addressable_by_name():
    m1 = build_preset("spin1_chain", n=2, omega=1.0)
    assert m1.dim == 9
    m2 = build_preset("spin_half_pair", gamma=0.2)
    assert m2.dim == 4
    m3 = build_preset("coupled_spin1_pair")
    assert m3.dim == 9
    with pytest.raises(ValueError):
        build_preset("not_a_model")
    with pytest.raises(ValueError):
        build_preset("spin1_chain", bogus_param=1)
