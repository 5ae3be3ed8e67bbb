"""Named spin models: a dephasing-damped spin-1 chain with magnetization
sectors, a collectively damped spin-1/2 pair with a dark subspace, and a
gain/loss coupled spin-1 pair exposed as (base, perturbation).

All builders return LindbladModel instances; presets are addressable by name
through build_preset for the sweep harness and the CLI.
"""

from __future__ import annotations

from math import sqrt

import numpy as np

from .liouvillian import LindbladModel
from .operators import SpinSpec, embed, spin_operators

CHAIN_SECTOR_ORDER_NOTE = (
    "sectors ordered by descending total magnetization, with the M=0 block "
    "split into flip-symmetric (0+) and flip-antisymmetric (0-) parts"
)


def _check_rate(value, name):
    if value < 0:
        raise ValueError(f"{name} must be >= 0, got {value}")
    return float(value)


# ---------------------------------------------------------------- spin-1 chain

def spin1_chain(n=3, omega=1.0, j=0.5, delta=0.5, gamma=2.0):
    """Open-boundary spin-1 chain with squared-S_z dephasing on every site.

    H = omega * sum_k Sz_k
        + sum_{k<n} [ j * (Sp_k Sm_{k+1} + Sm_k Sp_{k+1}) + delta * Sz_k Sz_{k+1} ]
    jumps: L_k = sqrt(gamma) * (Sz_k)^2.
    """
    if n < 2:
        raise ValueError(f"chain needs at least 2 sites, got {n}")
    gamma = _check_rate(gamma, "gamma")
    spec = SpinSpec((1.0,) * n)
    sz, sp, sm = spin_operators(1.0)
    ham = sum(omega * embed(sz, k, spec) for k in range(n))
    for k in range(n - 1):
        ham = ham + j * (
            embed(sp, k, spec) @ embed(sm, k + 1, spec)
            + embed(sm, k, spec) @ embed(sp, k + 1, spec)
        )
        ham = ham + delta * embed(sz, k, spec) @ embed(sz, k + 1, spec)
    jumps = [sqrt(gamma) * embed(sz @ sz, k, spec) for k in range(n)]
    return LindbladModel(ham, jumps, label=f"spin1_chain(n={n})", spins=spec.spins)


def magnetization_operator(n):
    spec = SpinSpec((1.0,) * n)
    sz = spin_operators(1.0)[0]
    return sum(embed(sz, k, spec) for k in range(n))


def flip_operator(n):
    """Per-site magnetization reversal |m> -> |-m| on a spin-1 chain."""
    p1 = np.zeros((3, 3), dtype=complex)
    p1[0, 2] = p1[1, 1] = p1[2, 0] = 1.0
    out = np.array([[1.0 + 0j]])
    for _ in range(n):
        out = np.kron(out, p1)
    return out


def chain_sectors(n):
    """Ordered (label, projector) pairs for the strong-symmetry sectors.

    Labels: 'M+3' ... 'M+1', 'M0+', 'M0-', 'M-1' ... 'M-3' (for n=3).  The
    M=0 block splits under the flip operator; the only self-flipped basis
    string is all-zeros, so dim(0+) = #pairs + 1 and dim(0-) = #pairs.
    """
    spec = SpinSpec((1.0,) * n)
    strings = spec.basis_strings()
    index = {s: i for i, s in enumerate(strings)}
    dim = spec.dim
    sectors = []
    for m_total in range(n, 0, -1):
        sel = [i for i, s in enumerate(strings) if sum(s) == m_total]
        proj = np.zeros((dim, dim), dtype=complex)
        for i in sel:
            proj[i, i] = 1.0
        sectors.append((f"M+{m_total}", proj))

    plus = np.zeros((dim, dim), dtype=complex)
    minus = np.zeros((dim, dim), dtype=complex)
    seen = set()
    for s in strings:
        if sum(s) != 0 or s in seen:
            continue
        f = tuple(-m for m in s)
        if f == s:
            plus[index[s], index[s]] = 1.0
            seen.add(s)
        else:
            i, k = index[s], index[f]
            # (|s> + |f>)/sqrt2 and (|s> - |f>)/sqrt2 rank-one projectors
            plus[i, i] += 0.5
            plus[k, k] += 0.5
            plus[i, k] += 0.5
            plus[k, i] += 0.5
            minus[i, i] += 0.5
            minus[k, k] += 0.5
            minus[i, k] -= 0.5
            minus[k, i] -= 0.5
            seen.update((s, f))
    sectors.append(("M0+", plus))
    sectors.append(("M0-", minus))

    for m_total in range(-1, -n - 1, -1):
        sel = [i for i, s in enumerate(strings) if sum(s) == m_total]
        proj = np.zeros((dim, dim), dtype=complex)
        for i in sel:
            proj[i, i] = 1.0
        sectors.append((f"M{m_total}", proj))
    return sectors


def sector_steady_states(n):
    """Trace-one maximally mixed state of every sector: label -> Pi/dim."""
    return {
        label: proj / np.trace(proj).real for label, proj in chain_sectors(n)
    }


def mixture_state(n, weights):
    """Sum of weighted trace-one sector states.  Weights are used literally;
    pass a convex combination to get a density operator."""
    states = sector_steady_states(n)
    unknown = set(weights) - set(states)
    if unknown:
        raise ValueError(f"unknown sector labels: {sorted(unknown)}")
    dim = next(iter(states.values())).shape[0]
    out = np.zeros((dim, dim), dtype=complex)
    for label, c in weights.items():
        out += c * states[label]
    return out


def oscillating_coherence(n, m_total):
    """Flip-displaced sector state P * 1_M, the decay-free coherence between
    the M and -M sectors.  Traceless; its eigenvalue under the chain generator
    is measured numerically (see coherence_eigenvalue), not assumed."""
    if m_total == 0 or abs(m_total) > n:
        raise ValueError(f"need 0 < |M| <= {n}, got {m_total}")
    states = sector_steady_states(n)
    label = f"M+{m_total}" if m_total > 0 else f"M{m_total}"
    return flip_operator(n) @ states[label]


def coherence_eigenvalue(model, mode):
    """Rayleigh ratio <mode, L[mode]> / <mode, mode> plus the residual norm."""
    img = model.apply(mode)
    lam = np.vdot(mode, img) / np.vdot(mode, mode)
    res = float(np.linalg.norm(img - lam * mode))
    return complex(lam), res


def chain_offdiagonal_positions(n=3):
    """Index pairs (i, k), i < k, where a mixture of the two M=0 sector states
    has off-diagonal support: each flip pair of M=0 basis strings contributes
    one position (plus its transpose).  For n=3 these are the three pairs
    (1,-1,0)/(-1,1,0), (0,1,-1)/(0,-1,1), (-1,0,1)/(1,0,-1)."""
    spec = SpinSpec((1.0,) * n)
    strings = spec.basis_strings()
    index = {s: i for i, s in enumerate(strings)}
    out = []
    for s in strings:
        if sum(s) != 0:
            continue
        f = tuple(-m for m in s)
        if f == s:
            continue
        i, k = index[s], index[f]
        if i < k:
            out.append((i, k))
    return out


# ------------------------------------------------------------- spin-1/2 pair

def spin_half_pair(j=1.0, delta=1.0, b=0.3, gamma=0.5):
    """Exchange-coupled spin-1/2 pair with a collective lowering jump.

    H = j (s1+ s2- + s1- s2+) + delta s1z s2z + b (s1z + s2z) with full Pauli
    matrices (s z eigenvalues +-1); jump L = gamma (s1- + s2-).  Note the
    rate enters the jump linearly here.
    """
    gamma = _check_rate(gamma, "gamma")
    spec = SpinSpec((0.5, 0.5))
    sz_h, sp_h, sm_h = spin_operators(0.5)
    pz = 2 * sz_h                      # Pauli z
    ham = (
        j * (embed(sp_h, 0, spec) @ embed(sm_h, 1, spec)
             + embed(sm_h, 0, spec) @ embed(sp_h, 1, spec))
        + delta * embed(pz, 0, spec) @ embed(pz, 1, spec)
        + b * (embed(pz, 0, spec) + embed(pz, 1, spec))
    )
    jump = gamma * (embed(sm_h, 0, spec) + embed(sm_h, 1, spec))
    return LindbladModel(ham, [jump], label="spin_half_pair", spins=spec.spins)


def pair_dark_states():
    """(v_plus, v_minus): both annihilated by the collective lowering jump.
    v_plus = |down,down>, v_minus = (|up,down> - |down,up>)/sqrt2."""
    v_plus = np.zeros(4, dtype=complex)
    v_plus[3] = 1.0
    v_minus = np.zeros(4, dtype=complex)
    v_minus[1] = 1 / sqrt(2)
    v_minus[2] = -1 / sqrt(2)
    return v_plus, v_minus


def pair_oscillating_mode():
    """|v+><v-|, the decay-free coherence between the two dark states."""
    v_plus, v_minus = pair_dark_states()
    return np.outer(v_plus, v_minus.conj())


def exchange_operator():
    """Site swap; commutes with the pair Hamiltonian and the collective jump."""
    swap = np.zeros((4, 4), dtype=complex)
    swap[0, 0] = swap[3, 3] = swap[1, 2] = swap[2, 1] = 1.0
    return swap


# ------------------------------------------------------- coupled spin-1 pair

def coupled_spin1_pair(omega=1.0, gamma1_gain=0.5, gamma2_decay=0.5):
    """Base model: two spin-1 sites, site 1 pumped (S+ Sz), site 2 damped
    (S- Sz), no coupling.  Each site keeps two dark levels, so the base
    generator has a six-dimensional zero subspace including the cross
    coherence |0,0><1,-1|."""
    g1 = _check_rate(gamma1_gain, "gamma1_gain")
    g2 = _check_rate(gamma2_decay, "gamma2_decay")
    spec = SpinSpec((1.0, 1.0))
    sz, sp, sm = spin_operators(1.0)
    ham = omega * (embed(sz, 0, spec) + embed(sz, 1, spec))
    jumps = [
        sqrt(g1 / 2) * embed(sp @ sz, 0, spec),
        sqrt(g2 / 2) * embed(sm @ sz, 1, spec),
    ]
    return LindbladModel(ham, jumps, label="coupled_spin1_pair", spins=spec.spins)


def coupled_pair_perturbation(
    epsilon=0.02, delta1=0.013, delta2=-0.017, gamma1_decay=0.01, gamma2_gain=0.012
):
    """Weak-regime perturbation for the coupled pair: excitation-conserving
    coherent hopping, site detunings, and the two reversed jump channels.
    Returned as its own LindbladModel; its superoperator adds to the base."""
    g1 = _check_rate(gamma1_decay, "gamma1_decay")
    g2 = _check_rate(gamma2_gain, "gamma2_gain")
    spec = SpinSpec((1.0, 1.0))
    sz, sp, sm = spin_operators(1.0)
    ham = (1j * epsilon / 2) * (
        embed(sp, 0, spec) @ embed(sm, 1, spec)
        - embed(sm, 0, spec) @ embed(sp, 1, spec)
    )
    ham = ham + delta1 * embed(sz, 0, spec) + delta2 * embed(sz, 1, spec)
    jumps = [
        sqrt(g1 / 2) * embed(sm @ sz, 0, spec),
        sqrt(g2 / 2) * embed(sp @ sz, 1, spec),
    ]
    return LindbladModel(
        ham, jumps, label="coupled_pair_perturbation", spins=spec.spins
    )


# --------------------------------------------------------------------- presets

PRESETS = {
    "spin1_chain": spin1_chain,
    "spin_half_pair": spin_half_pair,
    "coupled_spin1_pair": coupled_spin1_pair,
}


def build_preset(name, **params):
    """Build a named model; unknown names or parameters raise ValueError."""
    if name not in PRESETS:
        raise ValueError(
            f"unknown model preset {name!r}; available: {sorted(PRESETS)}"
        )
    builder = PRESETS[name]
    try:
        return builder(**params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for preset {name!r}: {exc}") from exc
