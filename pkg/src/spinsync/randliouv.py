"""Seeded random Liouvillian perturbations: GUE Hamiltonian part plus a
Wishart-sampled Kossakowski dissipator over a trace-orthonormal matrix basis.

Draw order is part of the determinism contract: for one generator draw, the
rng is consumed as (1) GUE real part, (2) GUE imaginary part, (3) Wishart
factor real part, (4) Wishart factor imaginary part, each a dense
standard-normal block.
"""

from __future__ import annotations

import hashlib
import json
from math import sqrt

import numpy as np
from scipy.linalg import expm

from .operators import vectorize


def matrix_basis(dim):
    """Trace-orthonormal traceless basis as an array of shape (d, D, D).

    Index layout n = (a-1)*D + b (1-based): off-diagonal slots a != b hold the
    matrix units E_ab; the a == b slots (a < D) hold orthonormalized diagonal
    combinations diag(1, ..., 1, -a, 0, ..., 0)/sqrt(a(a+1)).  Total D^2 - 1.
    """
    if dim < 2:
        raise ValueError(f"need dimension >= 2, got {dim}")
    out = []
    for a in range(1, dim + 1):
        for b in range(1, dim + 1):
            if a != b:
                mat = np.zeros((dim, dim), dtype=complex)
                mat[a - 1, b - 1] = 1.0
                out.append(mat)
            elif a < dim:
                g = np.zeros(dim)
                g[:a] = 1.0
                g[a] = -a
                out.append(np.diag(g / sqrt(a * (a + 1))).astype(complex))
    return np.array(out)


def gue_hamiltonian(dim, rng):
    """H = (M + M^+)/sqrt(2) with i.i.d. standard complex normal M: diagonal
    variance 2, off-diagonal real/imaginary variances 1."""
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (m + m.conj().T) / sqrt(2)


def wishart_kossakowski(dim, rng, factor=None):
    """K = d G G^+ / Tr[G G^+] with complex Gaussian G (injectable for tests).

    Positive semidefinite with trace d = D^2 - 1 by construction.
    """
    d = dim * dim - 1
    if factor is None:
        factor = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    elif factor.shape != (d, d):
        raise ValueError(f"factor must have shape {(d, d)}, got {factor.shape}")
    k = factor @ factor.conj().T
    return d * k / np.trace(k).real


def coherent_superoperator(hamiltonian):
    """Matrix of rho -> -i[H, rho] under column stacking."""
    dim = hamiltonian.shape[0]
    eye = np.eye(dim)
    return -1j * (np.kron(eye, hamiltonian) - np.kron(hamiltonian.T, eye))


def dissipator_superoperator(kossakowski, basis):
    """Matrix of rho -> sum_mn K_mn (F_n rho F_m^+ - 1/2 {F_m^+ F_n, rho}).

    Assembled through W = Phi^H K Phi with Phi the (d, D^2) matrix of
    flattened basis elements, avoiding the double sum over Kronecker
    products; verified against the term-by-term reference in the tests.
    """
    d, dim, _ = basis.shape
    if kossakowski.shape != (d, d):
        raise ValueError(
            f"Kossakowski matrix shape {kossakowski.shape} does not match "
            f"basis size {d}"
        )
    phi = basis.reshape(d, dim * dim)
    w = phi.conj().T @ kossakowski @ phi
    w4 = w.reshape(dim, dim, dim, dim)
    sandwich = w4.transpose(0, 2, 1, 3).reshape(dim * dim, dim * dim)
    gamma = np.einsum("acae->ce", w4)
    eye = np.eye(dim)
    return sandwich - 0.5 * (np.kron(eye, gamma) + np.kron(gamma.T, eye))


def dissipator_reference(kossakowski, basis):
    """Slow term-by-term construction; the equivalence oracle for the fast
    route and for the jump-operator form."""
    d, dim, _ = basis.shape
    out = np.zeros((dim * dim, dim * dim), dtype=complex)
    eye = np.eye(dim)
    for m in range(d):
        for n in range(d):
            k = kossakowski[m, n]
            if k == 0:
                continue
            f_m, f_n = basis[m], basis[n]
            fdf = f_m.conj().T @ f_n
            out += k * (
                np.kron(f_m.conj(), f_n)
                - 0.5 * np.kron(eye, fdf)
                - 0.5 * np.kron(fdf.T, eye)
            )
    return out


def jump_operators(kossakowski, basis):
    """Diagonalize K = U diag(kappa) U^+ and return L_mu = sqrt(kappa_mu)
    sum_nu conj(U[nu, mu]) F_nu; the resulting standard-form dissipator
    equals the Kossakowski-form one."""
    kappa, u = np.linalg.eigh(kossakowski)
    d, dim, _ = basis.shape
    out = []
    for mu in range(d):
        rate = max(kappa[mu], 0.0)
        op = np.tensordot(u[:, mu].conj(), basis, axes=(0, 0))
        out.append(sqrt(rate) * op)
    return out


def random_liouvillian(dim, rng, zeta_coherent=1.0, zeta_dissipative=1.0):
    """One seeded perturbation draw: zeta_coh * (-i[H, .]) + zeta_diss * diss.

    Trace preserving by construction; completely positive after short-time
    exponentiation (see choi_minimum_eigenvalue).
    """
    ham = gue_hamiltonian(dim, rng)
    kossakowski = wishart_kossakowski(dim, rng)
    basis = matrix_basis(dim)
    return zeta_coherent * coherent_superoperator(ham) \
        + zeta_dissipative * dissipator_superoperator(kossakowski, basis)


def choi_minimum_eigenvalue(superop, eps=1e-3):
    """Minimum eigenvalue of the Choi matrix of exp(eps * L); >= -1e-8 for a
    completely positive short-time propagator."""
    n = superop.shape[0]
    dim = int(round(sqrt(n)))
    prop = expm(eps * superop)
    choi = np.zeros((n, n), dtype=complex)
    for a in range(dim):
        for b in range(dim):
            img = prop[:, b * dim + a].reshape(dim, dim, order="F")
            choi[a * dim: (a + 1) * dim, b * dim: (b + 1) * dim] = img
    choi = (choi + choi.conj().T) / 2
    return float(np.linalg.eigvalsh(choi)[0])


def perturbation_manifest(seed, dim, zeta_coherent, zeta_dissipative, superop):
    """Reproducibility record for one draw: seed, size, strengths, and a
    sha256 checksum of the superoperator bytes (C-order complex128)."""
    arr = np.ascontiguousarray(superop, dtype=complex)
    return {
        "seed": seed,
        "dim": dim,
        "zeta_coherent": zeta_coherent,
        "zeta_dissipative": zeta_dissipative,
        "checksum": hashlib.sha256(arr.tobytes()).hexdigest(),
    }


def write_manifest(manifest, path):
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def trace_preservation_defect(superop):
    dim = int(round(sqrt(superop.shape[0])))
    return float(np.linalg.norm(vectorize(np.eye(dim)).conj() @ superop))
