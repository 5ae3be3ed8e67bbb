"""Spin operators, tensor embedding, and operator vectorization.

Conventions used everywhere downstream:

* A site with spin S has dimension 2S+1 and basis ordered by descending
  magnetization m = S, S-1, ..., -S.
* Multi-site bases are Kronecker products with site 1 slowest, i.e. the
  composite index of (m_1, ..., m_N) is built left to right with np.kron.
* vec(X) stacks columns (Fortran order): vec(X)[c*D + r] = X[r, c], so
  vec(A X B) = (B^T kron A) vec(X).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

HALF_INT_TOL = 1e-12


def _check_spin(s):
    if s <= 0 or abs(2 * s - round(2 * s)) > HALF_INT_TOL:
        raise ValueError(f"spin must be a positive half-integer, got {s!r}")
    return float(s)


@dataclass(frozen=True)
class SpinSpec:
    """Spin content of a chain: one spin value per site, site 1 first."""

    spins: tuple

    def __post_init__(self):
        if len(self.spins) < 1:
            raise ValueError("need at least one site")
        object.__setattr__(self, "spins", tuple(_check_spin(s) for s in self.spins))

    @property
    def n_sites(self):
        return len(self.spins)

    @property
    def site_dims(self):
        return tuple(int(round(2 * s + 1)) for s in self.spins)

    @property
    def dim(self):
        out = 1
        for d in self.site_dims:
            out *= d
        return out

    def magnetizations(self, site):
        """Descending m values for one site (0-based index)."""
        s = self.spins[site]
        return tuple(s - k for k in range(self.site_dims[site]))

    def basis_strings(self):
        """All (m_1, ..., m_N) tuples in composite-index order."""
        out = [()]
        for j in range(self.n_sites):
            ms = self.magnetizations(j)
            out = [prefix + (m,) for prefix in out for m in ms]
        return out


def spin_operators(s):
    """Return (Sz, Sp, Sm) for spin s in the descending-m basis.

    Sz is diagonal with entries s..-s; Sp raises m with the standard
    ladder coefficients sqrt(s(s+1) - m(m+1)); Sm = Sp^dagger.
    """
    s = _check_spin(s)
    dim = int(round(2 * s + 1))
    m = s - np.arange(dim)
    sz = np.diag(m).astype(complex)
    sp = np.zeros((dim, dim), dtype=complex)
    for k in range(1, dim):
        sp[k - 1, k] = sqrt(s * (s + 1) - m[k] * (m[k] + 1))
    return sz, sp, sp.conj().T


def embed(op, site, spec):
    """Embed a single-site operator at `site` (0-based) into the full space."""
    if not isinstance(spec, SpinSpec):
        spec = SpinSpec(tuple(spec))
    dims = spec.site_dims
    if not 0 <= site < spec.n_sites:
        raise ValueError(f"site {site} out of range for {spec.n_sites} sites")
    if op.shape != (dims[site], dims[site]):
        raise ValueError(
            f"operator shape {op.shape} does not match site dimension {dims[site]}"
        )
    out = np.array([[1.0 + 0j]])
    for j, d in enumerate(dims):
        out = np.kron(out, op if j == site else np.eye(d))
    return out


def vectorize(x):
    """Column-stack a D x D operator into a length D^2 vector."""
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {x.shape}")
    return x.flatten(order="F")


def devectorize(v):
    """Inverse of `vectorize`; requires a perfect-square length."""
    v = np.asarray(v)
    if v.ndim != 1:
        raise ValueError(f"expected a vector, got shape {v.shape}")
    d = int(round(sqrt(v.size)))
    if d * d != v.size:
        raise ValueError(f"length {v.size} is not a perfect square")
    return v.reshape(d, d, order="F")


def left_multiplier(a):
    """Superoperator matrix of X -> A X under column-stacking."""
    d = a.shape[0]
    return np.kron(np.eye(d), a)


def right_multiplier(b):
    """Superoperator matrix of X -> X B under column-stacking."""
    d = b.shape[0]
    return np.kron(b.T, np.eye(d))
