"""Azimuthal phase distributions of multi-spin states.

The phase density S(phi_1, ..., phi_N) of an N-site state is its overlap
with a product of fully polarized spin coherent states, integrated over the
polar angles. The polar integral factorizes into a per-site kernel, so S is
a finite trigonometric polynomial in the azimuthal phases. This module
builds that polynomial exactly from a density matrix, reduces it over the
global phase, evaluates it on grids, and locates and samples its maxima.

Normalization: S integrates to Tr rho over the N-torus, so a trace-one
state with no azimuthal structure sits at the uniform level (2 pi)^-N.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from math import comb, exp, lgamma, pi

import numpy as np

from .operators import SpinSpec

DEFAULT_GRID_N = 256
# grid values within this absolute band of the maximum are argmax candidates
ARGMAX_BAND = 1e-9
# candidate counts beyond this (or beyond an eighth of the grid) mean a
# flat plateau, not isolated maxima
DEGENERATE_CANDIDATES = 256
DEFAULT_THRESHOLD = 0.95


def _spec(spins):
    return spins if isinstance(spins, SpinSpec) else SpinSpec(tuple(spins))


def stretched_amplitude(s, theta):
    """Components <m| of the rotated maximal-weight state, descending m.

    Entry for magnetization m is
    sqrt(binom(2s, s-m)) cos(theta/2)^(s+m) sin(theta/2)^(s-m).
    """
    spec = _spec((s,))
    s = spec.spins[0]
    two_s = int(round(2 * s))
    m = np.array(spec.magnetizations(0))
    binoms = np.array([comb(two_s, int(round(s - mm))) for mm in m])
    half = theta / 2
    return np.sqrt(binoms) * np.cos(half) ** (s + m) * np.sin(half) ** (s - m)


def theta_kernel(s):
    """Polar-integral kernel C[a, b] = int_0^pi sin(t) d_a(t) d_b(t) dt.

    Closed form via the beta function:
    C = 2 sqrt(binom(2s, s-m) binom(2s, s-m')) B(s - mu + 1, s + mu + 1)
    with mu = (m + m')/2. Diagonal entries are 2/(2s+1).
    """
    spec = _spec((s,))
    s = spec.spins[0]
    two_s = int(round(2 * s))
    m = np.array(spec.magnetizations(0))
    dim = two_s + 1
    log_norm = lgamma(two_s + 2)  # Gamma(2s + 2) in B's denominator
    out = np.empty((dim, dim))
    for a in range(dim):
        for b in range(dim):
            mu = (m[a] + m[b]) / 2
            log_binoms = 0.5 * (
                2 * lgamma(two_s + 1)
                - lgamma(s - m[a] + 1) - lgamma(s + m[a] + 1)
                - lgamma(s - m[b] + 1) - lgamma(s + m[b] + 1)
            )
            log_beta = lgamma(s - mu + 1) + lgamma(s + mu + 1) - log_norm
            out[a, b] = 2.0 * exp(log_binoms + log_beta)
    return out


def coherent_state(spins, thetas, phis):
    """Product coherent state; site amplitudes are e^(-i m phi) d_m(theta)."""
    spec = _spec(spins)
    if len(thetas) != spec.n_sites or len(phis) != spec.n_sites:
        raise ValueError("need one (theta, phi) pair per site")
    out = np.array([1.0 + 0j])
    for j in range(spec.n_sites):
        m = np.array(spec.magnetizations(j))
        amp = stretched_amplitude(spec.spins[j], thetas[j])
        out = np.kron(out, amp * np.exp(-1j * m * phis[j]))
    return out


def _uniform_norm(spec):
    out = 1.0
    for d in spec.site_dims:
        out *= d / (4 * pi)
    return out


def phase_density_quadrature(rho, spins, phis, n_nodes=32):
    """Slow reference for the phase density at one azimuthal point.

    Sums the coherent-state overlap over a Gauss-Legendre polar grid, one
    node set per site, with no use of the factorized kernel. Used to
    validate the polynomial route; exponentially accurate in n_nodes for
    these band-limited integrands.
    """
    spec = _spec(spins)
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (spec.dim, spec.dim):
        raise ValueError(f"state shape {rho.shape} does not match spins {spec.spins}")
    if len(phis) != spec.n_sites:
        raise ValueError("need one phi per site")
    nodes, weights = np.polynomial.legendre.leggauss(n_nodes)
    thetas = (nodes + 1) * (pi / 2)
    w_theta = weights * (pi / 2) * np.sin(thetas)

    vecs = np.array([[1.0 + 0j]])
    w = np.array([1.0])
    for j in range(spec.n_sites):
        m = np.array(spec.magnetizations(j))
        amp = np.array([stretched_amplitude(spec.spins[j], t) for t in thetas])
        amp = amp * np.exp(-1j * m * phis[j])[None, :]
        vecs = (vecs[:, None, :, None] * amp[None, :, None, :]).reshape(
            vecs.shape[0] * n_nodes, vecs.shape[1] * amp.shape[1]
        )
        w = (w[:, None] * w_theta[None, :]).ravel()
    overlaps = np.einsum("ni,ij,nj->n", vecs.conj(), rho, vecs).real
    return _uniform_norm(spec) * float(w @ overlaps)


@dataclass(frozen=True)
class PhasePolynomial:
    """Trigonometric polynomial sum_k c_k exp(i k . phi) on the n-torus."""

    n_axes: int
    coefficients: dict

    def __post_init__(self):
        for k in self.coefficients:
            if len(k) != self.n_axes:
                raise ValueError(f"key {k} does not have {self.n_axes} entries")

    @property
    def constant_term(self):
        return self.coefficients.get((0,) * self.n_axes, 0j)

    def hermiticity_defect(self):
        """Max deviation from c_{-k} = conj(c_k); zero for real densities."""
        worst = 0.0
        for k, c in self.coefficients.items():
            mirror = self.coefficients.get(tuple(-x for x in k), 0j)
            worst = max(worst, abs(mirror - np.conj(c)))
        return worst

    def _arrays(self):
        keys = sorted(self.coefficients)
        k = np.array(keys, dtype=int).reshape(len(keys), self.n_axes)
        c = np.array([self.coefficients[key] for key in keys], dtype=complex)
        return k, c

    def evaluate(self, phis):
        """Real value at one point (n_axes,) or a batch (..., n_axes)."""
        phis = np.asarray(phis, dtype=float)
        single = phis.ndim == 1
        pts = np.atleast_2d(phis)
        if pts.shape[-1] != self.n_axes:
            raise ValueError(f"points must have {self.n_axes} phase entries")
        if not self.coefficients:
            vals = np.zeros(pts.shape[0])
        else:
            k, c = self._arrays()
            vals = (np.exp(1j * pts @ k.T) @ c).real
        return float(vals[0]) if single else vals

    def max_degree(self):
        if not self.coefficients:
            return 0
        return max(abs(x) for k in self.coefficients for x in k)

    def grid(self, n=DEFAULT_GRID_N):
        """Values on the uniform grid phi_t = 2 pi t / n, exact via FFT."""
        if n <= 2 * self.max_degree():
            raise ValueError(
                f"grid of {n} points per axis aliases degree {self.max_degree()}"
            )
        spec_arr = np.zeros((n,) * self.n_axes, dtype=complex)
        for k, c in self.coefficients.items():
            spec_arr[tuple(x % n for x in k)] += c
        return (np.fft.ifftn(spec_arr) * n**self.n_axes).real

    def reduce_over_global_phase(self):
        """Integrate out a common shift; axes become phases relative to site N.

        Keeps only terms with sum(k) = 0, scaled by 2 pi, keyed by k[:-1].
        A reduced density integrates to Tr rho over the (N-1)-torus.
        """
        if self.n_axes < 2:
            raise ValueError("need at least two axes to form relative phases")
        out = {}
        for k, c in self.coefficients.items():
            if sum(k) != 0:
                continue
            key = k[:-1]
            out[key] = out.get(key, 0j) + 2 * pi * c
        return PhasePolynomial(n_axes=self.n_axes - 1, coefficients=out)


def phase_distribution(rho, spins):
    """Exact phase density polynomial of `rho`; integrates to Tr rho."""
    spec = _spec(spins)
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (spec.dim, spec.dim):
        raise ValueError(f"state shape {rho.shape} does not match spins {spec.spins}")
    weight = np.array([[1.0]])
    for j in range(spec.n_sites):
        weight = np.kron(weight, theta_kernel(spec.spins[j]))
    scaled = _uniform_norm(spec) * rho * weight
    strings = spec.basis_strings()
    coeffs = {}
    for a in range(spec.dim):
        ma = strings[a]
        for b in range(spec.dim):
            v = scaled[a, b]
            if v == 0:
                continue
            k = tuple(int(round(x - y)) for x, y in zip(ma, strings[b]))
            coeffs[k] = coeffs.get(k, 0j) + v
    return PhasePolynomial(n_axes=spec.n_sites, coefficients=coeffs)


def _torus_gap(p, q):
    d = np.abs(np.asarray(p) - np.asarray(q)) % (2 * pi)
    return float(np.max(np.minimum(d, 2 * pi - d)))


def _refine_maximum(k, c, point, max_iter=30):
    """Newton iteration on the trig polynomial from a near-maximal grid point."""
    x = np.array(point, dtype=float)
    for _ in range(max_iter):
        e = c * np.exp(1j * (k @ x))
        grad = (1j * e) @ k
        grad = grad.real
        if np.linalg.norm(grad) < 1e-14:
            break
        hess = -(k * e.real[:, None]).T @ k
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            break
        if np.linalg.norm(step) > 0.5:
            break  # do not leave the basin of the starting cell
        x = x - step
        if np.linalg.norm(step) < 1e-13:
            break
    x = x % (2 * pi)
    return np.where(2 * pi - x < 1e-9, 0.0, x)


@dataclass(frozen=True)
class SyncMeasure:
    """Peak height of a reduced phase density relative to the uniform level.

    `argmax` lists the distinct maximizing points, one row per point,
    sorted lexicographically. `degenerate` marks flat plateaus, for which
    no isolated maxima exist and `argmax` is empty.
    """

    s_max: float
    baseline: float
    argmax: np.ndarray
    degenerate: bool
    grid_n: int

    @property
    def multiplicity(self):
        return len(self.argmax)


def sync_measure(poly, grid_n=DEFAULT_GRID_N, refine=True):
    """Locate the maxima of a reduced phase density polynomial.

    Scans an exact FFT grid, keeps points within ARGMAX_BAND of the top,
    polishes each with Newton steps, and deduplicates on the torus.
    """
    vals = poly.grid(grid_n)
    top = float(vals.max())
    baseline = (2 * pi) ** (-poly.n_axes)
    cand = np.argwhere(vals >= top - ARGMAX_BAND)
    flat_cap = min(DEGENERATE_CANDIDATES, max(8, vals.size // 8))
    if len(cand) > flat_cap:
        return SyncMeasure(
            s_max=top - baseline,
            baseline=baseline,
            argmax=np.empty((0, poly.n_axes)),
            degenerate=True,
            grid_n=grid_n,
        )
    pts = cand * (2 * pi / grid_n)
    if refine:
        k, c = poly._arrays()
        pts = [_refine_maximum(k, c, p) for p in pts]
    kept = []
    for p in pts:
        if all(_torus_gap(p, q) > 1e-6 for q in kept):
            kept.append(np.asarray(p, dtype=float))
    kept.sort(key=lambda p: tuple(np.round(p, 9)))
    argmax = np.array(kept).reshape(len(kept), poly.n_axes)
    value = max(poly.evaluate(p) for p in kept) if kept else top
    return SyncMeasure(
        s_max=value - baseline,
        baseline=baseline,
        argmax=argmax,
        degenerate=False,
        grid_n=grid_n,
    )


def locking_region(grid_values, threshold=DEFAULT_THRESHOLD):
    """Cells around every qualifying local maximum of a torus grid.

    The cut is relative to the dynamic range, not the absolute level: these
    densities ride on a uniform baseline that can dwarf the modulation, and
    an absolute cut would then keep the whole torus.

    Peaks are cells at least as high as all their torus neighbors and above
    half the value range (keeping background ripple out).  Each peak keeps
    the nearest cells within (1 - threshold) of the range below its own
    height, so a family of near-degenerate maxima stays fully represented
    even when tie-breaking perturbations order their heights; a single cut
    at threshold * max would silently drop the lower family members.  A
    peak's total weight is its excess above the grid minimum, split over
    its cells by their excess.  A flat grid (zero range) keeps every cell,
    uniformly.

    Returns (indices, weights) with weights normalized to sum to one.
    """
    grid_values = np.asarray(grid_values, dtype=float)
    if not 0 < threshold <= 1:
        raise ValueError("threshold must lie in (0, 1]")
    top = float(grid_values.max())
    lo = float(grid_values.min())
    if top <= 0:
        raise ValueError("grid has no positive values to threshold")
    span = top - lo
    if span <= 0:
        idx = np.argwhere(np.ones_like(grid_values, dtype=bool))
        return idx, np.full(len(idx), 1.0 / len(idx))

    is_peak = np.ones(grid_values.shape, dtype=bool)
    for shift in product((-1, 0, 1), repeat=grid_values.ndim):
        if all(s == 0 for s in shift):
            continue
        is_peak &= grid_values >= np.roll(
            grid_values, shift, axis=tuple(range(grid_values.ndim))
        )
    is_peak &= grid_values >= lo + 0.5 * span
    peak_idx = np.argwhere(is_peak)
    peak_val = grid_values[tuple(peak_idx.T)]

    n = grid_values.shape[0]
    cells = np.argwhere(grid_values >= peak_val.min() - (1 - threshold) * span)
    delta = np.abs(cells[:, None, :] - peak_idx[None, :, :])
    delta = np.minimum(delta, n - delta)
    nearest = np.argmin((delta**2).sum(axis=2), axis=1)
    keep = grid_values[tuple(cells.T)] >= peak_val[nearest] - (1 - threshold) * span
    cells = cells[keep]
    nearest = nearest[keep]

    excess = grid_values[tuple(cells.T)] - lo
    w = np.zeros(len(cells))
    for k in range(len(peak_idx)):
        mask = nearest == k
        w[mask] = (peak_val[k] - lo) * excess[mask] / excess[mask].sum()
    return cells, w / w.sum()


def sample_phases(grid_values, n_samples, rng, threshold=DEFAULT_THRESHOLD):
    """Draw phase tuples from the locking region of a grid.

    Cells come from `locking_region` (per-peak cut at `threshold` of the
    value range) and are chosen with the region's weights; a uniform jitter
    inside the cell avoids lattice artifacts. Deterministic given the rng
    state.
    """
    grid_values = np.asarray(grid_values)
    sizes = set(grid_values.shape)
    if len(sizes) != 1:
        raise ValueError("expected an equal number of points per axis")
    n = grid_values.shape[0]
    idx, w = locking_region(grid_values, threshold)
    choice = rng.choice(len(w), size=n_samples, p=w)
    jitter = rng.random((n_samples, grid_values.ndim))
    return (idx[choice] + jitter) * (2 * pi / n)


def fit_three_cosine(poly):
    """Fit offset + B [cos 2p1 + cos 2p2 + cos 2(p1 - p2)] to a 2-axis density.

    Returns (offset, prefactor, rel_residual). The form is exact for
    mixtures of the two zero-magnetization invariant states of the spin-1
    chain, so the relative residual doubles as a structure check.
    """
    if poly.n_axes != 2:
        raise ValueError("three-cosine form applies to two relative phases")
    pairs = [(2, 0), (0, 2), (2, -2)]
    keys = pairs + [(-a, -b) for a, b in pairs]
    six = np.array([poly.coefficients.get(k, 0j) for k in keys])
    prefactor = 2 * float(six.real.mean())
    num = 0.0
    den = 0.0
    zero = (0, 0)
    for k, c in poly.coefficients.items():
        if k == zero:
            continue
        model = prefactor / 2 if k in keys else 0.0
        num += abs(c - model) ** 2
        den += abs(c) ** 2
    for k in keys:
        if k not in poly.coefficients:
            num += abs(prefactor / 2) ** 2
    offset = float(poly.constant_term.real)
    rel = (num / den) ** 0.5 if den > 0 else 0.0
    return offset, prefactor, rel


def export_sd_csv(grid_values, path, normalization="integral-one"):
    """Write a reduced phase-density grid as CSV.

    One row per grid cell, columns phi1p[, phi2p, ...], value. A leading
    comment line records the grid size and normalization so consumers do
    not have to guess the convention.
    """
    grid_values = np.asarray(grid_values)
    n = grid_values.shape[0]
    axes = grid_values.ndim
    cols = [f"phi{j + 1}p" for j in range(axes)] + ["value"]
    step = 2 * pi / n
    with open(path, "w") as fh:
        fh.write(
            f"# reduced phase density, {n} points per axis, {axes} axes, "
            f"phi in [0, 2pi), normalization={normalization}\n"
        )
        fh.write(",".join(cols) + "\n")
        for idx in np.ndindex(grid_values.shape):
            row = [repr(i * step) for i in idx]
            row.append(repr(float(grid_values[idx])))
            fh.write(",".join(row) + "\n")
