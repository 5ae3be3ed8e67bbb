"""Lindblad superoperator construction, spectra, decay-free mode
classification, steady states, and degenerate perturbation projection.

The generator acts as

    L[rho] = -i[H, rho] + sum_mu ( L_mu rho L_mu^+ - 1/2 {L_mu^+ L_mu, rho} )

and is materialized as a dense D^2 x D^2 matrix over column-stacked operators
(see operators.vectorize):

    mat(L) = -i (I kron H - H^T kron I)
             + sum_mu [ conj(L_mu) kron L_mu
                        - 1/2 I kron (L_mu^+ L_mu)
                        - 1/2 (L_mu^+ L_mu)^T kron I ].
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eig, eigh, expm, lstsq, svdvals

from .operators import devectorize, vectorize

MAX_SPECTRUM_DIM = 32          # full_spectrum refuses operators above this D
RESIDUAL_REL_TOL = 1e-8        # post-condition on eigenpair residuals
TRACE_PRESERVATION_TOL = 1e-10
NEGATIVE_EIG_WARN = -1e-8
_CLASSIFY_SEED = 0xA11CE       # fixed seed: classification must be deterministic


class LiouvillianError(Exception):
    """Base class for structural failures in this module."""


class DefectiveZeroSubspaceError(LiouvillianError):
    """Zero eigenvalue cluster has no biorthogonal left/right pairing."""


class DegenerateProjectionError(LiouvillianError):
    """Projected perturbation has a degenerate kernel; coefficients undefined."""


@dataclass
class LindbladModel:
    """Hamiltonian + jump operators, with an optional descriptive label."""

    hamiltonian: np.ndarray
    jumps: list
    label: str = ""
    spins: tuple = ()

    @property
    def dim(self):
        return self.hamiltonian.shape[0]

    def superoperator(self):
        return build_superoperator(self.hamiltonian, self.jumps)

    def apply(self, rho):
        return apply_lindblad(self.hamiltonian, self.jumps, rho)


def build_superoperator(hamiltonian, jumps):
    """Dense matrix of the Lindblad generator under column stacking."""
    h = np.asarray(hamiltonian, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"Hamiltonian must be square, got {h.shape}")
    d = h.shape[0]
    eye = np.eye(d)
    out = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for l_op in jumps:
        l_op = np.asarray(l_op, dtype=complex)
        if l_op.shape != (d, d):
            raise ValueError(
                f"jump operator shape {l_op.shape} does not match dimension {d}"
            )
        ldl = l_op.conj().T @ l_op
        out += np.kron(l_op.conj(), l_op)
        out -= 0.5 * (np.kron(eye, ldl) + np.kron(ldl.T, eye))
    return out


def apply_lindblad(hamiltonian, jumps, rho):
    """Apply the generator directly to a density operator (no D^2 matrix)."""
    out = -1j * (hamiltonian @ rho - rho @ hamiltonian)
    for l_op in jumps:
        ldl = l_op.conj().T @ l_op
        out += l_op @ rho @ l_op.conj().T - 0.5 * (ldl @ rho + rho @ ldl)
    return out


def trace_preservation_defect(superop):
    """Norm of vec(I)^H L; zero for any proper Lindblad generator."""
    d = int(round(np.sqrt(superop.shape[0])))
    return np.linalg.norm(vectorize(np.eye(d)).conj() @ superop)


@dataclass
class SpectralDecomposition:
    """Right/left eigensystem of a superoperator, residual-checked.

    Eigenvalues are sorted by descending real part, then ascending imaginary
    part, so decay-free modes come first.  Columns of `right` and `left`
    follow the same order; `left[:, k]^H @ superop = eigenvalue[k] * left[:, k]^H`.
    """

    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray
    residuals: np.ndarray
    norm_scale: float

    @property
    def dim(self):
        return int(round(np.sqrt(self.right.shape[0])))

    def right_operator(self, k):
        return devectorize(self.right[:, k])


def full_spectrum(superop):
    """Complete eigensystem with residual and conjugation-closure checks.

    Raises LiouvillianError if any eigenpair residual exceeds
    RESIDUAL_REL_TOL * ||L||_F or the spectrum is not closed under complex
    conjugation at the same tolerance.  Refuses D > MAX_SPECTRUM_DIM.
    """
    superop = np.asarray(superop, dtype=complex)
    n = superop.shape[0]
    d = int(round(np.sqrt(n)))
    if d * d != n:
        raise ValueError(f"superoperator size {n} is not a perfect square")
    if d > MAX_SPECTRUM_DIM:
        raise ValueError(
            f"dense eigensolve capped at operator dimension {MAX_SPECTRUM_DIM}, got {d}"
        )
    scale = np.linalg.norm(superop)
    vals, lefts, rights = eig(superop, left=True, right=True)
    order = np.lexsort((vals.imag, -vals.real))
    vals = vals[order]
    rights = rights[:, order]
    lefts = lefts[:, order]
    residuals = np.linalg.norm(superop @ rights - rights * vals, axis=0)
    if np.any(residuals > RESIDUAL_REL_TOL * scale):
        raise LiouvillianError(
            f"eigenpair residual {residuals.max():.3e} exceeds "
            f"{RESIDUAL_REL_TOL:.1e} * ||L|| = {RESIDUAL_REL_TOL * scale:.3e}"
        )
    # spectrum of a Hermiticity-preserving map is closed under conjugation
    tol = RESIDUAL_REL_TOL * max(scale, 1.0)
    for lam in vals:
        if np.min(np.abs(vals - np.conj(lam))) > tol:
            raise LiouvillianError(
                f"spectrum not closed under conjugation near {lam!r}"
            )
    return SpectralDecomposition(vals, rights, lefts, residuals, float(scale))


@dataclass
class ModeClassification:
    """Decay-free content of a spectrum.

    steady: trace-one zero modes (PSD projector mixtures where the zero
    subspace admits them).  oscillating: (operator, frequency) pairs with
    |Re lambda| <= tol_real and |Im lambda| > tol_imag.  remaining_zero_modes:
    Frobenius complement of the steady span inside the zero subspace
    (traceless coherence directions for the models in this package).
    """

    steady: list
    oscillating: list
    remaining_zero_modes: list
    zero_dim: int
    tol_real: float
    tol_imag: float
    steady_residuals: list = field(default_factory=list)


def default_tolerances(norm_scale):
    """(tol_real, tol_imag) used to call an eigenvalue 'zero': 1e-9 * ||L||."""
    t = 1e-9 * max(norm_scale, 1.0)
    return t, t


def classify_decay_free(dec, tol_real=None, tol_imag=None, superop=None):
    """Split decay-free eigenmodes into steady states, oscillating coherences,
    and leftover zero-subspace directions.

    Steady states are extracted deterministically: a fixed-seed random
    Hermitian combination of the zero subspace is diagonalized, its spectral
    projectors are kept when the generator annihilates them, and each kept
    projector is trace-normalized.  Works for commuting sector structures and
    decoherence-free blocks alike; raises DefectiveZeroSubspaceError when the
    zero cluster is not diagonalizable (left/right overlap singular).

    `superop` (optional) lets the projector residual test use the exact
    generator; otherwise it is reconstructed from the decomposition.
    """
    if tol_real is None or tol_imag is None:
        d_real, d_imag = default_tolerances(dec.norm_scale)
        tol_real = d_real if tol_real is None else tol_real
        tol_imag = d_imag if tol_imag is None else tol_imag

    vals = dec.eigenvalues
    free = np.abs(vals.real) <= tol_real
    zero = free & (np.abs(vals.imag) <= tol_imag)
    osc = free & ~zero

    oscillating = [
        (devectorize(dec.right[:, k]), float(vals[k].imag))
        for k in np.nonzero(osc)[0]
    ]

    zidx = np.nonzero(zero)[0]
    k = len(zidx)
    if k == 0:
        return ModeClassification([], oscillating, [], 0, tol_real, tol_imag)

    rz = dec.right[:, zidx]
    lz = dec.left[:, zidx]
    overlap = lz.conj().T @ rz
    smin = svdvals(overlap)[-1] if k else 0.0
    if smin < 1e-8:
        raise DefectiveZeroSubspaceError(
            f"zero cluster of size {k} has singular left/right overlap "
            f"(sigma_min = {smin:.3e}); generator is defective there"
        )

    # orthonormal basis of the zero subspace, then its Hermitian real basis
    q, _ = np.linalg.qr(rz)
    dim = dec.dim
    herm = []
    for j in range(k):
        op = devectorize(q[:, j])
        herm.append((op + op.conj().T) / 2)
        herm.append((op - op.conj().T) / 2j)
    # the zero subspace of a Hermiticity-preserving map is conj-closed, so the
    # Hermitian elements span it over the reals; orthonormalize by SVD
    mats = np.array([vectorize(h) for h in herm])
    reals = np.hstack([mats.real, mats.imag])
    _, sv, vt = np.linalg.svd(reals, full_matrices=False)
    keep = sv > 1e-10 * max(sv[0], 1e-300)
    if int(keep.sum()) != k:
        raise LiouvillianError(
            f"zero subspace not closed under conjugation: Hermitian rank "
            f"{int(keep.sum())} != cluster size {k}"
        )
    hbasis = []
    for row in vt[keep]:
        v = row[: dim * dim] + 1j * row[dim * dim:]
        hbasis.append(devectorize(v))

    if superop is None:
        superop_action = _action_from_decomposition(dec)
    else:
        superop_action = lambda rho: devectorize(superop @ vectorize(rho))  # noqa: E731

    rng = np.random.default_rng(_CLASSIFY_SEED)
    combo = sum(w * h for w, h in zip(rng.normal(size=k), hbasis))
    combo = (combo + combo.conj().T) / 2
    evals, evecs = eigh(combo)
    spread = max(evals[-1] - evals[0], 1.0)
    gap_tol = 1e-7 * spread

    steady, steady_res = [], []
    groups = _group_by_gap(evals, gap_tol)
    for sel in groups:
        proj = evecs[:, sel] @ evecs[:, sel].conj().T
        img = superop_action(proj)
        res = np.linalg.norm(img) / np.linalg.norm(proj)
        if res <= max(10 * tol_real, 1e-10 * dec.norm_scale):
            steady.append(proj / np.trace(proj).real)
            steady_res.append(float(res))

    remaining = _zero_complement(q, steady)
    return ModeClassification(
        steady, oscillating, remaining, k, tol_real, tol_imag, steady_res
    )


def _group_by_gap(sorted_vals, gap_tol):
    groups, current = [], [0]
    for i in range(1, len(sorted_vals)):
        if sorted_vals[i] - sorted_vals[i - 1] > gap_tol:
            groups.append(current)
            current = []
        current.append(i)
    groups.append(current)
    return groups


def _action_from_decomposition(dec):
    # reconstruct L v = R diag(lam) R^{-1} v lazily via solves
    rinv = np.linalg.inv(dec.right)

    def act(rho):
        coeff = rinv @ vectorize(rho)
        return devectorize(dec.right @ (dec.eigenvalues * coeff))

    return act


def _zero_complement(zero_basis_q, steady):
    if not steady:
        return [devectorize(zero_basis_q[:, j]) for j in range(zero_basis_q.shape[1])]
    s = np.column_stack([vectorize(p) for p in steady])
    sq, _ = np.linalg.qr(s)
    resid = zero_basis_q - sq @ (sq.conj().T @ zero_basis_q)
    u, sv, _ = np.linalg.svd(resid, full_matrices=False)
    keep = sv > 1e-9
    return [devectorize(u[:, j]) for j in np.nonzero(keep)[0]]


@dataclass
class SteadyStateResult:
    """Solution of L[rho] = 0 with Tr rho = 1 (or a null basis when degenerate).

    multiplicity is the numerical null-space dimension: singular values below
    max(n, m) * eps * sigma_max, the same threshold numpy.linalg.matrix_rank
    uses.  When multiplicity > 1 the bordered solve is refused: rho is None
    and null_basis holds devectorized right singular vectors instead.
    """

    rho: np.ndarray | None
    multiplicity: int
    residual: float
    hermiticity_defect: float
    min_eigenvalue: float
    null_basis: list
    rank_threshold: float


def steady_state(superop, check_trace_preservation=True):
    """Solve for the trace-one steady state by a bordered least-squares system.

    Pre-condition: the generator is trace preserving to TRACE_PRESERVATION_TOL
    (relative to ||L||_F).  Post-condition: ||L[rho]|| <= 1e-10 * ||L||_F.
    Warns when the Hermitized solution has an eigenvalue below -1e-8.
    """
    superop = np.asarray(superop, dtype=complex)
    n = superop.shape[0]
    d = int(round(np.sqrt(n)))
    scale = np.linalg.norm(superop)
    if check_trace_preservation:
        defect = trace_preservation_defect(superop)
        if defect > TRACE_PRESERVATION_TOL * max(scale, 1.0):
            raise ValueError(
                f"generator is not trace preserving: defect {defect:.3e} "
                f"(tolerance {TRACE_PRESERVATION_TOL:.1e} * ||L||)"
            )

    sv = svdvals(superop)
    threshold = n * np.finfo(float).eps * sv[0]
    multiplicity = int(np.sum(sv < threshold))

    if multiplicity > 1:
        # degenerate kernel: refuse the bordered solve, hand back the basis
        _, _, vh = np.linalg.svd(superop)
        basis = [devectorize(vh[j].conj()) for j in range(n - multiplicity, n)]
        return SteadyStateResult(
            None, multiplicity, np.nan, np.nan, np.nan, basis, float(threshold)
        )

    bordered = np.vstack([superop, vectorize(np.eye(d)).conj()])
    rhs = np.zeros(n + 1, dtype=complex)
    rhs[-1] = 1.0
    sol = lstsq(bordered, rhs, lapack_driver="gelsy")[0]
    rho = devectorize(sol)

    defect = float(np.linalg.norm(rho - rho.conj().T) / 2)
    rho = (rho + rho.conj().T) / 2
    rho = rho / np.trace(rho).real
    eigs = np.linalg.eigvalsh(rho)
    min_eig = float(eigs[0])
    if min_eig < NEGATIVE_EIG_WARN:
        warnings.warn(
            f"steady state has negative eigenvalue {min_eig:.3e}",
            RuntimeWarning,
            stacklevel=2,
        )
    residual = float(np.linalg.norm(superop @ vectorize(rho)))
    if residual > 1e-10 * max(scale, 1.0):
        raise LiouvillianError(
            f"steady-state residual {residual:.3e} exceeds 1e-10 * ||L||"
        )
    return SteadyStateResult(
        rho, max(multiplicity, 1), residual, defect, min_eig, [], float(threshold)
    )


@dataclass
class PerturbativeResult:
    """First-order content of a perturbation on a degenerate zero subspace.

    coefficients: weights c_alpha of the perturbed steady state on the given
    (or computed) right zero basis, normalized so the total trace is one.
    effective_generator: W[a, b] = <sigma_a, L1[rho_b]> with {sigma_a} the
    dual (biorthogonal) left zero basis.
    """

    coefficients: np.ndarray
    effective_generator: np.ndarray
    basis: list
    null_dim: int


def perturbative_coefficients(superop0, superop1, zero_basis=None, rank_tol=None):
    """Project a perturbation onto the zero subspace of a base generator and
    return the kernel weights of the projected generator.

    Raises DegenerateProjectionError when the projected generator's kernel is
    not one-dimensional, and DefectiveZeroSubspaceError when left and right
    zero subspaces fail to pair up.
    """
    superop0 = np.asarray(superop0, dtype=complex)
    n = superop0.shape[0]
    u, sv, vh = np.linalg.svd(superop0)
    threshold = rank_tol if rank_tol is not None else n * np.finfo(float).eps * sv[0]
    k = int(np.sum(sv < threshold))
    if k == 0:
        raise DegenerateProjectionError("base generator has no zero subspace")

    lz = u[:, n - k:]                       # left null: lz^H L0 = 0
    if zero_basis is not None:
        if len(zero_basis) != k:
            raise ValueError(
                f"supplied zero basis has {len(zero_basis)} elements, "
                f"but the kernel dimension is {k}"
            )
        rz = np.column_stack([vectorize(b) for b in zero_basis])
        basis_ops = list(zero_basis)
    else:
        rz = vh[n - k:].conj().T
        basis_ops = [devectorize(rz[:, j]) for j in range(k)]

    overlap = lz.conj().T @ rz
    om_sv = svdvals(overlap)
    if om_sv[-1] < 1e-10 * max(om_sv[0], 1e-300):
        raise DefectiveZeroSubspaceError(
            "left and right zero subspaces do not pair: overlap singular"
        )
    w = np.linalg.solve(overlap, lz.conj().T @ (superop1 @ rz))

    wu, wsv, wvh = np.linalg.svd(w)
    wthr = max(len(wsv) * np.finfo(float).eps * wsv[0], 1e-12 * max(wsv[0], 1.0))
    ndim = int(np.sum(wsv < wthr))
    if ndim != 1:
        raise DegenerateProjectionError(
            f"projected generator kernel has dimension {ndim}, expected 1; "
            "no unique coefficient vector exists"
        )
    c = wvh[-1].conj()
    traces = np.array([np.trace(b) for b in basis_ops])
    total = c @ traces
    if abs(total) < 1e-12:
        raise DegenerateProjectionError(
            "kernel vector has zero total trace; cannot normalize"
        )
    c = c / total
    if np.max(np.abs(c.imag)) < 1e-9:
        c = c.real
    return PerturbativeResult(c, w, basis_ops, ndim)


def evolve(superop, rho0, times):
    """Propagate rho0 through the listed times by stepping matrix exponentials.

    `times` must be nondecreasing and start at >= 0.  Returns an array of
    density operators, one per time.  Trace drift beyond 1e-10 raises.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) == 0:
        raise ValueError("times must be a nonempty 1-D sequence")
    if np.any(np.diff(times) < 0) or times[0] < 0:
        raise ValueError("times must be nondecreasing and nonnegative")
    v = vectorize(np.asarray(rho0, dtype=complex))
    out = []
    t_prev = 0.0
    prop_cache = {}
    for t in times:
        dt = t - t_prev
        if dt > 0:
            key = round(dt, 15)
            if key not in prop_cache:
                prop_cache[key] = expm(superop * dt)
            v = prop_cache[key] @ v
        t_prev = t
        rho = devectorize(v)
        drift = abs(np.trace(rho) - np.trace(rho0))
        if drift > 1e-10:
            raise LiouvillianError(f"trace drift {drift:.3e} during evolution")
        out.append(rho)
    return np.array(out)


def export_spectrum_csv(dec, path_or_file, tol_real=None, tol_imag=None):
    """Write (re_lambda, im_lambda, class, residual) rows; class is `zero`,
    `oscillating`, or `decaying` under the classification tolerances.
    Accepts a path or an open text stream."""
    if tol_real is None or tol_imag is None:
        d_real, d_imag = default_tolerances(dec.norm_scale)
        tol_real = d_real if tol_real is None else tol_real
        tol_imag = d_imag if tol_imag is None else tol_imag

    def _write(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["re_lambda", "im_lambda", "class", "residual"])
        for lam, res in zip(dec.eigenvalues, dec.residuals):
            if abs(lam.real) <= tol_real:
                label = "zero" if abs(lam.imag) <= tol_imag else "oscillating"
            else:
                label = "decaying"
            writer.writerow(
                [repr(float(lam.real)), repr(float(lam.imag)), label,
                 repr(float(res))]
            )

    if hasattr(path_or_file, "write"):
        _write(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            _write(fh)
