"""Circular statistics for sampled phase configurations.

The lock measure chi scores an n-tuple of phases by its squared mean
circular deviation from the nearest branch of the circular mean: zero for
identical phases, one for the antiphase patterns, one quarter for the
splayed third-of-turn patterns. For independent uniform phases chi itself
is uniform on [0, 1], which makes mass accumulating near 0, 1/4, or 1 a
direct signature of phase structure.
"""

from __future__ import annotations

from math import nan, pi

import numpy as np
from scipy import stats

# chi intervals flagging locked, splayed, and antiphase configurations
INTERVALS = ((0.0, 2 / 16), (3 / 16, 5 / 16), (14 / 16, 1.0))
DEFAULT_BINS = 64


def argdist(a, b):
    """Circular distance |a - b| folded into [0, pi]; broadcasts."""
    d = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)) % (2 * pi)
    return np.minimum(d, 2 * pi - d)


def chi(phases):
    """Branch-minimized squared mean deviation of an n-tuple of phases.

    chi = min_j [(n / 4 pi) sum_i argdist(phi_i, mean_j)]^2 where the
    candidate means are the n branches (2 pi j + sum phi) / n. Accepts a
    single tuple (n,) or a batch (..., n).
    """
    p = np.asarray(phases, dtype=float)
    single = p.ndim == 1
    pts = np.atleast_2d(p)
    n = pts.shape[-1]
    if n < 2:
        raise ValueError("need at least two phases")
    branches = (2 * pi * np.arange(n) + pts.sum(axis=-1)[..., None]) / n
    dists = argdist(pts[..., :, None], branches[..., None, :])
    sums = dists.sum(axis=-2).min(axis=-1)
    vals = (n * sums / (4 * pi)) ** 2
    return float(vals[0]) if single else vals.reshape(p.shape[:-1])


def chi_from_relative(rel_phases):
    """chi of configurations given as phases relative to the last site."""
    rel = np.atleast_2d(np.asarray(rel_phases, dtype=float))
    full = np.concatenate([rel, np.zeros((len(rel), 1))], axis=1)
    out = chi(full)
    return float(out[0]) if np.asarray(rel_phases).ndim == 1 else out


def chi2(phi1p):
    """Normalized circular distance of the first relative phase from zero."""
    return argdist(phi1p, 0.0) / pi


def interval_probabilities(values):
    """Fractions of samples in the locked, splayed, and antiphase windows."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("no samples")
    return tuple(float(np.mean((v >= lo) & (v <= hi))) for lo, hi in INTERVALS)


def family_ratio(p_locked, p_splayed):
    """Odds of the splayed family against the aligned one: P2 / (3 P1).

    A draw from the aligned argmax family lands in the locked window with
    probability 1/4; a draw from the splayed family lands in the splay
    window with probability 3/4. The ratio therefore estimates the odds
    of the splayed family in the ensemble. NaN when P1 vanishes.
    """
    if p_locked == 0:
        return nan
    return p_splayed / (3 * p_locked)


def ks_uniform(values, lo=0.0, hi=1.0):
    """Kolmogorov-Smirnov statistic against the uniform law on [lo, hi]."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("no samples")
    return float(stats.kstest(v, stats.uniform(loc=lo, scale=hi - lo).cdf).statistic)


def histogram(values, bins=DEFAULT_BINS, lo=0.0, hi=1.0):
    """Density histogram on [lo, hi]; returns (bin_left, bin_right, density)."""
    density, edges = np.histogram(
        np.asarray(values, dtype=float), bins=bins, range=(lo, hi), density=True
    )
    return edges[:-1], edges[1:], density


def histogram_local_maxima(values, bins=DEFAULT_BINS, lo=0.0, hi=1.0):
    """Centers of positive local maxima of the density histogram.

    A bin qualifies when no neighbor exceeds it and at least one neighbor
    falls strictly below; edge bins compare to their single neighbor.
    """
    left, right, density = histogram(values, bins, lo, hi)
    centers = (left + right) / 2
    last = len(density) - 1
    out = []
    for i, here in enumerate(density):
        if here <= 0:
            continue
        if i > 0 and density[i - 1] > here:
            continue
        if i < last and density[i + 1] > here:
            continue
        if (i > 0 and density[i - 1] < here) or (i < last and density[i + 1] < here):
            out.append(centers[i])
    return np.array(out)


def export_histogram_csv(values, path, bins=DEFAULT_BINS, lo=0.0, hi=1.0):
    left, right, density = histogram(values, bins, lo, hi)
    with open(path, "w") as fh:
        fh.write("bin_left,bin_right,density\n")
        for row in zip(left, right, density):
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def cluster_bootstrap(clusters, stat, n_resamples=1000, rng=None):
    """Bootstrap a statistic by resampling whole clusters with replacement.

    Samples within a cluster are treated as correlated (one cluster per
    record), so clusters are the exchangeable unit. `stat` maps a pooled
    1-D array to a float or a fixed-shape array. Returns the stacked
    (n_resamples, ...) draws; pass an explicit rng for reproducibility.
    """
    if rng is None:
        raise ValueError("pass an explicit rng; resampling must be reproducible")
    arrays = [np.asarray(c, dtype=float) for c in clusters]
    if not arrays:
        raise ValueError("need at least one cluster")
    k = len(arrays)
    draws = []
    for _ in range(n_resamples):
        pick = rng.integers(0, k, size=k)
        pooled = np.concatenate([arrays[i] for i in pick])
        draws.append(stat(pooled))
    return np.array(draws)


def bootstrap_summary(draws):
    """(mean, sigma, lo95, hi95) of 1-D bootstrap draws, NaN-tolerant."""
    s = np.asarray(draws, dtype=float)
    good = s[np.isfinite(s)]
    if good.size == 0:
        return nan, nan, nan, nan
    lo, hi = np.percentile(good, [2.5, 97.5])
    return float(good.mean()), float(good.std()), float(lo), float(hi)
