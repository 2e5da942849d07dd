"""Sequence distances: empirical CDFs, two-sample KS and unbiased MMD^2.

Sequences are plain numpy arrays. A 1-d array of length ``n`` is a scalar
sequence (``m = 1``); a 2-d array of shape ``(n, m)`` holds ``n`` samples of
dimension ``m``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Optional, Sequence

import numpy as np

KS = "ks"
MMD2 = "mmd2"


class DimensionError(ValueError):
    """Raised when sequences have the wrong or mismatched sample dimension."""


def as_sequence(x) -> np.ndarray:
    """Validate a data sequence and return it as a float array of shape (n, m)."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise DimensionError(f"sequence must be 1-d or 2-d, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError("sequence must contain at least one sample")
    if not np.all(np.isfinite(arr)):
        raise ValueError("sequence contains non-finite values")
    return arr


def _scalar_samples(x) -> np.ndarray:
    arr = as_sequence(x)
    if arr.shape[1] != 1:
        raise DimensionError(f"KS distance needs scalar samples, got m={arr.shape[1]}")
    return arr[:, 0]


class EmpiricalCdf:
    """Right-continuous empirical CDF of a scalar sequence."""

    def __init__(self, samples):
        self.sorted_samples = np.sort(_scalar_samples(samples))
        self.n = self.sorted_samples.size

    def __call__(self, a):
        counts = np.searchsorted(self.sorted_samples, a, side="right")
        return counts / self.n


def ecdf_eval(cdf: EmpiricalCdf, a: float) -> float:
    """Fraction of samples less than or equal to ``a``."""
    return float(cdf(a))


def _ks_sorted(xs: np.ndarray, ys: np.ndarray) -> float:
    # |F_x - F_y| is piecewise constant with breakpoints at the pooled samples,
    # so its supremum is attained at one of them.
    pooled = np.concatenate([xs, ys])
    fx = np.searchsorted(xs, pooled, side="right") / xs.size
    fy = np.searchsorted(ys, pooled, side="right") / ys.size
    return float(np.max(np.abs(fx - fy)))


def ks_distance_seq(x, y) -> float:
    """Two-sample Kolmogorov-Smirnov distance between scalar sequences."""
    return _ks_sorted(np.sort(_scalar_samples(x)), np.sort(_scalar_samples(y)))


def ks_distance_to_cdf(x, cdf: Callable, cdf_left: Optional[Callable] = None) -> float:
    """KS distance between a scalar sequence and a distribution.

    Args:
        x: scalar sequence.
        cdf: vectorized CDF of the reference distribution.
        cdf_left: left limits ``F(a-)``. Only needed when ``cdf`` has atoms;
            defaults to ``cdf`` (continuous distributions).

    Returns:
        ``max_i max(|i/n - F(z_i)|, |(i-1)/n - F(z_i-)|)`` over the sorted
        samples ``z_i``, which is the exact supremum.
    """
    z = np.sort(_scalar_samples(x))
    n = z.size
    upper = np.arange(1, n + 1) / n
    lower = np.arange(0, n) / n
    f_at = np.asarray(cdf(z), dtype=float)
    f_left = f_at if cdf_left is None else np.asarray(cdf_left(z), dtype=float)
    return float(max(np.max(np.abs(upper - f_at)), np.max(np.abs(lower - f_left))))


@dataclass(frozen=True)
class ExponentialKernel:
    """``g(x, y) = exp(-||x - y||_1 / scale)``, bounded by 1.

    ``scale=2`` gives the kernel ``exp(-|x - y| / 2)`` used in the simulations.
    """

    scale: float = 2.0

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("kernel scale must be positive")

    @property
    def bound(self) -> float:
        return 1.0

    def __call__(self, x, y) -> float:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if x.shape != y.shape:
            raise DimensionError(f"kernel arguments differ in shape: {x.shape} vs {y.shape}")
        return float(np.exp(-np.sum(np.abs(x - y)) / self.scale))

    def paired(self, x, y) -> np.ndarray:
        """Elementwise ``g(x[i], y[i])`` for scalar or (n, m) sample arrays."""
        diff = np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
        if diff.ndim == 2:
            diff = diff.sum(axis=1)
        return np.exp(-diff / self.scale)

    def gram(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Kernel matrix between sample arrays of shape (n, m) and (n_y, m)."""
        l1 = np.abs(x[:, None, :] - y[None, :, :]).sum(axis=2)
        return np.exp(-l1 / self.scale)

    def pair_sum(self, x: np.ndarray, y: np.ndarray) -> float:
        """``sum_i sum_j g(x[i], y[j])`` for (n, m) arrays."""
        if x.shape[1] == 1:
            xs = np.sort(x[:, 0])
            ys = np.sort(y[:, 0])
            span = max(xs[-1], ys[-1]) - min(xs[0], ys[0])
            if span / self.scale <= 600.0:
                return _exp_pair_sum_sorted(xs, ys, self.scale)
        return _blocked_gram_sum(self, x, y)


def _exp_pair_sum_sorted(xs: np.ndarray, ys: np.ndarray, scale: float) -> float:
    # O((n + n_y) log) evaluation of sum exp(-|x_i - y_j| / scale) for sorted
    # scalars: split each row at x_i and factor the exponential. Centering keeps
    # every factor inside exp(+-300) given the span guard in the caller.
    c = 0.5 * (min(xs[0], ys[0]) + max(xs[-1], ys[-1]))
    up = np.exp((ys - c) / scale)
    down = np.exp(-(ys - c) / scale)
    below = np.concatenate([[0.0], np.cumsum(up)])
    above = np.concatenate([np.cumsum(down[::-1])[::-1], [0.0]])
    k = np.searchsorted(ys, xs, side="right")
    left = np.exp(-(xs - c) / scale) * below[k]
    right = np.exp((xs - c) / scale) * above[k]
    return float(np.sum(left) + np.sum(right))


def _blocked_gram_sum(kernel, x: np.ndarray, y: np.ndarray, block: int = 512) -> float:
    total = 0.0
    for start in range(0, x.shape[0], block):
        total += float(kernel.gram(x[start:start + block], y).sum())
    return total


def _kernel_pair_sum(kernel, x: np.ndarray, y: np.ndarray) -> float:
    pair_sum = getattr(kernel, "pair_sum", None)
    if pair_sum is not None:
        return pair_sum(x, y)
    return _blocked_gram_sum(kernel, x, y)


def _kernel_diag_sum(kernel, x: np.ndarray) -> float:
    paired = getattr(kernel, "paired", None)
    if paired is not None:
        return float(paired(x, x).sum())
    return float(sum(kernel(row, row) for row in x))


def _within_term(kernel, x: np.ndarray) -> float:
    n = x.shape[0]
    if n < 2:
        raise ValueError("unbiased MMD^2 needs at least 2 samples per sequence")
    off_diag = _kernel_pair_sum(kernel, x, x) - _kernel_diag_sum(kernel, x)
    return off_diag / (n * (n - 1))


def _cross_term(kernel, x: np.ndarray, y: np.ndarray) -> float:
    return 2.0 * _kernel_pair_sum(kernel, x, y) / (x.shape[0] * y.shape[0])


def mmd2_unbiased(x, y, kernel) -> float:
    """Unbiased U-statistic estimate of MMD^2 between two sequences.

    The value may be negative; it is returned as is.
    """
    x = as_sequence(x)
    y = as_sequence(y)
    if x.shape[1] != y.shape[1]:
        raise DimensionError(f"sample dimensions differ: {x.shape[1]} vs {y.shape[1]}")
    return _within_term(kernel, x) + _within_term(kernel, y) - _cross_term(kernel, x, y)


@dataclass(frozen=True)
class DistanceMetric:
    """A sequence distance: ``kind`` is ``"ks"`` or ``"mmd2"``."""

    kind: str
    kernel: object = None

    def __post_init__(self):
        if self.kind not in (KS, MMD2):
            raise ValueError(f"unknown metric kind {self.kind!r}")
        if self.kind == MMD2 and self.kernel is None:
            raise ValueError("MMD^2 metric needs a kernel")

    def __call__(self, x, y) -> float:
        if self.kind == KS:
            return ks_distance_seq(x, y)
        return mmd2_unbiased(x, y, self.kernel)

    @property
    def kernel_bound(self) -> float:
        return self.kernel.bound if self.kernel is not None else 1.0


def ks_metric() -> DistanceMetric:
    return DistanceMetric(KS)


def mmd_metric(scale: float = 2.0) -> DistanceMetric:
    return DistanceMetric(MMD2, ExponentialKernel(scale))


def pairwise_distance_matrix(
    seqs: Sequence, metric: DistanceMetric, workers: Optional[int] = None
) -> np.ndarray:
    """Symmetric M x M matrix of sequence distances with a zero diagonal.

    Per-sequence work (sorting, within-sequence kernel sums) is done once.
    Every unordered pair is computed independently, so the result does not
    depend on ``workers``.
    """
    if len(seqs) < 2:
        raise ValueError("need at least 2 sequences")
    arrays = [as_sequence(s) for s in seqs]
    dims = {a.shape[1] for a in arrays}
    if len(dims) != 1:
        raise DimensionError(f"sequences have heterogeneous dimensions {sorted(dims)}")

    if metric.kind == KS:
        if dims != {1}:
            raise DimensionError("KS distance needs scalar samples")
        prepared = [np.sort(a[:, 0]) for a in arrays]

        def entry(i, j):
            return _ks_sorted(prepared[i], prepared[j])
    else:
        kernel = metric.kernel
        within = [_within_term(kernel, a) for a in arrays]

        def entry(i, j):
            return within[i] + within[j] - _cross_term(kernel, arrays[i], arrays[j])

    m = len(arrays)
    pairs = list(combinations(range(m), 2))
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(lambda p: entry(*p), pairs))
    else:
        values = [entry(i, j) for i, j in pairs]

    D = np.zeros((m, m))
    for (i, j), v in zip(pairs, values):
        D[i, j] = D[j, i] = v
    return D
