"""Cluster geometry of distribution families and the error-bound formulas."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .metrics import KS, MMD2, DistanceMetric
from .unknown_k import ThresholdConfig

ALGORITHMS = ("known", "merge", "split")
_ALGORITHM_ALIASES = {"knownK": "known", "known_k": "known"}
_METRIC_ALIASES = {"mmd": MMD2, "MMD2": MMD2, "KS": KS}

KS_TAIL_QUANTILE = 1e-6
KS_GRID_POINTS = 20001
MMD_MC_SAMPLES = 10**6
MMD_MC_SEED = 20180415


class Estimate(NamedTuple):
    value: float
    stderr: float = 0.0


class Bound(NamedTuple):
    """A bound value; ``vacuous`` is set when it exceeds 1."""

    value: float
    vacuous: bool


@dataclass(frozen=True)
class ClusterGeometry:
    """Worst-case intra (``d_L``) and inter (``d_H``) cluster distances."""

    d_L: float
    d_H: float

    @property
    def sigma(self) -> float:
        return self.d_H + self.d_L

    @property
    def delta(self) -> float:
        return self.d_H - self.d_L

    @property
    def separated(self) -> bool:
        """True when ``d_L < d_H``, the regime the error bounds require."""
        return self.d_L < self.d_H


@dataclass(frozen=True)
class BoundParameters:
    """Prefactors ``a1, a2, a3`` and per-sample exponent ``b`` of the concentration assumption."""

    a1: float
    a2: float
    a3: float
    b: float

    def __post_init__(self):
        if not self.b > 0:
            raise ValueError("exponent rate b must be positive")
        if min(self.a1, self.a2, self.a3) < 0 or not np.all(np.isfinite([self.a1, self.a2, self.a3])):
            raise ValueError("prefactors must be finite and nonnegative")


def _metric_kind(metric) -> str:
    if isinstance(metric, DistanceMetric):
        return metric.kind
    kind = _METRIC_ALIASES.get(metric, metric)
    if kind not in (KS, MMD2):
        raise ValueError(f"unknown metric {metric!r}")
    return kind


def _algorithm(name: str) -> str:
    name = _ALGORITHM_ALIASES.get(name, name)
    if name not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {name!r}")
    return name


def ks_between(p, q) -> float:
    """Supremum of ``|F_p - F_q|`` for continuous scalar distributions.

    A dense grid over the pooled central quantile range locates the peak,
    which bounded Brent search then refines.
    """
    lo = min(p.ppf(KS_TAIL_QUANTILE), q.ppf(KS_TAIL_QUANTILE))
    hi = max(p.ppf(1 - KS_TAIL_QUANTILE), q.ppf(1 - KS_TAIL_QUANTILE))
    grid = np.linspace(lo, hi, KS_GRID_POINTS)
    gap = np.abs(p.cdf(grid) - q.cdf(grid))
    i = int(np.argmax(gap))
    best = float(gap[i])
    left, right = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    if right > left:
        res = minimize_scalar(
            lambda a: -abs(float(p.cdf(a)) - float(q.cdf(a))),
            bounds=(left, right),
            method="bounded",
            options={"xatol": 1e-12},
        )
        best = max(best, -float(res.fun))
    return best


def mmd2_between(p, q, kernel, n: int = MMD_MC_SAMPLES, seed: int = MMD_MC_SEED) -> Estimate:
    """Monte-Carlo estimate of the population MMD^2 with its standard error.

    Uses ``n`` independent quadruples ``(x, x', y, y')`` and the unbiased
    per-quadruple statistic ``g(x,x') + g(y,y') - g(x,y') - g(x',y)``.
    """
    if p == q:
        return Estimate(0.0, 0.0)
    rng = np.random.default_rng(seed)
    x, x2 = p.sample(n, rng), p.sample(n, rng)
    y, y2 = q.sample(n, rng), q.sample(n, rng)
    h = kernel.paired(x, x2) + kernel.paired(y, y2) - kernel.paired(x, y2) - kernel.paired(x2, y)
    return Estimate(float(h.mean()), float(h.std(ddof=1) / np.sqrt(n)))


def dist_between_distributions(p, q, metric: DistanceMetric, **mc_options) -> Estimate:
    """Distance between two analytic distributions under ``metric``.

    KS is computed numerically to about 1e-9 and carries zero standard
    error; MMD^2 is a Monte-Carlo estimate (see :func:`mmd2_between`).
    """
    if metric.kind == KS:
        if not (hasattr(p, "cdf") and hasattr(q, "cdf")):
            raise TypeError("KS between distributions needs evaluable CDFs")
        return Estimate(0.0 if p == q else ks_between(p, q))
    if metric.kind == MMD2:
        return mmd2_between(p, q, metric.kernel, **mc_options)
    raise ValueError(f"unsupported metric {metric.kind!r}")


def cluster_geometry(specs: Sequence, labels: Sequence[int], metric: DistanceMetric, **mc_options) -> ClusterGeometry:
    """``d_L`` as the largest within-cluster distance, ``d_H`` as the smallest across clusters."""
    labels = list(labels)
    if len(specs) != len(labels):
        raise ValueError("specs and labels differ in length")
    if len(set(labels)) < 2:
        raise ValueError("need at least two clusters")
    cache = {}

    def dist(a, b):
        if (b, a) in cache:
            return cache[(b, a)]
        if (a, b) not in cache:
            cache[(a, b)] = dist_between_distributions(a, b, metric, **mc_options).value
        return cache[(a, b)]

    d_L, d_H = 0.0, np.inf
    for i, j in combinations(range(len(specs)), 2):
        d = dist(specs[i], specs[j])
        if labels[i] == labels[j]:
            d_L = max(d_L, d)
        else:
            d_H = min(d_H, d)
    return ClusterGeometry(float(d_L), float(d_H))


def threshold_from_omega(geom: ClusterGeometry, omega: float = 0.5) -> ThresholdConfig:
    """``d_th = omega * d_L + (1 - omega) * d_H``; ``omega = 0.5`` gives ``sigma / 2``."""
    if not 0 < omega < 1:
        raise ValueError(f"omega must lie in (0, 1), got {omega}")
    if not geom.delta > 0:
        raise ValueError("threshold needs d_L < d_H")
    return ThresholdConfig(omega * geom.d_L + (1 - omega) * geom.d_H, omega)


def corollary_parameters(metric, delta: float, kernel_bound: float = 1.0) -> BoundParameters:
    """Constants for KS or MMD^2 at ``d_th = sigma / 2``.

    Each lemma is evaluated at a gap of ``delta / 2`` from ``d_L`` or ``d_H``.
    The three-sequence MMD^2 exponent ``delta^2 / (96 K^2)`` is weakened to
    the common rate ``delta^2 / (256 K^2)``.
    """
    kind = _metric_kind(metric)
    if not delta > 0:
        raise ValueError("delta must be positive")
    if kind == KS:
        return BoundParameters(4.0, 4.0, 6.0, delta**2 / 8)
    return BoundParameters(1.0, 1.0, 1.0, delta**2 / (256 * kernel_bound**2))


def theorem_bound(algorithm: str, params: BoundParameters, M: int, T: int, n: int) -> float:
    """Generic error bound after ``T`` iterations for any admissible metric."""
    algorithm = _algorithm(algorithm)
    a1, a2, a3 = params.a1, params.a2, params.a3
    if algorithm == "known":
        prefactor = a1 + a2 + (T + 1) * a3
    elif algorithm == "merge":
        prefactor = (T + 1) * a1 + a2 + (T + 1) * a3
    else:
        prefactor = T * (a1 + a2 + a3)
    return M**2 * prefactor * np.exp(-params.b * n)


def error_bound(algorithm: str, metric, M: int, T: int, n: int, delta: float, kernel_bound: float = 1.0) -> Bound:
    """Closed-form error-probability bound for KS or MMD^2 clustering.

    Values above 1 are returned unchanged with ``vacuous=True``.
    """
    if M < 1 or T < 0 or n < 1:
        raise ValueError("M and n must be positive and T nonnegative")
    if not kernel_bound > 0:
        raise ValueError("kernel bound must be positive")
    params = corollary_parameters(metric, delta, kernel_bound)
    value = float(theorem_bound(algorithm, params, M, T, n))
    return Bound(value, value > 1)


def _check(cond: bool, message: str):
    if not cond:
        raise ValueError(message)


def lemma_tail_bound(lemma: str, **p) -> float:
    """Tail-probability bounds used to build the error bounds.

    Lemmas and their parameters:

    ``dkw`` (n, eps)
        ``P(d_KS(x, p) > eps) <= 2 exp(-2 n eps^2)``.
    ``ks_intra`` (n, d0, d_L), ``mmd_intra`` (n, d0, d_L, kernel_bound)
        same-cluster pair exceeds ``d0 >= d_L``.
    ``ks_inter`` (n, d0, d_H), ``mmd_inter`` (n, d0, d_H, kernel_bound)
        cross-cluster pair at most ``d0`` with ``0 < d0 <= d_H``.
    ``ks_triple`` (n, delta), ``mmd_triple`` (n, delta, kernel_bound)
        a same-cluster pair is no closer than a cross-cluster pair.
    """
    n = p["n"]
    _check(n >= 1, "n must be positive")
    K2 = p.get("kernel_bound", 1.0) ** 2
    if lemma == "dkw":
        _check(p["eps"] > 0, "eps must be positive")
        return 2 * np.exp(-2 * n * p["eps"] ** 2)
    if lemma in ("ks_intra", "mmd_intra"):
        gap = p["d0"] - p["d_L"]
        _check(gap >= 0, "d0 must be at least d_L")
        return 4 * np.exp(-n * gap**2 / 2) if lemma == "ks_intra" else np.exp(-n * gap**2 / (64 * K2))
    if lemma in ("ks_inter", "mmd_inter"):
        gap = p["d_H"] - p["d0"]
        _check(gap >= 0 and p["d0"] > 0, "d0 must lie in (0, d_H]")
        return 4 * np.exp(-n * gap**2 / 2) if lemma == "ks_inter" else np.exp(-n * gap**2 / (64 * K2))
    if lemma == "ks_triple":
        _check(p["delta"] >= 0, "delta must be nonnegative")
        return 6 * np.exp(-n * p["delta"] ** 2 / 8)
    if lemma == "mmd_triple":
        _check(p["delta"] >= 0, "delta must be nonnegative")
        return np.exp(-n * p["delta"] ** 2 / (96 * K2))
    raise ValueError(f"unknown lemma {lemma!r}")
