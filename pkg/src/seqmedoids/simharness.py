"""Monte-Carlo estimation of clustering error probabilities.

A scenario has ``K`` distribution clusters with three member distributions
each. Gaussian clusters use means ``{k - delta, k, k + delta}`` with unit
variance; Gamma clusters use shapes ``{2.5k + 1 - delta, 2.5k + 1,
2.5k + 1 + delta}`` with unit scale, for ``k = 1..K``.

Trial ``r`` at sample size ``n`` draws from a generator seeded with
``numpy.random.SeedSequence([master_seed, n, r])``, which hashes the three
integers into an independent stream. Trials therefore never share state and
can run in any order or in parallel with identical results.
"""

from __future__ import annotations

import csv
import logging
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .distributions import Gamma, Gaussian
from .geometry import ClusterGeometry, cluster_geometry, error_bound, threshold_from_omega
from .kmedoids import DEFAULT_MAX_ITERS, ClusteringResult, cluster_known_k
from .metrics import DistanceMetric, ks_metric, mmd_metric, pairwise_distance_matrix
from .unknown_k import cluster_merge_based, cluster_split_based

log = logging.getLogger(__name__)

FAMILIES = ("gaussian", "gamma")
METRICS = ("ks", "mmd")
PER_CLUSTER = 3
CSV_HEADER = ["family", "metric", "algorithm", "delta", "omega", "n", "trials", "errors", "p_e", "bound", "seed"]


@dataclass(frozen=True)
class ScenarioConfig:
    family: str = "gaussian"
    delta: float = 0.0
    metric: str = "ks"
    algorithm: str = "known"
    omega: float = 0.5
    n_list: Tuple[int, ...] = (100,)
    trials: int = 100
    master_seed: int = 0
    K: int = 5
    kernel_scale: float = 2.0
    max_iters: int = DEFAULT_MAX_ITERS
    # Known geometry or threshold, bypassing the computed ones.
    d_L: Optional[float] = None
    d_H: Optional[float] = None
    d_th: Optional[float] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.metric not in METRICS:
            raise ValueError(f"unknown metric {self.metric!r}")
        if self.algorithm not in ("known", "merge", "split"):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.trials < 1 or self.K < 2 or self.max_iters < 1:
            raise ValueError("trials and max_iters must be positive and K at least 2")
        if not self.n_list or min(self.n_list) < 2:
            raise ValueError("sample sizes must be at least 2")
        if (self.d_L is None) != (self.d_H is None):
            raise ValueError("d_L and d_H must be given together")

    @property
    def M(self) -> int:
        return self.K * PER_CLUSTER

    def distance_metric(self) -> DistanceMetric:
        return ks_metric() if self.metric == "ks" else mmd_metric(self.kernel_scale)


@dataclass
class CurveRow:
    n: int
    trials: int
    errors: int
    bound: float
    k_hat_histogram: Dict[int, int] = field(default_factory=dict)

    @property
    def p_e(self) -> float:
        return self.errors / self.trials


@dataclass
class ErrorCurve:
    config: ScenarioConfig
    geometry: Optional[ClusterGeometry]
    d_th: Optional[float]
    rows: List[CurveRow]

    def write_csv(self, fh) -> None:
        """One row per sample size; floats carry 17 significant digits."""
        cfg = self.config
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in self.rows:
            writer.writerow([
                cfg.family, cfg.metric, cfg.algorithm, _g17(cfg.delta), _g17(cfg.omega),
                row.n, row.trials, row.errors, _g17(row.p_e), _g17(row.bound), cfg.master_seed,
            ])


def _g17(x: float) -> str:
    return f"{x:.17g}"


def build_scenario(cfg: ScenarioConfig):
    """Member distributions in cluster-major, parameter-ascending order, with labels."""
    specs, labels = [], []
    for k in range(1, cfg.K + 1):
        for offset in (-cfg.delta, 0.0, cfg.delta):
            if cfg.family == "gaussian":
                specs.append(Gaussian(k + offset, 1.0))
            else:
                specs.append(Gamma(2.5 * k + 1 + offset, 1.0))
            labels.append(k - 1)
    return specs, np.array(labels)


def partition_matches_truth(result, labels) -> bool:
    """Whether the clustering equals the true partition up to relabeling."""
    assignment = result.assignment if isinstance(result, ClusteringResult) else result
    assignment = np.asarray(assignment)
    labels = np.asarray(labels)
    if assignment.shape != labels.shape:
        raise ValueError("assignment and labels differ in length")
    # Same partition iff the label pairs form a bijection between cluster ids.
    pairs = set(zip(assignment.tolist(), labels.tolist()))
    return len(pairs) == len(set(assignment.tolist())) == len(set(labels.tolist()))


def trial_rng(master_seed: int, n: int, r: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([master_seed, n, r]))


def resolve_geometry(cfg: ScenarioConfig) -> ClusterGeometry:
    """Geometry from the overrides in ``cfg`` or computed from its distributions."""
    if cfg.d_L is not None:
        return ClusterGeometry(cfg.d_L, cfg.d_H)
    specs, labels = build_scenario(cfg)
    return _scenario_geometry(tuple(specs), tuple(labels.tolist()), cfg.distance_metric())


@lru_cache(maxsize=32)
def _scenario_geometry(specs, labels, metric) -> ClusterGeometry:
    return cluster_geometry(specs, labels, metric)


def run_algorithm(D: np.ndarray, cfg: ScenarioConfig, d_th: Optional[float]) -> ClusteringResult:
    if cfg.algorithm == "known":
        return cluster_known_k(D, cfg.K, cfg.max_iters)
    if cfg.algorithm == "merge":
        return cluster_merge_based(D, d_th, cfg.max_iters)
    return cluster_split_based(D, d_th, cfg.max_iters)


def run_trial(cfg: ScenarioConfig, specs: Sequence, labels: np.ndarray, d_th, n: int, r: int) -> Tuple[bool, int]:
    """One trial: sample, shuffle, cluster and judge. Returns (correct, k_hat)."""
    rng = trial_rng(cfg.master_seed, n, r)
    seqs = [spec.sample(n, rng) for spec in specs]
    order = rng.permutation(len(seqs))
    D = pairwise_distance_matrix([seqs[i] for i in order], cfg.distance_metric())
    result = run_algorithm(D, cfg, d_th)
    return partition_matches_truth(result, labels[order]), result.k_hat


def _run_block(args):
    cfg, specs, labels, d_th, n, rs = args
    out = []
    for r in rs:
        try:
            out.append(run_trial(cfg, specs, labels, d_th, n, r))
        except Exception as exc:
            raise RuntimeError(f"trial failed (n={n}, r={r}, seed={cfg.master_seed}): {exc}") from exc
    return out


def run_trials(cfg: ScenarioConfig, workers: int = 1, block: int = 50) -> ErrorCurve:
    """Estimate the error probability at every sample size in ``cfg.n_list``.

    The reported bound uses ``T = cfg.max_iters`` and the scenario's ``delta``
    (NaN when the clusters are not separated). Results do not depend on
    ``workers``.
    """
    specs, labels = build_scenario(cfg)
    geom = resolve_geometry(cfg)
    d_th = cfg.d_th
    if cfg.algorithm != "known" and d_th is None:
        d_th = threshold_from_omega(geom, cfg.omega).d_th
    log.info("geometry d_L=%.6g d_H=%.6g d_th=%s", geom.d_L, geom.d_H, d_th)

    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    rows = []
    try:
        for n in cfg.n_list:
            jobs = [
                (cfg, specs, labels, d_th, n, range(start, min(start + block, cfg.trials)))
                for start in range(0, cfg.trials, block)
            ]
            blocks = pool.map(_run_block, jobs) if pool else map(_run_block, jobs)
            outcomes = [o for chunk in blocks for o in chunk]
            errors = sum(not correct for correct, _ in outcomes)
            histogram = dict(sorted(Counter(k for _, k in outcomes).items()))
            if geom.separated:
                bound = error_bound(
                    cfg.algorithm, cfg.distance_metric(), cfg.M, cfg.max_iters, n, geom.delta,
                    cfg.distance_metric().kernel_bound,
                ).value
            else:
                bound = float("nan")
            rows.append(CurveRow(n, cfg.trials, errors, bound, histogram))
            log.info("n=%d errors=%d/%d k_hat=%s", n, errors, cfg.trials, histogram)
    finally:
        if pool is not None:
            pool.shutdown()
    return ErrorCurve(cfg, geom, d_th, rows)


def decay_slope(ns: Sequence[float], p_es: Sequence[float]) -> Optional[float]:
    """Least-squares slope of ``log p_e`` against ``n`` over the nonzero points.

    Returns None when fewer than two points are nonzero.
    """
    pts = [(n, p) for n, p in zip(ns, p_es) if p > 0]
    if len(pts) < 2:
        return None
    x, y = np.array(pts, dtype=float).T
    return float(np.polyfit(x, np.log(y), 1)[0])

