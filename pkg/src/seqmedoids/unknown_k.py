"""Clustering with an unknown number of clusters, driven by a distance threshold."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .kmedoids import (
    DEFAULT_MAX_ITERS,
    ClusteringResult,
    Trace,
    _as_matrix,
    _record,
    assign_to_centers,
    farthest_first,
    repair_empty,
    update_medoids,
)


@dataclass(frozen=True)
class ThresholdConfig:
    """Threshold ``d_th`` separating intra- from inter-cluster distances.

    ``omega`` records the interpolation weight when ``d_th`` was derived as
    ``omega * d_L + (1 - omega) * d_H``; it is None for a direct threshold.
    """

    d_th: float
    omega: Optional[float] = None

    def __post_init__(self):
        if not np.isfinite(self.d_th):
            raise ValueError("threshold must be finite")


def _threshold(th) -> float:
    return th.d_th if isinstance(th, ThresholdConfig) else float(th)


def merge_init(D, th) -> Tuple[List[int], np.ndarray]:
    """Add farthest-first centers until every sequence is within ``d_th`` of one.

    Starts from sequence 0 and stops as soon as the largest distance from a
    sequence to its nearest center is at most ``d_th``; then assigns every
    sequence to its nearest center.
    """
    centers, assignment, _ = _merge_init(_as_matrix(D), _threshold(th))
    return centers, assignment


def _merge_init(D: np.ndarray, d_th: float):
    centers = farthest_first(D, [0], lambda _count, gap: not gap > d_th)
    assignment = assign_to_centers(D, centers)
    repaired = repair_empty(assignment, centers)
    return centers, assignment, repaired


def merge_centers(D, centers, assignment, th) -> Tuple[List[int], np.ndarray]:
    """Merge clusters whose centers are within ``d_th`` of each other.

    Center pairs are scanned in position order ``k1 < k2``; the first pair
    within the threshold is merged and the scan restarts. Of the two centers,
    ``c_k2`` survives when the members of ``C_k1`` are closer in total to
    ``c_k2`` than the members of ``C_k2`` are to ``c_k1``; otherwise ``c_k1``
    survives.
    """
    D = _as_matrix(D)
    d_th = _threshold(th)
    centers = list(centers)
    assignment = np.array(assignment, dtype=int)
    merged = True
    while merged:
        merged = False
        for k1 in range(len(centers)):
            for k2 in range(k1 + 1, len(centers)):
                c1, c2 = centers[k1], centers[k2]
                if D[c1, c2] > d_th:
                    continue
                into_c2 = D[c2, assignment == k1].sum()
                into_c1 = D[c1, assignment == k2].sum()
                keep, drop = (k2, k1) if into_c2 < into_c1 else (k1, k2)
                assignment[assignment == drop] = keep
                del centers[drop]
                assignment[assignment > drop] -= 1
                merged = True
                break
            if merged:
                break
    return centers, assignment


def cluster_merge_based(
    D, th, max_iters: int = DEFAULT_MAX_ITERS, trace: Trace = None, init_th=None
) -> ClusteringResult:
    """Over-generate centers, then alternate center update, merge and cluster update.

    ``init_th`` optionally overrides the threshold used only while generating
    the initial centers.
    """
    D = _as_matrix(D)
    if max_iters < 1:
        raise ValueError("max_iters must be positive")
    centers, assignment, repaired = _merge_init(D, _threshold(th if init_th is None else init_th))
    history: list = []
    _record(trace, history, "init", D, assignment, centers)

    converged = False
    iterations = 0
    while iterations < max_iters:
        before = (assignment.copy(), list(centers))
        centers = update_medoids(D, assignment, len(centers))
        _record(trace, history, "center", D, assignment, centers)
        centers, assignment = merge_centers(D, centers, assignment, th)
        _record(trace, history, "merge", D, assignment, centers)
        assignment = assign_to_centers(D, centers, current=assignment)
        _record(trace, history, "cluster", D, assignment, centers)
        iterations += 1
        if centers == before[1] and np.array_equal(assignment, before[0]):
            converged = True
            break
    return ClusteringResult(assignment, centers, iterations, converged, repaired, history)


def cluster_split_based(D, th, max_iters: int = DEFAULT_MAX_ITERS, trace: Trace = None) -> ClusteringResult:
    """Start from a single cluster and split off far sequences as new centers.

    A split fires when some sequence is farther than ``d_th`` from its
    cluster's center. The donor cluster is the one holding the largest such
    distance (lowest position on ties) and its farthest member becomes the new
    center. Centers already chosen are never split off again.
    """
    D = _as_matrix(D)
    if max_iters < 1:
        raise ValueError("max_iters must be positive")
    d_th = _threshold(th)
    M = D.shape[0]
    assignment = np.zeros(M, dtype=int)
    centers = update_medoids(D, assignment, 1)
    history: list = []
    _record(trace, history, "init", D, assignment, centers)

    converged = False
    iterations = 0
    while iterations < max_iters:
        before = assignment.copy()
        split = False
        to_center = D[np.arange(M), np.asarray(centers)[assignment]]
        to_center[centers] = -np.inf
        if to_center.max() > d_th:
            per_cluster = [to_center[assignment == l].max() for l in range(len(centers))]
            donor = int(np.argmax(per_cluster))
            members = np.flatnonzero(assignment == donor)
            centers.append(int(members[np.argmax(to_center[members])]))
            split = True
            _record(trace, history, "split", D, assignment, centers)
        assignment = assign_to_centers(D, centers, current=assignment)
        _record(trace, history, "cluster", D, assignment, centers)
        iterations += 1
        if not split and np.array_equal(assignment, before):
            converged = True
            break
    return ClusteringResult(assignment, centers, iterations, converged, False, history)
