"""k-medoids clustering with a known number of clusters.

Everything here works on a precomputed pairwise distance matrix. Ties in every
argmin/argmax are broken by the lowest index, so results are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

DEFAULT_MAX_ITERS = 100

# Called as trace(stage, objective) after every half-step of a clustering loop.
Trace = Optional[Callable[[str, float], None]]


@dataclass
class ClusteringResult:
    """Partition found by one of the clustering algorithms.

    ``assignment[i]`` is the cluster id of sequence ``i`` and
    ``medoids[l]`` the sequence index at the center of cluster ``l``.
    ``empty_cluster_repaired`` is set when a cluster came out empty and its
    medoid was kept as a singleton member.
    """

    assignment: np.ndarray
    medoids: List[int]
    iterations: int
    converged: bool
    empty_cluster_repaired: bool = False
    history: List[float] = field(default_factory=list, repr=False)

    @property
    def k_hat(self) -> int:
        return len(self.medoids)

    def clusters(self) -> List[List[int]]:
        return [np.flatnonzero(self.assignment == l).tolist() for l in range(self.k_hat)]


def _as_matrix(D) -> np.ndarray:
    D = np.asarray(D, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValueError(f"distance matrix must be square, got shape {D.shape}")
    return D


def objective(D: np.ndarray, assignment: np.ndarray, medoids: Sequence[int]) -> float:
    """Sum over sequences of the distance to their cluster's medoid."""
    centers = np.asarray(medoids)[assignment]
    return float(D[np.arange(len(assignment)), centers].sum())


def farthest_first(D: np.ndarray, centers: List[int], stop: Callable[[int, float], bool]) -> List[int]:
    """Extend ``centers`` by farthest-first traversal.

    Before each addition ``stop(len(centers), gap)`` is consulted, where
    ``gap`` is the largest distance from a non-center sequence to its nearest
    center; the sequence attaining it becomes the next center.
    """
    centers = list(centers)
    M = D.shape[0]
    nearest = D[centers].min(axis=0)
    while len(centers) < M:
        free = np.ones(M, dtype=bool)
        free[centers] = False
        candidates = np.flatnonzero(free)
        best = candidates[np.argmax(nearest[candidates])]
        if stop(len(centers), nearest[best]):
            break
        centers.append(int(best))
        nearest = np.minimum(nearest, D[best])
    return centers


def init_centers_known_k(D, K: int) -> List[int]:
    """Farthest-first initial centers, starting from sequence 0."""
    D = _as_matrix(D)
    if not 1 <= K <= D.shape[0]:
        raise ValueError(f"K={K} outside [1, {D.shape[0]}]")
    return farthest_first(D, [0], lambda count, _gap: count >= K)


def assign_to_centers(D, centers: Sequence[int], current: Optional[np.ndarray] = None) -> np.ndarray:
    """Assign every sequence to a center; returns center positions.

    Without ``current`` each sequence goes to its nearest center, ties to the
    lowest position. With ``current`` (the cluster update step) a sequence
    only moves when another center is strictly closer than its present one,
    and every center is placed in its own cluster.
    """
    D = _as_matrix(D)
    centers = np.asarray(centers, dtype=int)
    if centers.size == 0:
        raise ValueError("need at least one center")
    if np.any(centers < 0) or np.any(centers >= D.shape[0]):
        raise IndexError(f"center index out of range: {centers.tolist()}")
    if len(set(centers.tolist())) != centers.size:
        raise ValueError("centers must be distinct")
    to_centers = D[:, centers]
    nearest = np.argmin(to_centers, axis=1)
    if current is None:
        return nearest
    rows = np.arange(D.shape[0])
    current = np.asarray(current, dtype=int)
    improves = to_centers[rows, nearest] < to_centers[rows, current]
    updated = np.where(improves, nearest, current)
    updated[centers] = np.arange(centers.size)
    return updated


def update_medoids(D, assignment: np.ndarray, k: Optional[int] = None) -> List[int]:
    """Per cluster, the member with the smallest within-cluster distance sum."""
    D = _as_matrix(D)
    assignment = np.asarray(assignment, dtype=int)
    k = int(assignment.max()) + 1 if k is None else k
    medoids = []
    for l in range(k):
        members = np.flatnonzero(assignment == l)
        if members.size == 0:
            raise ValueError(f"cluster {l} is empty")
        sums = D[np.ix_(members, members)].sum(axis=1)
        medoids.append(int(members[np.argmin(sums)]))
    return medoids


def repair_empty(assignment: np.ndarray, centers: Sequence[int]) -> bool:
    """Keep every center in its own cluster when some cluster came out empty.

    Happens only when a center sits at distance zero (or less, for MMD^2)
    from a lower-position center. Modifies ``assignment`` in place and
    returns whether a repair was made.
    """
    counts = np.bincount(assignment, minlength=len(centers))
    if np.all(counts > 0):
        return False
    assignment[np.asarray(centers, dtype=int)] = np.arange(len(centers))
    return True


def _record(trace: Trace, history: list, stage: str, D, assignment, medoids):
    value = objective(D, assignment, medoids)
    history.append(value)
    if trace is not None:
        trace(stage, value)


def cluster_known_k(D, K: int, max_iters: int = DEFAULT_MAX_ITERS, trace: Trace = None) -> ClusteringResult:
    """Alternate center and cluster updates until nothing changes.

    The objective (sum of distances to medoids) never increases across a
    half-step; ``trace`` sees its value after initialization and after each
    center update and cluster update.
    """
    D = _as_matrix(D)
    if max_iters < 1:
        raise ValueError("max_iters must be positive")
    medoids = init_centers_known_k(D, K)
    assignment = assign_to_centers(D, medoids)
    repaired = repair_empty(assignment, medoids)
    history: list = []
    _record(trace, history, "init", D, assignment, medoids)

    converged = False
    iterations = 0
    while iterations < max_iters:
        before = (assignment.copy(), list(medoids))
        medoids = update_medoids(D, assignment, K)
        _record(trace, history, "center", D, assignment, medoids)
        assignment = assign_to_centers(D, medoids, current=assignment)
        _record(trace, history, "cluster", D, assignment, medoids)
        iterations += 1
        if medoids == before[1] and np.array_equal(assignment, before[0]):
            converged = True
            break
    return ClusteringResult(assignment, medoids, iterations, converged, repaired, history)
