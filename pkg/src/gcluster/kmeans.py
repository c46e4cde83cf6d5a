"""k-means with a medoid-based warm start, and a bisection driver over k.

The initial partition for Lloyd's iterations comes from a two-stage medoid
construction (greedy opening plus a swap local search, both on plain
Euclidean distance sums). The driver then bisects on the number of groups,
probing each midpoint with the full pipeline, to find the smallest k whose
probe meets the R^2 threshold.

Everything here is deterministic: no randomness, ties broken by lowest index.
Distances are evaluated in chunks so no n x n matrix is ever materialized.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import stats
from .dataset import Dataset
from .errors import SolverError
from .stats import Partition

MAX_LLOYD_ITERATIONS = 999
THRESHOLD_EPS = 1e-12

# Cap on transient distance-tensor size (floats) per chunk.
_BLOCK_BUDGET = 1 << 22


@dataclass
class MedoidSolution:
    """p medoids (data elements), nearest-medoid assignment, total Euclidean
    cost, and the runner-up elements worth trying in the swap search."""

    medoids: list[int]
    assignment: np.ndarray
    total_cost: float
    candidates: list[int]


@dataclass
class KmeansResult:
    partition: Partition
    converged: bool
    iterations: int


@dataclass(frozen=True)
class BisectionProbe:
    """One midpoint probe of the bisection driver (for observability)."""

    k: int
    r2: float
    converged: bool
    feasible: bool


def _chunks(count: int, per_item: int):
    step = max(1, _BLOCK_BUDGET // max(1, per_item))
    for lo in range(0, count, step):
        yield lo, min(count, lo + step)


def _distances(X: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Euclidean distances, shape (len(X), len(targets)). Caller chunks."""
    diff = X[:, None, :] - targets[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def _nearest_two(X: np.ndarray, points: np.ndarray):
    """Nearest and second-nearest of ``points`` for every row of X.

    Returns (nearest_index, nearest_dist, second_dist); second_dist is +inf
    when there is a single point. Ties resolve to the lowest index.
    """
    n, m = X.shape
    nearest = np.zeros(n, dtype=np.int64)
    d1 = np.full(n, np.inf)
    d2 = np.full(n, np.inf)
    rows = np.arange(n)
    for lo, hi in _chunks(len(points), n * m):
        block = _distances(X, points[lo:hi])
        bm = np.argmin(block, axis=1)
        bd1 = block[rows, bm]
        if hi - lo > 1:
            block[rows, bm] = np.inf
            bd2 = block.min(axis=1)
        else:
            bd2 = np.full(n, np.inf)
        better = bd1 < d1
        d2 = np.where(better, np.minimum(d1, bd2), np.minimum(d2, bd1))
        d1 = np.where(better, bd1, d1)
        nearest = np.where(better, bm + lo, nearest)
    return nearest, d1, d2


def _assign_to_medoids(X: np.ndarray, medoids: list[int]):
    """Nearest-medoid assignment and total cost; each medoid is pinned to its
    own slot so every slot stays non-empty even with duplicate points."""
    nearest, d1, _ = _nearest_two(X, X[medoids])
    assignment = nearest.copy()
    assignment[medoids] = np.arange(len(medoids))
    d1 = d1.copy()
    d1[medoids] = 0.0
    return assignment, float(d1.sum())


def pmedian_greedy(ds: Dataset, p: int) -> MedoidSolution:
    """Open p medoids greedily, one per iteration.

    The first medoid minimizes the summed distance to all elements; each
    later iteration opens the element giving the largest cost reduction.
    The opening scores of the final iteration rank the runners-up recorded
    as swap candidates (up to 2p of them).
    """
    n = ds.n
    if not 1 <= p <= n:
        raise ValueError(f"medoid count must be in 1..{n}, got {p}")
    X = ds.values

    medoids: list[int] = []
    d = np.full(n, np.inf)
    last_scores = np.full(n, np.inf)
    for _ in range(p):
        scores = np.empty(n)
        for lo, hi in _chunks(n, n * ds.m):
            block = _distances(X, X[lo:hi])
            scores[lo:hi] = np.minimum(d[:, None], block).sum(axis=0)
        scores[medoids] = np.inf
        chosen = int(np.argmin(scores))
        last_scores = scores
        medoids.append(chosen)
        d = np.minimum(d, _distances(X, X[chosen : chosen + 1])[:, 0])

    taken = set(medoids)
    order = np.argsort(last_scores, kind="stable")
    candidates = [int(i) for i in order if int(i) not in taken][: 2 * p]
    assignment, total = _assign_to_medoids(X, medoids)
    return MedoidSolution(medoids, assignment, total, candidates)


def pmedian_local_search(ds: Dataset, sol: MedoidSolution) -> MedoidSolution:
    """Improve the medoid set by single swaps with the recorded candidates.

    First-improvement scan: replace one medoid by one candidate whenever the
    reassigned total cost strictly decreases; repeat until no swap helps.
    """
    X = ds.values
    medoids = list(sol.medoids)
    p = len(medoids)
    if not sol.candidates or p == len(X):
        return sol

    nearest, d1, d2 = _nearest_two(X, X[medoids])
    cost = float(d1.sum())
    improved = True
    while improved:
        improved = False
        for cand in sol.candidates:
            if cand in medoids:
                continue
            dc = _distances(X, X[cand : cand + 1])[:, 0]
            for pos in range(p):
                fallback = np.where(nearest == pos, d2, d1)
                trial_cost = float(np.minimum(fallback, dc).sum())
                if trial_cost < cost:
                    medoids[pos] = cand
                    nearest, d1, d2 = _nearest_two(X, X[medoids])
                    cost = float(d1.sum())
                    improved = True
                    break
            if improved:
                break
    assignment, total = _assign_to_medoids(X, medoids)
    return MedoidSolution(medoids, assignment, total, list(sol.candidates))


def _nearest_centroid_sq(X: np.ndarray, centroids: np.ndarray):
    """Argmin and min of squared distance to centroids, chunked."""
    n, m = X.shape
    best = np.full(n, np.inf)
    idx = np.zeros(n, dtype=np.int64)
    rows = np.arange(n)
    for lo, hi in _chunks(len(centroids), n * m):
        diff = X[:, None, :] - centroids[None, lo:hi, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        bm = np.argmin(d2, axis=1)
        bd = d2[rows, bm]
        better = bd < best
        idx = np.where(better, bm + lo, idx)
        best = np.where(better, bd, best)
    return idx, best


def kmeans(
    ds: Dataset,
    k: int,
    init: Partition,
    on_iteration: Callable[[int, float], None] | None = None,
) -> KmeansResult:
    """Lloyd iterations from an initial partition with exactly k groups.

    Points are reassigned to the nearest centroid (Euclidean; implemented
    with squared distances, which give the same argmin) until a pass makes
    no reassignment or the iteration cap is hit. A reassignment that would
    empty a group is repaired by reseeding the group with the element
    farthest from its own centroid, so the result always has k non-empty
    groups.

    ``on_iteration`` receives (pass number, SSE after reassignment) once per
    pass; absent repairs the reported SSE never increases.
    """
    if init.k != k:
        raise ValueError(f"init partition has {init.k} groups, expected {k}")
    X = ds.values
    labels = init.assignment.copy()
    converged = False
    iterations = 0
    for _ in range(MAX_LLOYD_ITERATIONS):
        iterations += 1
        sizes = np.bincount(labels, minlength=k)
        centroids = np.zeros((k, ds.m))
        np.add.at(centroids, labels, X)
        centroids /= sizes[:, None]

        new_labels, own_sq = _nearest_centroid_sq(X, centroids)
        if on_iteration is not None:
            on_iteration(iterations, float(own_sq.sum()))
        new_sizes = np.bincount(new_labels, minlength=k)
        for q in np.flatnonzero(new_sizes == 0):
            movable = own_sq.copy()
            movable[new_sizes[new_labels] < 2] = -np.inf
            donor = int(np.argmax(movable))
            new_sizes[new_labels[donor]] -= 1
            new_labels[donor] = q
            new_sizes[q] += 1
            own_sq[donor] = 0.0  # now alone on its reseeded group

        if np.array_equal(new_labels, labels):
            converged = True
            break
        labels = new_labels
    return KmeansResult(Partition.from_labels(ds, labels), converged, iterations)


def _probe(ds: Dataset, k: int) -> KmeansResult:
    sol = pmedian_local_search(ds, pmedian_greedy(ds, k))
    init = Partition.from_labels(ds, sol.assignment)
    return kmeans(ds, k, init)


def kmeans_gc(
    ds: Dataset,
    r2t: float,
    on_probe: Callable[[BisectionProbe], None] | None = None,
) -> Partition:
    """Smallest feasible k by bisection over the number of groups.

    Maintains R^2(low) < r2t <= R^2(high) with the endpoints seeded
    analytically (one group has R^2 = 0, all singletons R^2 = 1) and probes
    each midpoint with the medoid-seeded k-means pipeline. Returns the
    partition stored at the feasible endpoint.
    """
    if not 0.0 < r2t < 1.0:
        raise SolverError(f"threshold must lie strictly inside (0, 1), got {r2t}")
    total = stats.sst(ds).total
    a, b = 1, ds.n
    best = Partition.singletons(ds)
    while b - a >= 2:
        c = (a + b) // 2
        result = _probe(ds, c)
        r2c = result.partition.ssb / total
        feasible = r2c >= r2t - THRESHOLD_EPS
        if on_probe is not None:
            on_probe(BisectionProbe(c, r2c, result.converged, feasible))
        if feasible:
            b = c
            best = result.partition
        else:
            a = c
    return best
