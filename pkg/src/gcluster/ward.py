"""Greedy agglomeration stopped at the R^2 threshold.

Starting from singletons (R^2 = 1), repeatedly apply the pair merge with the
smallest R^2 loss; stop just before the ratio would fall below the target.
Since every merge can only lower R^2, the last feasible partition in the
sequence is the answer, and a warm-start variant lets a caller resume the
same loop from any feasible partition.

Candidate merges live in a min-heap with lazy invalidation: each heap entry
remembers the version of both group slots it was computed for, and entries
whose slots have since changed are discarded on pop. After a merge only the
O(k) pairs touching the changed slots are recomputed.
"""

from __future__ import annotations

import heapq
from typing import Callable, NamedTuple

import numpy as np

from . import stats
from .dataset import Dataset
from .errors import InfeasibleStartError, SolverError
from .stats import Partition

# Guard band for "R^2 >= threshold" so exact-boundary merges are kept.
THRESHOLD_EPS = 1e-12


class MergeCandidate(NamedTuple):
    """Heap entry: R^2 drop of merging slots a < b, stamped with the slot
    versions at computation time. Tuple order gives min-delta first and the
    lexicographically smallest (a, b) among ties."""

    delta: float
    a: int
    b: int
    stamp_a: int
    stamp_b: int


# Called once per loop iteration with (partition, a, b, delta, applied);
# applied=False marks the final probe that would have broken the threshold.
StepCallback = Callable[[Partition, int, int, float, bool], None]


def _check_r2t(r2t: float) -> None:
    if not 0.0 < r2t < 1.0:
        raise SolverError(f"threshold must lie strictly inside (0, 1), got {r2t}")


def _drops_vs(p: Partition, g: int, others: np.ndarray) -> np.ndarray:
    """R^2 drop (unnormalized by SST) for merging g with each id in ``others``."""
    sg = float(p.sizes[g])
    so = p.sizes[others].astype(np.float64)
    diff = p.sums[others] / so[:, None] - p.sums[g] / sg
    return so * sg / (so + sg) * np.einsum("ij,ij->i", diff, diff)


def best_merge_scan(ds: Dataset, p: Partition) -> MergeCandidate:
    """Exhaustive reference scan over all k(k-1)/2 pairs.

    Returns the minimum-delta candidate with the lexicographic (a, b)
    tie-break. This is the slow mirror of the heap-based selection and is
    kept for verification.
    """
    if p.k < 2:
        raise ValueError("need at least two groups to merge")
    total = stats.sst(ds).total
    best: MergeCandidate | None = None
    for g in range(p.k - 1):
        others = np.arange(g + 1, p.k)
        drops = _drops_vs(p, g, others)
        for o, drop in zip(others, drops):
            cand = MergeCandidate(float(drop) / total, g, int(o), 0, 0)
            if best is None or cand < best:
                best = cand
    assert best is not None
    return best


# Heap entries are bare (delta, a, b, stamp_a, stamp_b) tuples; the
# MergeCandidate shape, but cheaper to build by the million.


def _push_pairs(heap, p: Partition, total: float, g: int, versions) -> None:
    others = np.concatenate([np.arange(g), np.arange(g + 1, p.k)])
    if len(others) == 0:
        return
    drops = _drops_vs(p, g, others)
    vg = versions[g]
    push = heapq.heappush
    for o, drop in zip(others.tolist(), (drops / total).tolist()):
        if g < o:
            push(heap, (drop, g, o, vg, versions[o]))
        else:
            push(heap, (drop, o, g, versions[o], vg))


def _initial_heap(p: Partition, total: float) -> list[tuple]:
    entries: list[tuple] = []
    for g in range(p.k - 1):
        others = np.arange(g + 1, p.k)
        drops = _drops_vs(p, g, others)
        entries.extend(
            (drop, g, o, 0, 0)
            for o, drop in zip(others.tolist(), (drops / total).tolist())
        )
    heapq.heapify(entries)
    return entries


def _pop_valid(heap, versions, k: int) -> tuple:
    pop = heapq.heappop
    while heap:
        cand = pop(heap)
        if (
            cand[2] < k
            and versions[cand[1]] == cand[3]
            and versions[cand[2]] == cand[4]
        ):
            return cand
    raise AssertionError("candidate heap exhausted with k > 1")


def _agglomerate(
    ds: Dataset, p: Partition, r2t: float, on_step: StepCallback | None
) -> Partition:
    total = stats.sst(ds).total
    heap = _initial_heap(p, total)
    versions = [0] * p.k
    current_r2 = p.ssb / total
    while p.k > 1:
        delta, a, b, _, _ = _pop_valid(heap, versions, p.k)
        if current_r2 - delta < r2t - THRESHOLD_EPS:
            if on_step is not None:
                on_step(p, a, b, delta, False)
            break
        if on_step is not None:
            on_step(p, a, b, delta, True)
        old_k = p.k
        p = stats.apply_merge(ds, p, a, b)
        current_r2 = p.ssb / total

        g, v, last = a, b, old_k - 1
        versions[g] += 1
        if v != last:
            versions[v] += 1
        versions.pop()
        _push_pairs(heap, p, total, g, versions)
        if v != last:
            _push_pairs(heap, p, total, v, versions)
    return p


def wards_gc(ds: Dataset, r2t: float, on_step: StepCallback | None = None) -> Partition:
    """Minimum-cluster-count greedy agglomeration meeting ``r2t``.

    Starts from all singletons and returns the last partition in the merge
    sequence whose R^2 is still >= r2t (singletons themselves in the extreme
    case where the very first merge would already violate the threshold).
    """
    _check_r2t(r2t)
    stats.sst(ds)  # raises on degenerate data before any work happens
    return _agglomerate(ds, Partition.singletons(ds), r2t, on_step)


def wards_gc_from(
    ds: Dataset, start: Partition, r2t: float, on_step: StepCallback | None = None
) -> Partition:
    """Same loop as :func:`wards_gc` but seeded at ``start``.

    The seed must itself satisfy the threshold; the result never has more
    groups than the seed.
    """
    _check_r2t(r2t)
    start_r2 = stats.r2(ds, start)
    if start_r2 < r2t - THRESHOLD_EPS:
        raise InfeasibleStartError(
            f"warm start has R^2={start_r2:.6f} < threshold {r2t}"
        )
    return _agglomerate(ds, start.copy(), r2t, on_step)
