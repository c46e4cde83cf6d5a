"""Variance bookkeeping over partitions.

All solver decisions reduce to sums of squares: SST (total), SSB (between
groups), SSW (within groups), with R^2 = SSB/SST. A :class:`Partition`
carries per-group sizes and attribute sums, which is enough to evaluate
merges and removals exactly in O(m) without touching the data matrix:

* merging groups A and B lowers SSB by |A||B|/(|A|+|B|) * ||c_A - c_B||^2
* isolating element b from group A raises SSB by |A|/(|A|-1) * ||c_A - x_b||^2

where c_* are group centroids. These two identities are what the greedy
agglomeration and the shaking step are built on; tests verify them against
from-scratch recomputation.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import DegenerateDataError

# Agreement required between incrementally maintained and recomputed sums.
REL_TOL = 1e-9
# Incremental SSB is resynced from scratch after this many updates to keep
# floating-point drift bounded on long merge sequences.
SSB_RESYNC_INTERVAL = 4096


@dataclass(frozen=True)
class SstSummary:
    """Total variance of a dataset: grand total, per attribute, and which
    attributes are degenerate (zero variance)."""

    total: float
    per_attribute: np.ndarray
    column_means: np.ndarray
    degenerate_attributes: np.ndarray  # bool mask, length m


_SST_CACHE: "weakref.WeakKeyDictionary[Dataset, SstSummary]" = weakref.WeakKeyDictionary()


def sst(ds: Dataset) -> SstSummary:
    """Per-attribute and total sum of squares around the grand mean.

    Cached per Dataset instance. Raises :class:`DegenerateDataError` when all
    rows are identical (SST = 0 makes R^2 undefined).
    """
    cached = _SST_CACHE.get(ds)
    if cached is not None:
        return cached
    means = ds.values.mean(axis=0)
    per = np.sum((ds.values - means) ** 2, axis=0)
    scale = np.maximum(np.abs(ds.values).max(axis=0), 1.0)
    degenerate = per <= (1e-12 * scale) ** 2 * ds.n
    total = float(per.sum())
    if bool(degenerate.all()):
        raise DegenerateDataError("all rows identical: SST is 0, R^2 undefined")
    per.setflags(write=False)
    means.setflags(write=False)
    degenerate.setflags(write=False)
    summary = SstSummary(total, per, means, degenerate)
    _SST_CACHE[ds] = summary
    return summary


@dataclass(frozen=True)
class GroupStats:
    """One group's size and per-attribute member sums."""

    size: int
    attr_sums: np.ndarray

    @property
    def centroid(self) -> np.ndarray:
        return self.attr_sums / self.size


@dataclass(frozen=True)
class VarianceSummary:
    sst: float
    ssb: float
    ssw: float
    r2: float
    r2_per_attribute: np.ndarray


class Partition:
    """Assignment of n elements to k dense, non-empty groups.

    Stores group statistics as arrays (``sizes`` shape (k,), ``sums`` shape
    (k, m)) so merge/removal updates are vectorized; ``group(q)`` exposes the
    per-group view. ``ssb`` is maintained incrementally by
    :func:`apply_merge`/:func:`apply_removal`.

    Treat instances as values: the update functions return new partitions and
    never mutate their input.
    """

    __slots__ = ("assignment", "sizes", "sums", "ssb", "updates")

    def __init__(self, assignment, sizes, sums, ssb, updates=0):
        self.assignment = assignment
        self.sizes = sizes
        self.sums = sums
        self.ssb = ssb
        self.updates = updates

    @property
    def k(self) -> int:
        return len(self.sizes)

    @property
    def n(self) -> int:
        return len(self.assignment)

    def group(self, q: int) -> GroupStats:
        return GroupStats(int(self.sizes[q]), self.sums[q].copy())

    @property
    def groups(self) -> list[GroupStats]:
        return [self.group(q) for q in range(self.k)]

    def copy(self) -> "Partition":
        return Partition(
            self.assignment.copy(),
            self.sizes.copy(),
            self.sums.copy(),
            self.ssb,
            self.updates,
        )

    @classmethod
    def from_labels(cls, ds: Dataset, labels) -> "Partition":
        """Build a partition (and its stats) from a dense label vector."""
        labels = np.asarray(labels, dtype=np.int64)
        if labels.shape != (ds.n,):
            raise ValueError(f"labels must have shape ({ds.n},), got {labels.shape}")
        if labels.size == 0 or labels.min() < 0:
            raise ValueError("labels must be non-negative")
        k = int(labels.max()) + 1
        sizes = np.bincount(labels, minlength=k)
        if (sizes == 0).any():
            raise ValueError("group ids must be dense 0..k-1 with no empty group")
        sums = np.zeros((k, ds.m), dtype=np.float64)
        np.add.at(sums, labels, ds.values)
        ssb = _ssb_scratch(ds, sizes, sums)
        return cls(labels.copy(), sizes.astype(np.int64), sums, ssb)

    @classmethod
    def singletons(cls, ds: Dataset) -> "Partition":
        return cls.from_labels(ds, np.arange(ds.n, dtype=np.int64))

    @classmethod
    def single_group(cls, ds: Dataset) -> "Partition":
        return cls.from_labels(ds, np.zeros(ds.n, dtype=np.int64))

    def validate(self, ds: Dataset) -> None:
        """Check structural invariants plus the cached-SSB agreement."""
        assert self.assignment.shape == (ds.n,)
        assert self.k >= 1 and (self.sizes >= 1).all()
        assert int(self.sizes.sum()) == ds.n
        counts = np.bincount(self.assignment, minlength=self.k)
        assert (counts == self.sizes).all(), "sizes disagree with assignment"
        expect = np.zeros((self.k, ds.m))
        np.add.at(expect, self.assignment, ds.values)
        assert np.allclose(expect, self.sums, rtol=1e-9, atol=1e-9)
        scratch = _ssb_scratch(ds, self.sizes, self.sums)
        assert math.isclose(self.ssb, scratch, rel_tol=REL_TOL, abs_tol=1e-9)


def _ssb_scratch(ds: Dataset, sizes: np.ndarray, sums: np.ndarray) -> float:
    means = sst(ds).column_means
    cent = sums / sizes[:, None]
    per_j = ((cent - means) ** 2 * sizes[:, None]).sum(axis=0)
    return float(per_j.sum())


def r2(ds: Dataset, p: Partition) -> float:
    """R^2 of a partition from its incrementally maintained SSB."""
    return p.ssb / sst(ds).total


def evaluate(ds: Dataset, p: Partition) -> VarianceSummary:
    """From-scratch SSB/SSW/R^2 plus the per-attribute R^2_j vector.

    SSB and SSW are computed independently (not via SST - SSB), so the
    identity SSB + SSW = SST is a meaningful cross-check on any result.
    Degenerate attributes report R^2_j = 0.
    """
    s = sst(ds)
    cent = p.sums / p.sizes[:, None]
    ssb_j = ((cent - s.column_means) ** 2 * p.sizes[:, None]).sum(axis=0)
    ssw_j = ((ds.values - cent[p.assignment]) ** 2).sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        r2_j = np.where(s.degenerate_attributes, 0.0, ssb_j / s.per_attribute)
    return VarianceSummary(
        sst=s.total,
        ssb=float(ssb_j.sum()),
        ssw=float(ssw_j.sum()),
        r2=float(ssb_j.sum()) / s.total,
        r2_per_attribute=r2_j,
    )


def _merge_drop(p: Partition, a: int, b: int) -> float:
    """Unnormalized SSB decrease caused by merging groups a and b."""
    sa = float(p.sizes[a])
    sb = float(p.sizes[b])
    diff = p.sums[a] / sa - p.sums[b] / sb
    return sa * sb / (sa + sb) * float(diff @ diff)


def merge_delta(ds: Dataset, p: Partition, a: int, b: int) -> float:
    """Exact R^2 drop from merging groups a and b (always >= 0), in O(m)."""
    if a == b:
        raise ValueError("cannot merge a group with itself")
    return _merge_drop(p, a, b) / sst(ds).total


def apply_merge(ds: Dataset, p: Partition, a: int, b: int) -> Partition:
    """Merge groups a and b, returning a new partition with k-1 groups.

    Re-densification rule: the merged group keeps id min(a, b); the group
    that held the last id moves into the vacated slot max(a, b).
    """
    if a == b:
        raise ValueError("cannot merge a group with itself")
    g, v = (a, b) if a < b else (b, a)
    last = p.k - 1
    drop = _merge_drop(p, a, b)

    assignment = p.assignment.copy()
    assignment[assignment == v] = g
    sizes = p.sizes.copy()
    sums = p.sums.copy()
    sizes[g] += sizes[v]
    sums[g] += sums[v]
    if v != last:
        assignment[p.assignment == last] = v
        sizes[v] = sizes[last]
        sums[v] = sums[last]
    out = Partition(assignment, sizes[:last], sums[:last], p.ssb - drop, p.updates + 1)
    _maybe_resync(ds, out)
    return out


def _removal_gain(ds: Dataset, p: Partition, elem: int) -> float:
    """Unnormalized SSB increase from isolating ``elem`` as a singleton."""
    a = int(p.assignment[elem])
    sa = float(p.sizes[a])
    if sa < 2:
        raise ValueError(f"element {elem} is already in a singleton group")
    diff = p.sums[a] / sa - ds.values[elem]
    return sa / (sa - 1.0) * float(diff @ diff)


def removal_effect(ds: Dataset, p: Partition, elem: int) -> float:
    """Exact R^2 gain from moving ``elem`` into a new singleton group."""
    return _removal_gain(ds, p, elem) / sst(ds).total


def apply_removal(ds: Dataset, p: Partition, elem: int) -> Partition:
    """Isolate ``elem`` into a new group (appended as id k), k+1 groups total."""
    gain = _removal_gain(ds, p, elem)
    a = int(p.assignment[elem])
    row = ds.values[elem]

    assignment = p.assignment.copy()
    assignment[elem] = p.k
    sizes = np.append(p.sizes, 1)
    sizes[a] -= 1
    sums = np.vstack([p.sums, row])
    sums[a] -= row
    out = Partition(assignment, sizes, sums, p.ssb + gain, p.updates + 1)
    _maybe_resync(ds, out)
    return out


def _maybe_resync(ds: Dataset, p: Partition) -> None:
    if p.updates < SSB_RESYNC_INTERVAL:
        return
    scratch = _ssb_scratch(ds, p.sizes, p.sums)
    if not math.isclose(p.ssb, scratch, rel_tol=REL_TOL, abs_tol=1e-9):
        raise AssertionError(
            f"incremental SSB drifted: cached={p.ssb!r} recomputed={scratch!r}"
        )
    p.ssb = scratch
    p.updates = 0
