import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gcluster import (
    Dataset,
    Partition,
    SolverError,
    evaluate,
    gc_brute_force,
    generate,
    kmeans,
    kmeans_gc,
    pmedian_greedy,
    pmedian_local_search,
    r2,
    standardize,
)
from gcluster.dataset import Distribution, InstanceSpec

from conftest import small_dataset


def three_point_line():
    return Dataset(np.array([[0.0], [0.0], [3.0]]))


def medoid_cost(ds, medoids):
    dists = np.stack(
        [np.linalg.norm(ds.values - ds.values[c], axis=1) for c in medoids], axis=1
    )
    return float(dists.min(axis=1).sum())


def test_greedy_one_median():
    sol = pmedian_greedy(three_point_line(), 1)
    assert sol.medoids == [0]  # cost 3 beats element 3's cost 6
    assert math.isclose(sol.total_cost, 3.0)


def test_greedy_two_medoids():
    sol = pmedian_greedy(three_point_line(), 2)
    assert sorted(sol.medoids) == [0, 2]
    assert sol.total_cost == 0.0


def test_greedy_saturated():
    ds = three_point_line()
    sol = pmedian_greedy(ds, ds.n)
    assert sorted(sol.medoids) == [0, 1, 2]
    assert sol.total_cost == 0.0
    assert sol.candidates == []


def test_greedy_rejects_bad_p():
    ds = three_point_line()
    for p in (0, 4, -1):
        with pytest.raises(ValueError):
            pmedian_greedy(ds, p)


def test_greedy_cost_matches_recomputation():
    ds = generate(InstanceSpec(Distribution.NORMAL01, 40, 3, 2))
    sol = pmedian_greedy(ds, 5)
    assert math.isclose(sol.total_cost, medoid_cost(ds, sol.medoids), rel_tol=1e-9)
    assert len(set(sol.medoids)) == 5
    assert len(sol.candidates) <= 10


def test_local_search_fixed_point():
    ds = three_point_line()
    sol = pmedian_greedy(ds, 2)  # already optimal, cost 0
    out = pmedian_local_search(ds, sol)
    assert out.medoids == sol.medoids


def test_local_search_beats_greedy_and_respects_optimum():
    for seed in range(6):
        ds = generate(InstanceSpec(Distribution.UNIFORM, 8, 2, seed))
        greedy = pmedian_greedy(ds, 2)
        improved = pmedian_local_search(ds, greedy)
        assert improved.total_cost <= greedy.total_cost + 1e-12
        best = min(
            medoid_cost(ds, pair) for pair in itertools.combinations(range(8), 2)
        )
        assert improved.total_cost >= best - 1e-7
        assert math.isclose(
            improved.total_cost, medoid_cost(ds, improved.medoids), rel_tol=1e-9
        )


def test_kmeans_hand_example():
    ds = three_point_line()
    sol = pmedian_local_search(ds, pmedian_greedy(ds, 2))
    init = Partition.from_labels(ds, sol.assignment)
    res = kmeans(ds, 2, init)
    assert res.converged
    assert res.partition.assignment[0] == res.partition.assignment[1]
    assert evaluate(ds, res.partition).ssw == 0.0


def test_kmeans_fixed_point():
    ds = generate(InstanceSpec(Distribution.NORMAL01, 30, 2, 9))
    first = kmeans(ds, 4, Partition.from_labels(ds, np.arange(30) % 4))
    again = kmeans(ds, 4, first.partition)
    assert again.converged and again.iterations == 1
    assert np.array_equal(again.partition.assignment, first.partition.assignment)


def test_kmeans_requires_matching_k():
    ds = three_point_line()
    with pytest.raises(ValueError):
        kmeans(ds, 2, Partition.singletons(ds))


@settings(max_examples=25, deadline=None)
@given(small_dataset(min_n=6, max_n=16, max_m=3), st.integers(2, 4))
def test_kmeans_sse_non_increasing(ds, k):
    if k >= ds.n:
        return
    init = Partition.from_labels(ds, np.arange(ds.n) % k)
    seen = []
    kmeans(ds, k, init, on_iteration=lambda it, sse: seen.append(sse))
    assert all(a >= b - 1e-9 for a, b in zip(seen, seen[1:]))


def test_kmeans_empty_cluster_repair_keeps_k():
    # symmetric init: both centroids coincide, so one cluster would empty
    ds = Dataset(np.array([[0.0], [1.0], [2.0], [3.0]]))
    init = Partition.from_labels(ds, [0, 1, 1, 0])
    res = kmeans(ds, 2, init)
    assert res.partition.k == 2
    assert (res.partition.sizes >= 1).all()


def test_kmeans_gc_hand_example():
    ds = three_point_line()
    p = kmeans_gc(ds, 0.5)
    assert p.k == 2
    assert abs(r2(ds, p) - 1.0) <= 1e-12


def test_kmeans_gc_rejects_bad_threshold():
    ds = three_point_line()
    with pytest.raises(SolverError):
        kmeans_gc(ds, 1.0)


def test_kmeans_gc_probe_log_and_feasibility():
    ds = standardize(generate(InstanceSpec(Distribution.NORMAL01, 40, 3, 4)))
    probes = []
    p = kmeans_gc(ds, 0.7, on_probe=probes.append)
    assert r2(ds, p) >= 0.7 - 1e-12
    assert all(1 < probe.k < ds.n for probe in probes)
    feasible = [probe for probe in probes if probe.feasible]
    assert feasible, "bisection should have probed at least one feasible k"
    assert p.k == feasible[-1].k


def test_kmeans_gc_is_deterministic():
    ds = standardize(generate(InstanceSpec(Distribution.UNIFORM, 50, 3, 8)))
    p1 = kmeans_gc(ds, 0.6)
    p2 = kmeans_gc(ds, 0.6)
    assert np.array_equal(p1.assignment, p2.assignment)


def test_kmeans_gc_sandwich_against_oracle_n8():
    for seed in range(5):
        ds = standardize(generate(InstanceSpec(Distribution.UNIFORM, 8, 2, seed)))
        oracle = gc_brute_force(ds, 0.6)
        p = kmeans_gc(ds, 0.6)
        assert p.k >= oracle.optimal_k
        assert evaluate(ds, p).r2 >= 0.6 - 1e-12


def test_kmeans_gc_near_one_threshold():
    ds = Dataset(np.array([[0.0], [1.0], [2.0], [3.0]]))
    p = kmeans_gc(ds, 0.999999)
    assert r2(ds, p) >= 0.999999 - 1e-12
