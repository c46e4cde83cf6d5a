import hypothesis.strategies as st
import numpy as np

from gcluster import Distribution, InstanceSpec, Partition, generate


def densify(labels):
    """Map arbitrary labels onto dense ids 0..k-1."""
    _, inverse = np.unique(np.asarray(labels), return_inverse=True)
    return inverse.astype(np.int64)


@st.composite
def small_dataset(draw, min_n=2, max_n=16, max_m=4):
    n = draw(st.integers(min_n, max_n))
    m = draw(st.integers(1, max_m))
    dist = draw(st.sampled_from(list(Distribution)))
    seed = draw(st.integers(0, 2**31 - 1))
    return generate(InstanceSpec(dist, n, m, seed))


@st.composite
def dataset_with_partition(draw, min_n=2, max_n=16, max_m=4):
    ds = draw(small_dataset(min_n=min_n, max_n=max_n, max_m=max_m))
    labels = draw(st.lists(st.integers(0, ds.n - 1), min_size=ds.n, max_size=ds.n))
    return ds, Partition.from_labels(ds, densify(labels))


def random_partition(rng, ds, max_k=None):
    """Uniformly messy valid partition for seeded (non-hypothesis) tests."""
    hi = max_k or ds.n
    k = int(rng.integers(1, hi + 1))
    labels = rng.integers(0, k, size=ds.n)
    return Partition.from_labels(ds, densify(labels))
