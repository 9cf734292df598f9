import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as nps

from dbscanpp.spatial import build_index, nearest_many, nearest_within, range_count, range_query
from oracles import brute_nearest, brute_range


def point_clouds(max_n=60, max_d=4):
    # a coarse coordinate lattice makes ties and duplicates common
    return st.integers(1, max_d).flatmap(
        lambda d: nps.arrays(
            np.float64,
            st.tuples(st.integers(1, max_n), st.just(d)),
            elements=st.integers(-8, 8).map(lambda v: v / 4),
        )
    )


def test_single_point_tree():
    idx = build_index([[1.0, 2.0]])
    assert idx.n_nodes == 1
    assert range_query(idx, [1.0, 2.0], 0).tolist() == [0]


def test_hand_range_example():
    idx = build_index([0.0, 0.5, 1.0, 10.0])
    assert range_query(idx, [0.0], 1).tolist() == [0, 1, 2]


def test_duplicates_are_distinct_indices():
    idx = build_index([[1.0], [1.0], [2.0]])
    assert range_query(idx, [1.0], 0).tolist() == [0, 1]


def test_nearest_hand_examples():
    idx = build_index([0.0, 10.0])
    assert nearest_within(idx, [1.0], 2) == (0, 1.0)
    assert nearest_within(idx, [5.0], 1) is None


def test_nearest_tie_goes_to_smallest_index():
    idx = build_index([[3.0], [1.5], [0.5], [1.5]])
    assert nearest_within(idx, [1.0]) == (1, 0.5)


def test_every_point_indexed_once():
    X = np.random.default_rng(0).normal(size=(1000, 3))
    idx = build_index(X)
    assert sorted(idx.perm.tolist()) == list(range(1000))


def test_dimension_mismatch():
    idx = build_index(np.zeros((5, 2)))
    with pytest.raises(ValueError):
        range_query(idx, [0.0], 1)
    with pytest.raises(ValueError):
        nearest_within(idx, [0.0, 0.0, 0.0], 1)
    with pytest.raises(ValueError):
        range_query(idx, [0.0, 0.0], -1)


def test_random_queries_match_linear_scan():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(1000, 3))
    idx = build_index(X)
    for _ in range(500):
        c = rng.normal(size=3) * 1.5
        r = rng.uniform(0, 1.5)
        assert range_query(idx, c, r).tolist() == brute_range(X, c, r).tolist()
        assert nearest_within(idx, c, r) == brute_nearest(X, c, r)


def test_counts_and_cap():
    rng = np.random.default_rng(2)
    X = rng.uniform(size=(300, 2))
    idx = build_index(X)
    full = range_count(idx, X[:20], 0.2)
    assert full.tolist() == [brute_range(X, x, 0.2).size for x in X[:20]]
    capped = range_count(idx, X[:20], 0.2, cap=3)
    assert np.all(capped >= np.minimum(full, 3))
    assert np.all(capped <= full)


def test_nearest_many_marks_misses():
    idx = build_index([[0.0], [4.0]])
    near, dist = nearest_many(idx, [[1.0], [2.0 + 1e-9], [9.0]], radius=2)
    assert near.tolist() == [0, 1, -1]
    assert dist[2] == np.inf


@given(point_clouds(), st.data())
def test_range_query_is_exact(X, data):
    idx = build_index(X, leaf_size=data.draw(st.integers(1, 8)))
    c = X[data.draw(st.integers(0, len(X) - 1))] + data.draw(st.sampled_from([0.0, 0.125]))
    r = data.draw(st.sampled_from([0.0, 0.25, 0.5, 1.0, 3.0]))
    assert range_query(idx, c, r).tolist() == brute_range(X, c, r).tolist()


@given(point_clouds(), st.data())
def test_nearest_is_exact_and_consistent_with_range(X, data):
    idx = build_index(X, leaf_size=data.draw(st.integers(1, 8)))
    q = X[data.draw(st.integers(0, len(X) - 1))] + 0.1
    r = data.draw(st.sampled_from([0.0, 0.2, 0.6, 2.0]))
    got = nearest_within(idx, q, r)
    assert got == brute_nearest(X, q, r)
    assert (got is None) == (range_query(idx, q, r).size == 0)


@given(point_clouds(), st.floats(0, 2), st.floats(0, 2))
def test_range_monotone_in_radius(X, r1, r2):
    r1, r2 = min(r1, r2), max(r1, r2)
    idx = build_index(X)
    small = set(range_query(idx, X[0], r1).tolist())
    assert small <= set(range_query(idx, X[0], r2).tolist())
