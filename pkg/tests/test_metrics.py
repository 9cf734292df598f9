import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.spatial.distance import directed_hausdorff as scipy_directed_hausdorff

from dbscanpp.cluster import dbscan, dbscan_pp
from dbscanpp.core import NOISE, AlgoParams
from dbscanpp.metrics import (
    DensitySpec,
    EvalReport,
    adjusted_mutual_info,
    adjusted_rand_index,
    contingency,
    directed_hausdorff,
    expected_mutual_info,
    hausdorff_distance,
    level_set_ground_truth,
    noise_report,
)
from oracles import brute_ari, permutation_mi

labelings = st.lists(st.integers(-1, 4), min_size=2, max_size=30)


def pair(draw_a, draw_b):
    n = min(len(draw_a), len(draw_b))
    return draw_a[:n], draw_b[:n]


class TestContingency:
    def test_counts(self):
        t = contingency([0, 0, 1, NOISE], [1, 1, 0, 0])
        assert t.counts.tolist() == [[1, 0], [0, 2], [1, 0]]
        assert t.row_sums.tolist() == [1, 2, 1]
        assert t.n == 4

    def test_exclude_noise_drops_either_side(self):
        t = contingency([0, NOISE, 1, 1], [0, 0, NOISE, 1], exclude_noise=True)
        assert t.n == 2

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            contingency([0], [0, 1])


class TestARI:
    def test_four_sevenths_exactly(self):
        assert adjusted_rand_index([0, 0, 1, 1], [0, 0, 1, 2]) == 4 / 7
        assert Fraction(adjusted_rand_index([0, 0, 1, 1], [0, 0, 1, 2])).limit_denominator(100) == Fraction(4, 7)

    def test_identical_and_permuted(self):
        assert adjusted_rand_index([0, 1, 1, 2], [0, 1, 1, 2]) == 1.0
        assert adjusted_rand_index([0, 1, 1, 2], [5, 3, 3, 0]) == 1.0

    def test_all_singletons_both_sides(self):
        assert adjusted_rand_index([0, 1, 2], [2, 1, 0]) == 1.0

    def test_needs_two_points(self):
        with pytest.raises(ValueError):
            adjusted_rand_index([0], [0])

    @given(labelings, labelings)
    def test_matches_pair_enumeration(self, a, b):
        a, b = pair(a, b)
        try:
            ref = brute_ari(a, b)
        except ZeroDivisionError:
            # degenerate: both sides all-singletons or single-cluster
            ref = 1.0
        assert adjusted_rand_index(a, b) == pytest.approx(ref, abs=1e-12)

    @given(labelings, labelings)
    def test_symmetric_and_bounded(self, a, b):
        a, b = pair(a, b)
        s = adjusted_rand_index(a, b)
        assert s == adjusted_rand_index(b, a)
        assert s <= 1.0


class TestAMI:
    def test_identical_is_one(self):
        assert adjusted_mutual_info([0, 0, 1, 1, 2], [1, 1, 0, 0, 2]) == pytest.approx(1.0, abs=1e-12)

    def test_single_cluster_both_sides(self):
        assert adjusted_mutual_info([3, 3, 3], [0, 0, 0]) == 1.0
        assert adjusted_mutual_info([0, 0, 0], [0, 1, 1]) == 0.0

    def test_average_modes(self):
        a, b = [0, 0, 1, 1, 2, 2, 2], [0, 0, 0, 1, 1, 2, 2]
        assert adjusted_mutual_info(a, b, "max") <= adjusted_mutual_info(a, b, "arithmetic")
        with pytest.raises(ValueError):
            adjusted_mutual_info(a, b, "geometric")

    def test_matches_sklearn(self):
        sk = pytest.importorskip("sklearn.metrics")
        rng = np.random.default_rng(0)
        for _ in range(20):
            n = int(rng.integers(5, 200))
            a = rng.integers(-1, 5, n)
            b = rng.integers(-1, 7, n)
            assert adjusted_mutual_info(a, b, "max") == pytest.approx(
                sk.adjusted_mutual_info_score(a, b, average_method="max"), abs=1e-10
            )
            assert adjusted_mutual_info(a, b, "arithmetic") == pytest.approx(
                sk.adjusted_mutual_info_score(a, b, average_method="arithmetic"), abs=1e-10
            )
            assert adjusted_rand_index(a, b) == pytest.approx(sk.adjusted_rand_score(a, b), abs=1e-12)

    @pytest.mark.parametrize("seed", range(3))
    def test_expected_mi_against_permutations(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.integers(0, 3, 12)
        b = rng.integers(0, 4, 12)
        samples = permutation_mi(a, b, 20_000, seed)
        se = samples.std(ddof=1) / math.sqrt(samples.size)
        assert abs(expected_mutual_info(contingency(a, b)) - samples.mean()) <= 3 * se

    @given(labelings, labelings)
    def test_symmetric_and_bounded(self, a, b):
        a, b = pair(a, b)
        s = adjusted_mutual_info(a, b)
        assert s == pytest.approx(adjusted_mutual_info(b, a), abs=1e-12)
        assert s <= 1.0 + 1e-12


class TestHausdorff:
    def test_hand_example(self):
        A = [[0.0, 0.0], [1.0, 0.0]]
        B = [[0.0, 0.0], [4.0, 0.0]]
        assert directed_hausdorff(A, B) == 1.0
        assert directed_hausdorff(B, A) == 3.0
        assert hausdorff_distance(A, B) == 3.0

    def test_matches_scipy(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            A = rng.normal(size=(int(rng.integers(1, 80)), 3))
            B = rng.normal(size=(int(rng.integers(1, 80)), 3))
            assert directed_hausdorff(A, B) == pytest.approx(scipy_directed_hausdorff(A, B)[0], rel=1e-12)

    def test_empty_and_mismatch(self):
        with pytest.raises(ValueError):
            hausdorff_distance(np.empty((0, 2)), [[0.0, 0.0]])
        with pytest.raises(ValueError):
            hausdorff_distance([[0.0]], [[0.0, 0.0]])


class TestNoiseReport:
    def test_subset_holds(self):
        X = np.random.default_rng(0).normal(size=(300, 2))
        base = dbscan(X, 0.3, 5)
        pp = dbscan_pp(X, AlgoParams(0.3, 5, 60, "uniform", 1))
        rep = noise_report(base, pp)
        assert rep.subset_holds
        assert rep.n0 <= rep.n1
        assert rep.ratio == 0.2

    def test_rejects_mismatched_params(self):
        X = np.random.default_rng(0).normal(size=(50, 2))
        with pytest.raises(ValueError):
            noise_report(dbscan(X, 0.3, 5), dbscan_pp(X, AlgoParams(0.4, 5, 10)))
        with pytest.raises(ValueError):
            noise_report(dbscan(X, 0.3, 5), dbscan_pp(X, AlgoParams(0.3, 5, 10, assignment="nearest-core")))


class TestLevelSet:
    def test_standard_normal_level_set_is_unit_interval(self):
        spec = DensitySpec("gaussian-mixture", [1.0], [[0.0]], [1.0])
        lam = math.exp(-0.5) / math.sqrt(2 * math.pi)
        pts = level_set_ground_truth(spec, lam * (1 - 1e-12), 0.01)
        assert pts.min() == pytest.approx(-1.0, abs=0.01)
        assert pts.max() == pytest.approx(1.0, abs=0.01)

    def test_lambda_above_peak_is_error(self):
        spec = DensitySpec("gaussian-mixture", [1.0], [[0.0, 0.0]], [1.0])
        with pytest.raises(ValueError, match="empty"):
            level_set_ground_truth(spec, 1.0, 0.1)

    def test_rejects_high_dimension(self):
        spec = DensitySpec("gaussian-mixture", [1.0], [[0.0] * 4], [1.0])
        with pytest.raises(ValueError):
            level_set_ground_truth(spec, 0.01, 0.5)

    @pytest.mark.parametrize("family", ["gaussian-mixture", "uniform-mixture"])
    def test_density_integrates_to_one(self, family):
        spec = DensitySpec(family, [0.3, 0.7], [[-2.0, 0.0], [2.0, 1.0]], [1.0, 0.5])
        lo, hi = spec.bounding_box()
        h = 0.02
        xs = np.arange(lo[0], hi[0], h) + h / 2
        ys = np.arange(lo[1], hi[1], h) + h / 2
        grid = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1).reshape(-1, 2)
        assert spec.pdf(grid).sum() * h * h == pytest.approx(1.0, abs=0.01)

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            DensitySpec("laplace", [1.0], [[0.0]], [1.0])
        with pytest.raises(ValueError):
            DensitySpec("gaussian-mixture", [0.5, 0.6], [[0.0], [1.0]], [1.0, 1.0])
        with pytest.raises(ValueError):
            DensitySpec("gaussian-mixture", [1.0], [[0.0]], [0.0])


def test_eval_report_json():
    rep = EvalReport(ari=0.5, n_noise_pp=3, timings_ms={"index": 1.5})
    d = json.loads(rep.to_json())
    assert d["ari"] == 0.5 and d["ami"] is None and d["timings_ms"] == {"index": 1.5}
    assert json.loads(rep.to_json(timings=False))["timings_ms"] is None
