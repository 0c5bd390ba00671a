import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import full_sort_v, pair_scan_v, pearson
from corrqcd.corrstats import (
    degree_profile,
    knn_corr_distance,
    knn_corr_distances,
    sample_correlation,
    summary_statistic,
    summary_statistics,
)
from corrqcd.errors import DegenerateInputError, ParameterError


blocks = st.tuples(
    st.integers(0, 2**32 - 1), st.integers(3, 12), st.integers(2, 15)
).map(lambda t: np.random.default_rng(t[0]).standard_normal((t[1], t[2])))


class TestSampleCorrelation:
    def test_affine_copy_is_perfectly_correlated(self, rng):
        x = rng.standard_normal((8, 4))
        x[:, 3] = 2.5 * x[:, 1] - 7.0
        assert sample_correlation(x)[1, 3] == pytest.approx(1.0, abs=1e-10)

    def test_unit_diagonal_symmetric_bounded(self, rng):
        r = sample_correlation(rng.standard_normal((5, 30)))
        np.testing.assert_allclose(np.diag(r), 1.0, atol=1e-12)
        assert np.array_equal(r, r.T)
        assert np.abs(r).max() <= 1.0 + 1e-12

    def test_three_by_two_against_pearson_oracle(self):
        block = np.array([[1.0, 1.0], [2.0, 2.0], [3.0, 4.0]])
        # 3 / sqrt(2 * 14/3), from the direct formula
        expected = 0.9819805060619657
        assert pearson([1, 2, 3], [1, 2, 4]) == pytest.approx(expected, abs=1e-15)
        assert sample_correlation(block)[0, 1] == pytest.approx(expected, abs=1e-12)

    def test_matches_numpy_corrcoef(self, rng):
        x = rng.standard_normal((10, 40))
        np.testing.assert_allclose(sample_correlation(x), np.corrcoef(x, rowvar=False), atol=1e-12)

    def test_zero_variance_column_names_index(self, rng):
        x = rng.standard_normal((6, 5))
        x[:, 3] = 4.2
        with pytest.raises(DegenerateInputError, match="column 3") as info:
            sample_correlation(x)
        assert info.value.column == 3

    @pytest.mark.parametrize("shape", [(2, 5), (5, 1)])
    def test_rejects_too_small_blocks(self, shape):
        with pytest.raises(ParameterError):
            sample_correlation(np.ones(shape))

    def test_rejects_non_finite(self, rng):
        x = rng.standard_normal((5, 4))
        x[2, 1] = np.nan
        with pytest.raises(ParameterError):
            sample_correlation(x)


class TestKnnDistance:
    def test_single_neighbor(self, rng):
        r = sample_correlation(rng.standard_normal((6, 2)))
        assert knn_corr_distance(r, 1, 0) == abs(r[0, 1])

    def test_order_statistic_by_inspection(self):
        r = np.eye(4)
        r[0, 1:] = r[1:, 0] = [0.9, -0.5, 0.1]
        assert knn_corr_distance(r, 2, 0) == 0.5
        assert knn_corr_distance(r, 1, 0) == 0.9
        assert knn_corr_distance(r, 3, 0) == pytest.approx(0.1)

    def test_random_six_by_six_full_sort(self, rng):
        r = sample_correlation(rng.standard_normal((9, 6)))
        for i in range(6):
            brute = sorted((abs(r[i, j]) for j in range(6) if j != i), reverse=True)[2]
            assert knn_corr_distance(r, 3, i) == brute
        np.testing.assert_array_equal(
            knn_corr_distances(r, 3), [knn_corr_distance(r, 3, i) for i in range(6)]
        )

    def test_k_too_large(self, rng):
        r = sample_correlation(rng.standard_normal((5, 4)))
        with pytest.raises(ParameterError):
            knn_corr_distance(r, 4, 0)


class TestSummaryStatistic:
    def test_identical_columns_give_one(self, rng):
        x = rng.standard_normal((7, 6))
        x[:, 4] = x[:, 2]
        assert summary_statistic(x, 1).v == 1.0

    def test_delta_one_matches_pair_scan(self, rng):
        x = rng.standard_normal((4, 5))
        assert summary_statistic(x, 1).v == pytest.approx(pair_scan_v(x), abs=1e-12)

    def test_delta_two_matches_full_sort(self, rng):
        x = rng.standard_normal((4, 5))
        sv = summary_statistic(x, 2)
        assert sv.delta == 2
        assert sv.v == pytest.approx(full_sort_v(x, 2), abs=1e-12)

    def test_batch_matches_single(self, rng):
        x = rng.standard_normal((20, 10, 30))
        for delta in (1, 3):
            single = [summary_statistic(b, delta).v for b in x]
            np.testing.assert_allclose(summary_statistics(x, delta), single, atol=1e-14)


class TestDegreeProfile:
    def test_rho_zero_everything_connected(self, rng):
        r = sample_correlation(rng.standard_normal((6, 7)))
        prof = degree_profile(r, 3, 0.0)
        assert np.all(prof.degrees == 6)
        assert prof.hub_count == 7

    def test_rho_above_max_empty_graph(self, rng):
        r = sample_correlation(rng.standard_normal((6, 7)))
        off = np.abs(r[~np.eye(7, dtype=bool)]).max()
        assert degree_profile(r, 1, min(1.0, off + 1e-9)).hub_count == 0

    def test_double_loop_oracle(self, rng):
        r = sample_correlation(rng.standard_normal((6, 5)))
        prof = degree_profile(r, 2, 0.5)
        degrees = [sum(1 for j in range(5) if j != i and abs(r[i, j]) >= 0.5) for i in range(5)]
        assert list(prof.degrees) == degrees
        assert prof.hub_count == sum(d >= 2 for d in degrees)

    def test_ties_count_as_edges(self):
        r = np.eye(3)
        r[0, 1] = r[1, 0] = 0.5
        assert degree_profile(r, 1, 0.5).hub_count == 2


class TestProperties:
    @settings(max_examples=200, deadline=None)
    @given(block=blocks, data=st.data())
    def test_hub_equivalence(self, block, data):
        p = block.shape[1]
        delta = data.draw(st.integers(1, p - 1))
        r = sample_correlation(block)
        v = summary_statistic(block, delta).v
        rho = data.draw(st.one_of(st.floats(0, 1), st.just(v)))
        assert (v >= rho) == (degree_profile(r, delta, rho).hub_count > 0)

    @settings(max_examples=100, deadline=None)
    @given(block=blocks, data=st.data())
    def test_hub_count_monotone(self, block, data):
        p = block.shape[1]
        r = sample_correlation(block)
        rhos = sorted(data.draw(st.lists(st.floats(0, 1), min_size=2, max_size=5)))
        for delta in range(1, p):
            counts = [degree_profile(r, delta, x).hub_count for x in rhos]
            assert counts == sorted(counts, reverse=True)
        for x in rhos:
            counts = [degree_profile(r, d, x).hub_count for d in range(1, p)]
            assert counts == sorted(counts, reverse=True)

    @settings(max_examples=100, deadline=None)
    @given(block=blocks, seed=st.integers(0, 1000))
    def test_scale_shift_invariance(self, block, seed):
        g = np.random.default_rng(seed)
        p = block.shape[1]
        scaled = block * g.uniform(0.1, 10, p) + g.uniform(-50, 50, p)
        np.testing.assert_allclose(sample_correlation(scaled), sample_correlation(block), atol=1e-10)
        assert summary_statistic(scaled).v == pytest.approx(summary_statistic(block).v, abs=1e-10)

    @settings(max_examples=100, deadline=None)
    @given(block=blocks, seed=st.integers(0, 1000))
    def test_permutation_invariance(self, block, seed):
        perm = np.random.default_rng(seed).permutation(block.shape[1])
        for delta in (1, block.shape[1] - 1):
            a = summary_statistic(block, delta).v
            b = summary_statistic(block[:, perm], delta).v
            assert a == b
