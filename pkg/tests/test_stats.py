import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pa_sim import stats
from pa_sim.stats import derive_stream


class TestStreams:
    def test_identical_inputs(self):
        a = derive_stream(42, 7).standard_normal(100)
        b = derive_stream(42, 7).standard_normal(100)
        assert np.array_equal(a, b)

    def test_adjacent_indices_independent(self):
        a = derive_stream(42, 0).standard_normal(100_000)
        b = derive_stream(42, 1).standard_normal(100_000)
        assert abs(np.corrcoef(a, b)[0, 1]) < 0.02

    def test_labels_separate_streams(self):
        a = derive_stream(42, 0, 1).random(10)
        b = derive_stream(42, 0, 2).random(10)
        assert not np.array_equal(a, b)

    def test_full_64_bit_seed(self):
        derive_stream(2**64 - 1, 0).random()

    def test_blocks_cover_trials(self):
        blocks = list(stats.trial_blocks(4500, 2000))
        assert blocks == [(0, 2000), (1, 2000), (2, 500)]
        with pytest.raises(ValueError):
            list(stats.trial_blocks(0))


class TestSummaries:
    def test_ratio_of_means(self):
        s = stats.ratio_of_means([1.0, 3.0], [1.0, 1.0])
        assert s.mean == 2.0 and s.count == 2 and s.half_width >= 0

    def test_ratio_ci_covers_truth(self):
        g = np.random.default_rng(0)
        y = g.exponential(2.0, 20_000)
        d = g.choice([1.0, 3.0], 20_000)
        s = stats.ratio_of_means(y, d)
        assert s.low <= 2.0 / 2.0 <= s.high

    def test_single_sample_degenerate_ci(self):
        s = stats.ratio_of_means([5.0], [2.0])
        assert s.mean == 2.5 and math.isinf(s.half_width)

    def test_infinite_delay(self):
        assert stats.ratio_of_means([0.0, 0.0], [math.inf, math.inf]).mean == 0.0

    def test_mean_ci(self):
        s = stats.mean_ci(np.arange(10.0))
        assert s.mean == 4.5 and s.half_width > 0

    def test_separated(self):
        a, b = stats.SummaryStat(10.0, 1.0, 5), stats.SummaryStat(7.0, 1.5, 5)
        assert a.separated_above(b) and not b.separated_above(a)


class TestEmpiricalCdf:
    def test_order_statistic(self):
        assert stats.empirical_cdf([1, 2, 3, 4], [50])[0.5] == 2.0

    def test_constant(self):
        assert set(stats.empirical_cdf([3.3] * 17).values()) == {3.3}

    def test_exponential_median(self):
        x = np.random.default_rng(1).exponential(size=10_000)
        assert stats.empirical_cdf(x, [50])[0.5] == pytest.approx(math.log(2), abs=0.03)

    def test_levels(self):
        q = stats.empirical_cdf(np.arange(5.0))
        assert list(q) == [k / 100 for k in range(1, 100)]

    def test_empty(self):
        with pytest.raises(ValueError):
            stats.empirical_cdf([])

    @given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=60), st.integers(1, 99))
    def test_matches_ceil_rule(self, xs, p):
        # exact rational ceil(p n / 100)
        k = max(1, math.ceil(p * len(xs) / 100))
        assert stats.empirical_cdf(xs, [p])[p / 100] == sorted(xs)[k - 1]

    @given(st.lists(st.floats(0, 1e3), min_size=1, max_size=60))
    def test_monotone(self, xs):
        v = list(stats.empirical_cdf(xs).values())
        assert all(a <= b for a, b in zip(v, v[1:]))
