import numpy as np
import pytest
from hypothesis import given, strategies as st

from predtrade.stats import (Histogram, against_odds_fraction, interquartile_range, ks_distance,
                             mean_stderr)


def test_against_odds_examples():
    assert against_odds_fraction([1, 2, 3]) == 0.0
    assert against_odds_fraction([-1, 1, 1, -1]) == 0.5
    assert against_odds_fraction([0.0, -0.0]) == 0.0


def test_against_odds_empty():
    with pytest.raises(ValueError):
        against_odds_fraction([])


def test_ks_self_is_zero():
    h = Histogram.of([0.1, 0.5, 0.5, 0.9], 0, 1, 10)
    assert ks_distance(h, h) == 0.0


def test_ks_disjoint_is_one():
    a = Histogram.of([0.1, 0.2], 0, 1, 10)
    b = Histogram.of([0.8, 0.9], 0, 1, 10)
    assert ks_distance(a, b) == 1.0


def test_ks_mismatched_bins():
    with pytest.raises(ValueError):
        ks_distance(Histogram.of([0.1], 0, 1, 10), Histogram.of([0.1], 0, 1, 11))


def test_ks_counts_under_and_overflow():
    a = Histogram.of([-5.0], 0, 1, 4)
    b = Histogram.of([5.0], 0, 1, 4)
    assert ks_distance(a, b) == 1.0


def test_histogram_half_open_bins():
    h = Histogram.of([0.0, 0.25, 0.5, 1.0, -0.1], 0, 1, 4)
    assert h.counts.tolist() == [1, 1, 1, 0]
    assert (h.underflow, h.overflow) == (1, 1)
    assert h.total == 5


def test_mass_below_edge():
    h = Histogram.of([-1.0, -0.5, 0.0, 0.5, 3.0, -9.0], -2, 2, 4)
    assert h.mass_below(0.0) == 3
    with pytest.raises(ValueError):
        h.mass_below(0.3)


def test_interquartile_range():
    assert interquartile_range([1, 2, 3, 4, 5]) == 2.0


def test_mean_stderr():
    m, se = mean_stderr([1.0, 3.0])
    assert m == 2.0 and se == pytest.approx(1.0)
    assert mean_stderr([4.0]) == (4.0, 0.0)


@given(st.lists(st.floats(-100, 100, allow_nan=False), min_size=1, max_size=200))
def test_histogram_preserves_total(values):
    h = Histogram.of(values, -10, 10, 20)
    assert h.total == len(values)
    assert h.mass_below(0.0) == sum(v < 0 for v in values)


@given(st.lists(st.floats(-3, 3, allow_nan=False), min_size=1, max_size=100),
       st.lists(st.floats(-3, 3, allow_nan=False), min_size=1, max_size=100))
def test_ks_symmetric_and_bounded(a, b):
    ha, hb = Histogram.of(a, -2, 2, 8), Histogram.of(b, -2, 2, 8)
    d = ks_distance(ha, hb)
    assert 0.0 <= d <= 1.0
    assert d == ks_distance(hb, ha)


def test_histogram_matches_numpy():
    v = np.random.default_rng(0).normal(size=1000)
    h = Histogram.of(v, -2, 2, 16)
    ref, _ = np.histogram(v[(v >= -2) & (v < 2)], bins=h.bin_edges)
    assert np.array_equal(h.counts, ref)
