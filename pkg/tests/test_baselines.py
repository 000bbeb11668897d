import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from spikedist.baselines import (kreuz_isi, kreuz_spike, schreiber_distance,
                                 spike_count_distance, van_rossum_discrete, van_rossum_exact,
                                 victor_purpura)
from spikedist.core import Bounds
from spikedist.kernels import ParamError

B500 = Bounds(0.0, 500.0)


@st.composite
def pairs(draw, max_n=15):
    def one():
        xs = draw(st.lists(st.integers(0, 5000), min_size=1, max_size=max_n, unique=True))
        return np.sort(np.array(xs, dtype=float) / 10)
    return one(), one()


@pytest.mark.parametrize("n1, n2, expected", [(5, 3, 0.4), (4, 4, 0.0), (1, 10, 0.9)])
def test_spike_count(n1, n2, expected):
    assert spike_count_distance(np.arange(n1) + 1.0, np.arange(n2) + 1.0) == pytest.approx(expected)


def test_van_rossum_two_single_spikes():
    assert van_rossum_exact([50.0], [60.0], 10) == pytest.approx(10 * (1 - math.exp(-1)), abs=1e-9)
    assert van_rossum_discrete([50.0], [60.0], 10, B500) == pytest.approx(
        10 * (1 - math.exp(-1)), rel=2e-2)


def test_van_rossum_spike_at_upper_bound():
    t = [10.0, 500.0]
    assert van_rossum_exact(t, t) == 0
    assert van_rossum_discrete(t, t, 10, B500) == 0


@settings(max_examples=100, deadline=None)
@given(pairs())
def test_van_rossum_matches_pair_sum(pair):
    assert van_rossum_exact(*pair) == pytest.approx(oracles.van_rossum(*pair, 10.0),
                                                    rel=1e-9, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(pairs())
def test_van_rossum_discrete_close_to_exact(pair):
    exact = van_rossum_exact(*pair)
    assert van_rossum_discrete(*pair, 10.0, B500) == pytest.approx(exact, rel=2e-2, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(pairs(), st.sampled_from([0.0, 0.001, 0.2, 1.0]))
def test_victor_purpura_matches_full_table(pair, q):
    a, b = pair
    assert victor_purpura(a, b, q) == pytest.approx(oracles.victor_purpura(a, b, q))
    assert victor_purpura(a, b, q) == victor_purpura(b, a, q)


def test_victor_purpura_examples():
    t = np.array([10.0, 50.0, 90.0])
    assert victor_purpura(t, t + [0, 5, 0], 0.2) == pytest.approx(1.0)
    assert victor_purpura(t, np.array([1.0]), 0.0) == 2
    assert victor_purpura(t, t) == 0
    with pytest.raises(ParamError):
        victor_purpura(t, t, -1)


def test_schreiber_examples():
    assert schreiber_distance([50.0], [450.0], 10, B500) == pytest.approx(1.0, abs=1e-12)
    assert schreiber_distance([50.0, 100.0], [50.0, 100.0], 10, B500) == 0
    # an extra spike on top of an existing one still changes the filtered train
    assert schreiber_distance([50.0, 100.0], [50.0, 50.0, 100.0], 10, B500) > 0


def test_kreuz_isi_periodic_vs_double_rate():
    t1 = np.arange(10.0, 100.0, 10.0)
    t2 = np.arange(5.0, 100.0, 5.0)
    # every interval of t1 is 10 ms and of t2 is 5 ms: |10 - 5| / 10 throughout
    assert kreuz_isi(t1, t2, Bounds(0, 100)) == pytest.approx(0.5)


def test_kreuz_spike_matches_pointwise_profile():
    t1 = np.arange(10.0, 100.0, 10.0)
    t2 = np.arange(5.0, 100.0, 5.0)
    assert kreuz_spike(t1, t2, Bounds(0, 100)) == pytest.approx(2 / 9, rel=1e-9)
    t1, t2 = np.array([20.0, 150.0, 350.0, 400.0, 440.0]), np.array([100.0, 270.0, 300.0, 370.0])
    assert kreuz_spike(t1, t2, B500) == pytest.approx(
        oracles.spike_profile_mean(t1, t2, 0, 500, 0.005), rel=1e-6)


@settings(max_examples=100, deadline=None)
@given(pairs())
def test_kreuz_ranges_and_symmetry(pair):
    a, b = pair
    for fn in (kreuz_isi, kreuz_spike):
        d = fn(a, b, B500)
        assert 0 <= d <= 1
        assert d == fn(b, a, B500)
        assert fn(a, a, B500) == 0


@settings(max_examples=100, deadline=None)
@given(pairs(20))
def test_baselines_vanish_on_identical_trains_and_are_symmetric(pair):
    a, b = pair
    for fn in (lambda u, v: van_rossum_exact(u, v), lambda u, v: van_rossum_discrete(u, v, 10, B500),
               lambda u, v: victor_purpura(u, v), lambda u, v: schreiber_distance(u, v, 10, B500),
               spike_count_distance):
        assert fn(a, a) == 0
        assert fn(a, b) == fn(b, a)


@settings(max_examples=100, deadline=None)
@given(pairs(), st.floats(0, 10))
def test_victor_purpura_cost_limits(pair, q):
    a, b = pair
    n = a.size + b.size
    assert victor_purpura(a, b, q) <= n
    if not set(a) & set(b):
        assert victor_purpura(a, b, 1e6) == n
