import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from spikedist.core import (Bounds, Duplicate, EmptyTrain, NonFinite, NotSorted, OutOfBounds,
                            breakpoints, integrate_profile, phi, point_distance, profile,
                            validate_train)

T_A = [20.0, 150.0, 350.0, 400.0, 440.0]
T_B = [100.0, 270.0, 300.0, 370.0, 480.0]
B500 = Bounds(0.0, 500.0)


@st.composite
def train_pairs(draw, max_n=12):
    def one():
        xs = draw(st.lists(st.integers(0, 5000), min_size=1, max_size=max_n, unique=True))
        return np.sort(np.array(xs, dtype=float) / 10)
    return one(), one()


def test_validate_accepts_sorted_train():
    t = validate_train(T_A, B500)
    assert t.tolist() == T_A
    assert not t.flags.writeable


@pytest.mark.parametrize("times, exc", [
    ([100, 100], Duplicate),
    ([], EmptyTrain),
    ([30, 20], NotSorted),
    ([10, float("nan")], NonFinite),
    ([10, 600], OutOfBounds),
])
def test_validate_rejects(times, exc):
    with pytest.raises(exc):
        validate_train(times, Bounds(0, 500))


def test_duplicates_can_be_merged():
    assert validate_train([1, 2, 2, 3], merge_duplicates=True).tolist() == [1, 2, 3]


def test_duplicate_is_a_sorting_error():
    assert issubclass(Duplicate, NotSorted)


@pytest.mark.parametrize("a, b", [(1, 1), (2, 1), (0, float("inf"))])
def test_bounds_invalid(a, b):
    with pytest.raises(ValueError):
        Bounds(a, b)


@pytest.mark.parametrize("x, expected", [(250, 100), (20, 0), (0, 20)])
def test_point_distance(x, expected):
    assert point_distance(x, np.array(T_A)) == expected


def test_point_distance_vectorized_matches_brute_force():
    x = np.linspace(-50, 550, 1201)
    np.testing.assert_array_equal(point_distance(x, np.array(T_A)), oracles.nearest(x, T_A))


def test_breakpoints_single_spikes():
    assert breakpoints(np.array([100.0]), np.array([150.0]), Bounds(0, 200)).tolist() == \
        [0, 100, 125, 150, 200]


def test_breakpoints_identical_trains():
    t = np.array([100.0])
    assert breakpoints(t, t, Bounds(0, 200)).tolist() == [0, 100, 200]


def test_breakpoints_five_spike_pair_against_neighbor_scan():
    t1, t2 = np.array(T_A), np.array(T_B)
    P = breakpoints(t1, t2, B500)
    merged = np.sort(np.r_[t1, t2])
    expected = {0.0, 500.0, *merged}
    expected |= set((t1[1:] + t1[:-1]) / 2) | set((t2[1:] + t2[:-1]) / 2)
    for x, y in zip(merged, merged[1:]):
        if (x in t1) != (y in t1):
            expected.add((x + y) / 2)
    assert sorted(expected) == P.tolist()


def test_profile_single_spikes():
    p = profile(np.array([50.0]), np.array([150.0]), Bounds(0, 200))
    for s, v in [(0, 100), (50, 100), (100, 0), (150, 100), (200, 100)]:
        assert p(s) == v
    assert integrate_profile(p) == 15000


def test_profile_matches_dense_grid_at_breakpoints():
    p = profile(np.array(T_A), np.array(T_B), B500)
    s, f = oracles.phi_grid(T_A, T_B, 0, 500, 0.01)
    idx = np.rint(p.s / 0.01).astype(int)
    np.testing.assert_allclose(p.phi, f[idx], atol=1e-9)


def test_identical_trains_have_zero_profile():
    t = np.array(T_A)
    assert not np.any(profile(t, t, B500).phi)


@settings(max_examples=60, deadline=None)
@given(train_pairs())
def test_profile_is_linear_between_breakpoints(pair):
    t1, t2 = pair
    p = profile(t1, t2, B500)
    mids = (p.s[1:] + p.s[:-1]) / 2
    np.testing.assert_allclose(phi(mids, t1, t2), p(mids), atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(train_pairs())
def test_integral_matches_riemann_sum(pair):
    t1, t2 = pair
    exact = integrate_profile(profile(t1, t2, B500))
    ref = oracles.modulus(t1, t2, 0, 500, 0.01)
    assert exact == pytest.approx(ref, rel=5e-3, abs=1e-6)
