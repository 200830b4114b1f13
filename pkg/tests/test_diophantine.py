from fractions import Fraction
import math

import pytest
from hypothesis import given, strategies as st

from orbitspan.diophantine import (ContinuedFractionAlpha, floor_sum, min_linear_mod,
                                   nearest_orbit_point, orbit_interval_count)
from oracles import brute_floor_sum, brute_gaps, brute_min_linear_mod, brute_nearest

GOLDEN = ContinuedFractionAlpha.golden()
SMALL_BITS = 40
alphas = st.sampled_from([GOLDEN, ContinuedFractionAlpha.parse("sqrt2"),
                          ContinuedFractionAlpha.parse("silver"),
                          ContinuedFractionAlpha.golden(SMALL_BITS),
                          ContinuedFractionAlpha.from_value(Fraction(355, 1130), SMALL_BITS)])


@given(st.integers(0, 60), st.integers(1, 10 ** 6), st.integers(-10 ** 7, 10 ** 7),
       st.integers(-10 ** 7, 10 ** 7))
def test_floor_sum_matches_direct_sum(n, m, a, b):
    assert floor_sum(n, m, a, b) == brute_floor_sum(n, m, a, b)


@given(st.integers(1, 80), st.integers(1, 10 ** 6), st.integers(-10 ** 7, 10 ** 7),
       st.integers(-10 ** 7, 10 ** 7))
def test_min_linear_mod_matches_scan(n, m, a, b):
    v, i = min_linear_mod(n, m, a, b)
    bv, _ = brute_min_linear_mod(n, m, a, b)
    assert v == bv
    assert 0 <= i < n and (a * i + b) % m == v


def test_golden_denominators_are_fibonacci():
    fib = [1, 2]
    while len(fib) < 40:
        fib.append(fib[-1] + fib[-2])
    assert [GOLDEN.denominator(j) for j in range(1, 41)] == fib


def test_eta_is_distance_of_denominator_multiple():
    # j = 0 is q_0 = 1 with p_0 = 0, i.e. alpha itself
    assert GOLDEN.eta(0) == GOLDEN.units
    for j in range(1, 60):
        q = GOLDEN.denominator(j)
        assert GOLDEN.eta(j) == GOLDEN.circle_units(q * GOLDEN.units, 0)
        assert GOLDEN.eta(j) < GOLDEN.eta(j - 1)


def test_eta_past_end_raises():
    a = ContinuedFractionAlpha.from_value(Fraction(3, 8), 8)
    with pytest.raises(IndexError):
        a.eta(50)


@given(alphas, st.integers(1, 400))
def test_three_gap_structure_matches_sorted_orbit(alpha, count):
    got = alpha.gaps(count)
    assert got == brute_gaps(alpha.units, alpha.modulus, count)
    assert len(got) <= 3
    assert sum(length * mult for length, mult in got.items()) == alpha.modulus


@given(alphas, st.integers(0, 2 ** 128 - 1), st.integers(-300, 300), st.integers(0, 300))
def test_nearest_matches_scan(alpha, x, lo, width):
    x %= alpha.modulus
    i, d = alpha.nearest(x, lo, lo + width)
    bi, bd = brute_nearest(alpha.units, alpha.modulus, x, lo, lo + width)
    assert d == bd
    assert alpha.circle_units(x, i * alpha.units) == d


@given(alphas, st.integers(0, 2 ** 128 - 1), st.integers(-200, 200), st.integers(0, 300),
       st.floats(0.0, 0.2))
def test_visits_match_scan(alpha, x, lo, width, frac):
    x %= alpha.modulus
    r = int(frac * alpha.modulus)
    got = alpha.visits(x, r, lo, lo + width)
    want = []
    for i in range(lo, lo + width + 1):
        off = (x + i * alpha.units) % alpha.modulus
        if off > alpha.modulus // 2:
            off -= alpha.modulus
        if abs(off) <= r:
            want.append((i, off))
    assert got == want


@given(alphas, st.integers(0, 2 ** 128 - 1), st.integers(0, 2 ** 128 - 1), st.floats(0, 1),
       st.integers(0, 500))
def test_count_in_matches_scan(alpha, x, a, frac, n):
    x %= alpha.modulus
    a %= alpha.modulus
    length = int(frac * alpha.modulus)
    want = sum(1 for i in range(n) if (x + i * alpha.units - a) % alpha.modulus < length)
    assert alpha.count_in(x, a, length, n) == want


@given(st.floats(-1e6, 1e6, allow_nan=False))
def test_float_conversion_agrees_with_exact_rational(x):
    want = int((Fraction(x) % 1) * GOLDEN.modulus)
    assert GOLDEN.to_units(x) == want


def test_conversion_edge_cases():
    assert GOLDEN.to_units(-0.0) == 0
    assert GOLDEN.to_units(1.0) == 0
    assert GOLDEN.to_units(-1e-300) == int((Fraction(-1e-300) % 1) * GOLDEN.modulus)
    assert GOLDEN.to_units(Fraction(1, 2)) == GOLDEN.modulus // 2
    assert GOLDEN.to_float(GOLDEN.modulus // 4) == 0.25


def test_golden_value():
    assert GOLDEN.value == pytest.approx((math.sqrt(5) - 1) / 2, abs=1e-15)


def test_nearest_orbit_point_wrapper():
    p = nearest_orbit_point(0.3, 0, 50, GOLDEN)
    bi, bd = brute_nearest(GOLDEN.units, GOLDEN.modulus, GOLDEN.to_units(0.3), 0, 50)
    assert p.dist_units == bd and p.dist == bd / GOLDEN.modulus


def test_orbit_interval_count_on_known_arc():
    n = 1000
    want = sum(1 for i in range(n) if 0.2 <= (i * GOLDEN.value) % 1 < 0.45)
    assert orbit_interval_count(0.2, 0.45, n, GOLDEN) == want
    # wrapping arc
    want = sum(1 for i in range(n) if (i * GOLDEN.value) % 1 >= 0.9 or (i * GOLDEN.value) % 1 < 0.1)
    assert orbit_interval_count(0.9, 1.1, n, GOLDEN) == want
    with pytest.raises(ValueError):
        orbit_interval_count(0.5, 0.2, n, GOLDEN)


def test_parse_rejects_degenerate():
    with pytest.raises(ValueError):
        ContinuedFractionAlpha(0)
    assert ContinuedFractionAlpha.parse(GOLDEN) is GOLDEN
