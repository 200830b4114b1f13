from fractions import Fraction
import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from orbitspan.cocycle import CocycleFunction, birkhoff_sum
from orbitspan.diophantine import ContinuedFractionAlpha
from orbitspan.systems import (Doubling, ProductBernoulliRotations, Rotation, SkewProduct, StepSystem,
                               appendix_system, doubling_step, perturbed_system, product_step,
                               rotation_step, skew_step, tbeta_step)

GOLDEN = ContinuedFractionAlpha.golden()


def test_rotation_step_examples():
    assert rotation_step(0.25, 0.9) == pytest.approx(0.15)
    assert rotation_step(0.0, 0.37) == 0.37
    assert np.allclose(rotation_step(0.5, np.array([0.25, 0.75])), [0.75, 0.25])


def test_rotation_million_steps_matches_closed_form():
    x = 0.123
    a = GOLDEN.value
    for _ in range(10 ** 6):
        x = rotation_step(a, x)
    exact = (Fraction(0.123) + 10 ** 6 * Fraction(GOLDEN.units, GOLDEN.modulus)) % 1
    assert abs(x - float(exact)) < 1e-9


def test_rotation_orbit_is_exact():
    orb = Rotation("golden").orbit([0.123], 10 ** 5)[:, 0, 0]
    exact = (Fraction(0.123) + (10 ** 5 - 1) * Fraction(GOLDEN.units, GOLDEN.modulus)) % 1
    assert abs(orb[-1] - float(exact)) < 1e-15


def test_doubling_examples():
    assert doubling_step(0.3) == pytest.approx(0.6)
    assert doubling_step(0.75) == 0.5
    assert Doubling().iterate([0.375], 3)[0, 0] == 0.0


def test_product_step_examples():
    taus = np.array([0.1, 0.2, 0.3])
    state = np.array([[0.5, 0.5, 0.5]])
    ident = ProductBernoulliRotations(3, omega=[0, 0, 0], taus=taus)
    assert np.array_equal(product_step(ident, state), state)
    full = ProductBernoulliRotations(3, omega=[1, 1, 1], taus=taus)
    assert np.allclose(product_step(full, state), [[0.6, 0.7, 0.8]])
    mixed = ProductBernoulliRotations(3, omega=[1, 0, 1], taus=taus)
    assert np.allclose(product_step(mixed, state), [[0.6, 0.5, 0.8]])
    with pytest.raises(ValueError):
        product_step(mixed, np.zeros((1, 2)))


def test_product_validation_and_weights():
    p = ProductBernoulliRotations(6, seed=1)
    assert p.weights.sum() < 1
    assert len(set(p.taus)) == 6
    with pytest.raises(ValueError):
        ProductBernoulliRotations(2, omega=[0, 2], taus=[0.1, 0.2])
    with pytest.raises(ValueError):
        ProductBernoulliRotations(2, omega=[0, 1], taus=[0.1, 0.1])


def test_product_orbit_matches_stepping():
    p = ProductBernoulliRotations(5, seed=2)
    z = np.random.default_rng(0).random((3, 5))
    orb = p.orbit(z, 200)
    assert np.allclose(orb[-1], p.iterate(z, 199), atol=1e-12)


def test_skew_step_reductions():
    z = np.array([[0.2, 0.7]])
    assert np.allclose(skew_step("golden", None, z), [[(0.2 + GOLDEN.value) % 1, 0.7]])
    assert np.allclose(skew_step("golden", 0.1, z), [[(0.2 + GOLDEN.value) % 1, 0.8]])


def test_generic_skew_orbit_matches_stepping():
    h = lambda x: 0.05 * np.sin(2 * np.pi * x)
    s = SkewProduct("golden", h)
    z = np.array([[0.1, 0.2], [0.7, 0.9]])
    orb = s.orbit(z, 500)
    assert np.allclose(orb[-1], s.iterate(z, 499), atol=1e-10)
    chunks = np.concatenate([b for _, b in s.orbit_chunks(z, 500, chunk=64)])
    assert np.allclose(chunks, orb, atol=1e-12)


def test_iterate_consistency_generic_h():
    h = lambda x: 0.05 * np.cos(2 * np.pi * x)
    s = SkewProduct("golden", h)
    rng = np.random.default_rng(4)
    for _ in range(20):
        x, y = rng.random(2)
        n = int(rng.integers(1, 10 ** 4))
        got = s.orbit([[x, y]], n + 1)[-1, 0, 1]
        want = (y + birkhoff_sum(h, x, n, alpha=GOLDEN)) % 1
        assert abs((got - want + 0.5) % 1 - 0.5) < 1e-9


def _tent_start(sch, rng, level=1):
    lv = sch.level(level)
    j = rng.randrange(-lv.plateau, lv.chain_length)
    off = rng.randint(-lv.bump_units, lv.bump_units)
    return GOLDEN.to_float(j * GOLDEN.units + off)


def test_appendix_iterate_consistency(golden):
    sys_ = appendix_system(golden)
    f = CocycleFunction(golden)
    rng = random.Random(5)
    for t in range(100):
        x = _tent_start(golden, rng) if t % 2 else rng.random()
        y = rng.random()
        n = rng.randint(1, 10 ** 4)
        got = sys_.orbit([[x, y]], n + 1)[-1, 0, 1]
        want = (y + birkhoff_sum(f, x, n)) % 1
        assert abs((got - want + 0.5) % 1 - 0.5) < 1e-9


def test_appendix_orbit_matches_plain_stepping_short(golden):
    # floats drift relative to the tiny tents, so only a short horizon is compared
    sys_ = appendix_system(golden)
    rng = random.Random(6)
    for _ in range(10):
        z = np.array([[_tent_start(golden, rng), rng.random()]])
        assert np.allclose(sys_.orbit(z, 30)[-1], sys_.iterate(z, 29), atol=1e-9)


def test_tbeta_identity(golden):
    beta = ContinuedFractionAlpha.parse("sqrt2")
    f = CocycleFunction(golden)
    for s in (1, -2, 3):
        sys_ = perturbed_system(golden, s=s, beta="sqrt2")
        for x, y, n in ((0.0, 0.0, 1000), (0.3, 0.6, 77777), (GOLDEN.to_float(5 * GOLDEN.units), 0.1, 250)):
            got = sys_.orbit([[x, y]], n + 1)[-1, 0, 1]
            nb = float(Fraction(n * beta.units % beta.modulus, beta.modulus))
            want = (y + s * birkhoff_sum(f, x, n) + nb) % 1
            assert abs((got - want + 0.5) % 1 - 0.5) < 1e-9


def test_tbeta_step_reductions(golden):
    z = np.array([[0.0, 0.25]])
    f = CocycleFunction(golden)
    assert np.allclose(tbeta_step(golden, 1, 0.0, z), skew_step(GOLDEN, f, z))
    with pytest.raises(ValueError):
        tbeta_step(golden, 0, "sqrt2", z)
    with pytest.raises(ValueError):
        perturbed_system(golden, s=0)
    plain = SkewProduct("golden", None, beta="sqrt2").step(z)
    assert np.allclose(plain, [[GOLDEN.value, (0.25 + math.sqrt(2)) % 1]])


def test_golden_rotation_discrepancy():
    n = 10 ** 5
    pts = np.sort(Rotation("golden").orbit([0.0], n)[:, 0, 0])
    i = np.arange(1, n + 1)
    star = max(np.max(i / n - pts), np.max(pts - (i - 1) / n))
    assert star < 1e-3


def test_step_system_wrapper():
    s = StepSystem(lambda x: 3 * x, description="tripling")
    assert s.iterate([0.4], 2)[0, 0] == pytest.approx(0.6)
    assert s.description == "tripling"


@settings(max_examples=30)
@given(st.floats(0, 1, exclude_max=True), st.integers(0, 400), st.integers(0, 400))
def test_orbit_chunks_cover_whole_horizon(x, n, chunk):
    rot = Rotation("golden")
    blocks = list(rot.orbit_chunks([x], n, chunk=chunk + 1))
    assert sum(len(b) for _, b in blocks) == n
    assert [m0 for m0, _ in blocks] == list(range(0, n, chunk + 1))
