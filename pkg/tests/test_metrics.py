import numpy as np
import pytest
from hypothesis import given, strategies as st

from orbitspan.metrics import (CirclePoint, Torus2Point, circle_dist, metric_profile,
                               metric_profile_batch, orbit_metrics, torus2_dist)
from orbitspan.systems import Doubling, HorizonOverflow, ProductBernoulliRotations, Rotation, SkewProduct

unit = st.floats(0.0, 1.0, allow_nan=False, exclude_max=True)


def test_circle_dist_examples():
    assert circle_dist(0.9, 0.1) == pytest.approx(0.2)
    assert circle_dist(0.37, 0.37) == 0.0
    assert circle_dist(0.0, 0.5) == 0.5
    assert circle_dist(CirclePoint(1.25), CirclePoint(0.0)) == 0.25


def test_torus_dist_examples():
    assert torus2_dist((0, 0), (0.5, 0.5)) == 1.0
    assert torus2_dist(Torus2Point(0.3, 0.8), Torus2Point(0.3, 0.8)) == 0.0
    # 0.2 from the first coordinate (wrapping), 0.1 from the second
    assert torus2_dist((0.9, 0.2), (0.1, 0.3)) == pytest.approx(0.3)


@given(unit, unit, unit)
def test_circle_dist_is_a_metric(a, b, c):
    assert 0 <= circle_dist(a, b) <= 0.5
    assert circle_dist(a, b) == circle_dist(b, a)
    assert circle_dist(a, c) <= circle_dist(a, b) + circle_dist(b, c) + 1e-15


def test_rotation_orbit_metrics_equal_base_distance():
    rot = Rotation("golden")
    for n in (1, 7, 1000):
        t = orbit_metrics(rot, 0.1, 0.35, n)
        assert t.d_n == pytest.approx(0.25, abs=1e-12)
        assert t.dhat_n == pytest.approx(0.25, abs=1e-12)
        assert t.dbar_n == pytest.approx(0.25, abs=1e-12)


def test_doubling_dyadic_pair():
    t = orbit_metrics(Doubling(), 0.0, 2.0 ** -10, 10)
    assert t.d_n == 0.5
    assert t.dbar_n == pytest.approx(1023 / 10240, abs=1e-15)


def test_doubling_bowen_saturates():
    prof = metric_profile(Doubling(), 0.0, 2.0 ** -20, 25)
    ds = [t.d_n for t in prof]
    assert ds[19] == 0.5 and ds[18] < 0.5
    assert all(d == 0.5 for d in ds[19:])


def test_mean_metric_can_decrease():
    # after the pair collides at 0 the running mean drops
    prof = metric_profile(Doubling(), 0.0, 2.0 ** -10, 11)
    assert prof[10].dbar_n < prof[9].dbar_n
    assert prof[10].dhat_n == prof[9].dhat_n


def test_n_equal_one_is_base_distance():
    t = orbit_metrics(SkewProduct("golden", 0.3), (0.1, 0.2), (0.4, 0.9), 1)
    assert t.d_n == t.dhat_n == t.dbar_n == pytest.approx(0.3 + 0.3)


def direct_triple(system, x, y, n):
    """Plain loop: step both points n times and summarise the distances."""
    a = system.as_states([x])
    b = system.as_states([y])
    ds = []
    for _ in range(n):
        ds.append(float(system.dist(a, b)[0]))
        a, b = system.step(a), system.step(b)
    means = np.cumsum(ds) / np.arange(1, n + 1)
    return max(ds), means.max(), means[-1]


systems = st.sampled_from([Rotation("golden"), Doubling(), ProductBernoulliRotations(5, seed=3),
                           SkewProduct("golden", 0.3, beta="sqrt2"),
                           SkewProduct("golden", lambda x: 0.1 * np.sin(2 * np.pi * x))])


@given(systems, st.integers(1, 300), st.data())
def test_streaming_triple_matches_plain_loop(system, n, data):
    x = [data.draw(unit) for _ in range(system.dim)]
    y = [data.draw(unit) for _ in range(system.dim)]
    t = orbit_metrics(system, x, y, n, chunk=37)
    d, dh, db = direct_triple(system, x, y, n)
    # orbit_chunks uses exact rotation arithmetic, the loop steps in floats
    assert t.d_n == pytest.approx(d, abs=1e-9)
    assert t.dhat_n == pytest.approx(dh, abs=1e-9)
    assert t.dbar_n == pytest.approx(db, abs=1e-9)
    assert t.d_n >= t.dhat_n >= t.dbar_n >= 0


@given(systems, st.integers(1, 200), st.data())
def test_profile_chain_and_reconstruction(system, n_max, data):
    P = 4
    X = np.array([[data.draw(unit) for _ in range(system.dim)] for _ in range(P)])
    Y = np.array([[data.draw(unit) for _ in range(system.dim)] for _ in range(P)])
    prof = metric_profile_batch(system, X, Y, n_max, chunk=16)
    assert np.all(prof.bowen >= prof.maxmean) and np.all(prof.maxmean >= prof.mean)
    assert np.all(np.diff(prof.bowen, axis=0) >= 0) and np.all(np.diff(prof.maxmean, axis=0) >= 0)
    assert np.array_equal(prof.maxmean, np.maximum.accumulate(prof.mean, axis=0))
    single = metric_profile(system, X[0], Y[0], n_max)
    assert [s.d_n for s in single] == pytest.approx(list(prof.bowen[:, 0]), abs=1e-12)


@given(st.integers(1, 50), st.data())
def test_orbit_metrics_symmetric_and_triangle(n, data):
    system = SkewProduct("golden", lambda x: 0.2 * np.cos(2 * np.pi * x))
    p, q, r = ([data.draw(unit), data.draw(unit)] for _ in range(3))
    pq, qp = orbit_metrics(system, p, q, n), orbit_metrics(system, q, p, n)
    pr, qr = orbit_metrics(system, p, r, n), orbit_metrics(system, q, r, n)
    for f in ("d_n", "dhat_n", "dbar_n"):
        assert getattr(pq, f) == pytest.approx(getattr(qp, f), abs=1e-12)
        assert getattr(pr, f) <= getattr(pq, f) + getattr(qr, f) + 1e-12


def test_ball_inclusion_pointwise():
    rng = np.random.default_rng(0)
    system = Doubling()
    X, Y = rng.random((500, 1)), rng.random((500, 1))
    prof = metric_profile_batch(system, X, Y, 12)
    for eps in (0.05, 0.2):
        bow, mm, mean = (prof.bowen < eps), (prof.maxmean < eps), (prof.mean < eps)
        assert np.all(~bow | mm) and np.all(~mm | mean)


def test_horizon_overflow():
    rot = Rotation("golden")
    rot.max_horizon = 100
    with pytest.raises(HorizonOverflow):
        orbit_metrics(rot, 0.0, 0.1, 101)
    with pytest.raises(ValueError):
        orbit_metrics(rot, 0.0, 0.1, 0)
