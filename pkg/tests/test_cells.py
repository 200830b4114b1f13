from dataclasses import replace
from fractions import Fraction
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from orbitspan.cells import (FAMILY_BOUNDS, CellPair, EmptyCellSample, build_cover, build_cover_plan,
                             delta_certificate, pair_gap, sample_cell_pairs, sample_tent_pairs,
                             tail_levels_for, verify_cover)


@pytest.fixture(scope="module")
def plan(golden):
    return build_cover_plan(0.009, golden)


@pytest.fixture(scope="module")
def cover(golden, plan):
    return build_cover(4 * golden.level(2).plateau, 0.009, golden, plan)


def smallest_q(eps, eta):
    # the tail sum_{i > q} eta / 2^i equals eta / 2^q
    for q in range(1, 60):
        if eta / 2 ** q < eps and 10.0 ** -q < eps:
            return q


@given(st.floats(1e-6, 0.0099))
def test_tail_levels_match_direct_search(eps):
    assert tail_levels_for(eps, Fraction(1, 100)) == smallest_q(eps, 0.01)


def test_plan_constants(golden, plan):
    assert plan.q == 3
    assert plan.c_eps == 112 == math.ceil(1 / 0.009)
    assert plan.C_eps == 100 * plan.c_eps ** 11 * plan.c_delta
    assert plan.depth_limited and plan.K_eps is None
    assert plan.step_bound == golden.level(3).return_time - 1
    lip = sum(1 / (golden.level(i).plateau * golden.level(i).bump) for i in (1, 2))
    assert float(plan.delta_eps) == pytest.approx(0.009 / (plan.step_bound * lip), rel=1e-9)
    assert plan.c_delta == math.ceil(1 / plan.delta_eps)
    s = plan.summary()
    assert s["q"] == 3 and s["C_eps_log10"] == pytest.approx(math.log10(plan.C_eps))


def test_plan_range(golden):
    with pytest.raises(ValueError):
        build_cover_plan(0.02, golden)
    with pytest.raises(ValueError):
        build_cover_plan(0.0, golden)


def test_delta_certificate_below_eps(golden, plan):
    assert delta_certificate(plan, golden, pairs=60, seed=1) < plan.eps


def test_counts_within_bounds_short_horizon(cover, plan):
    c = plan.c_eps
    assert cover.short_horizon and cover.k == 2
    assert cover.counts["P"] <= plan.c_delta * c ** 2
    assert cover.counts["Q"] <= 10 * c ** 4
    assert cover.counts["I"] <= 10 * c ** 3
    assert cover.counts["T"] <= plan.C_eps
    assert cover.summary()["within_bounds"]


def test_counts_within_bounds_long_horizon(golden, plan):
    n = 4 * plan.c_eps * golden.level(2).plateau
    cov = build_cover(n, 0.009, golden, plan)
    assert not cov.short_horizon
    assert all(cov.counts[f] <= cov.bounds[f] for f in cov.bounds)
    assert cov.Q.i_lo == 0 and cov.Q.i_hi == 2 * golden.level(2).plateau - 1


def test_level_beyond_schedule(golden, plan):
    with pytest.raises(ValueError):
        build_cover(4 * golden.level(3).plateau, 0.009, golden, plan)


def test_tent_cell_counts(cover):
    Q = cover.Q
    (r0, r1), (s0, s1) = Q.r_range, Q.s_range
    assert Q.count == 1 + (r1 - r0 + 1) * (s1 - s0 + 1)
    # blocks tile the index range without gaps or overlaps
    covered = []
    for r in range(r0, r0 + 5):
        lo, hi = Q.block(r)
        covered.append((lo, hi))
    for (lo, hi), (lo2, _) in zip(covered, covered[1:]):
        assert lo2 == hi + 1
    # sub-intervals tile [-gamma, gamma]
    subs = [Q.subinterval(s) for s in range(s0, s1 + 1)]
    assert subs[0][0] == -Q.gamma_units and subs[-1][1] == Q.gamma_units
    for (_, hi), (lo2, _) in zip(subs, subs[1:]):
        assert lo2 - hi in (0, 1)


@settings(max_examples=50)
@given(st.integers(0, 10 ** 9), st.sampled_from(["Q", "I"]))
def test_labels_recover_block_and_subinterval(cover, seed, fam):
    cells = cover.Q if fam == "Q" else cover.I
    sch = cover.schedule
    a = sch.alpha
    rng = random.Random(seed)
    r = rng.randint(*cells.r_range)
    lo, hi = cells.block(r)
    if lo > hi:
        return
    s = rng.randint(*cells.s_range)
    u_lo, u_hi = cells.subinterval(s)
    i = rng.randint(lo, hi)
    u = rng.randint(u_lo, u_hi)
    lab = cells.label(sch, (i * a.units + u) % a.modulus)
    assert lab[0] == r
    # a point on a shared sub-interval end may take either neighbour
    assert lab[1] in (s, s - 1, s + 1)
    if u_lo < u < u_hi:
        assert lab[1] == s


@settings(max_examples=40)
@given(st.integers(0, 2 ** 128 - 1), st.floats(0, 1, exclude_max=True))
def test_every_point_gets_a_key(cover, x, y):
    key = cover.key(x, y)
    c = cover.plan.c_eps
    assert 0 <= key.sx < c and 0 <= key.sy < c
    assert 0 <= key.p1 < cover.plan.c_delta
    assert 0 <= key.p2 < c and 0 <= key.p3 < c
    assert key.q is None or cover.Q.r_range[0] <= key.q[0] <= cover.Q.r_range[1]


def test_identical_pair_gap_is_zero(cover):
    x = cover.schedule.alpha.units
    for fam in ("P", "Q", "I", "T"):
        assert pair_gap(cover, CellPair(fam, x, 0.3, x, 0.3)) == 0.0


def test_intra_cell_pairs_respect_bounds(cover):
    pairs = (sample_tent_pairs(cover, "Q", 80, seed=1) + sample_tent_pairs(cover, "I", 20, seed=2)
             + sample_cell_pairs(cover, 20, seed=3, family="P")
             + sample_cell_pairs(cover, 30, seed=4, family="T"))
    checks = verify_cover(cover, pairs)
    assert set(checks) == {"P", "Q", "I", "T"}
    for fam, chk in checks.items():
        assert chk.passed, chk.to_dict()
        assert chk.bound == FAMILY_BOUNDS[fam] * 0.009
    assert "vanishes" in checks["I"].note


def test_sampled_pairs_share_cells(cover):
    for p in sample_tent_pairs(cover, "Q", 30, seed=5):
        assert cover.Q.label(cover.schedule, p.x1) == cover.Q.label(cover.schedule, p.x2)
    for p in sample_cell_pairs(cover, 10, seed=6):
        assert cover.key(p.x1, p.y1) == cover.key(p.x2, p.y2)


def test_empty_pair_sample(cover):
    with pytest.raises(EmptyCellSample):
        verify_cover(cover, [])
