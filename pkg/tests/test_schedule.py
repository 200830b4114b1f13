from fractions import Fraction
import random

import pytest

from orbitspan.certify import check_schedule
from orbitspan.schedule import DepthInfeasible, ParameterSchedule, build_schedule
from oracles import brute_nearest

FIB = [1, 2]
while FIB[-1] < 10 ** 15:
    FIB.append(FIB[-1] + FIB[-2])


def test_first_level_constants(golden):
    lv = golden.level(1)
    assert lv.return_time == 10
    assert lv.plateau == 100
    assert Fraction(lv.window_units, 1 << lv.bits) < Fraction(1, 80000)


def test_plateau_is_power_of_ten_times_return_time(golden):
    for lv in golden.levels:
        assert lv.plateau == 10 ** lv.k * lv.return_time


def test_window_budget(golden):
    for lv in golden.levels:
        total = Fraction(4 * lv.plateau * lv.window_units, 1 << lv.bits)
        assert total < golden.budget / 2 ** lv.k


def test_return_times_are_golden_denominators(golden):
    for lv in golden.levels[1:]:
        assert lv.return_time in FIB
    assert golden.level(2).return_time == 196418


def test_shape_and_provisional_flag(golden):
    assert golden.depth == 2 and golden.internal_depth == 3
    assert [lv.provisional for lv in golden.levels] == [False, False, True]
    for lv in golden.levels:
        assert 0 < lv.bump_units < lv.window_units
        assert 0 < lv.separation_units


def test_deterministic_and_text_round_trip(golden):
    again = build_schedule("golden", depth=2)
    assert again.to_text() == golden.to_text()
    back = ParameterSchedule.from_text(golden.to_text())
    assert back == golden
    assert back.to_text() == golden.to_text()


def test_from_text_rejects_other_documents():
    with pytest.raises(ValueError):
        ParameterSchedule.from_text("hello\n")
    bad = build_schedule("golden", depth=1).to_text().replace("window=", "window=0.3333333333", 1)
    with pytest.raises(ValueError):
        ParameterSchedule.from_text(bad)


def test_truncated_and_level_lookup(golden):
    t = golden.truncated(1)
    assert t.depth == 1 and t.internal_depth == 2
    assert t.level(2) == golden.level(2)
    with pytest.raises(IndexError):
        golden.level(4)
    with pytest.raises(ValueError):
        golden.truncated(3)


def test_level_for_horizon(golden):
    N1, N2, N3 = (golden.level(k).plateau for k in (1, 2, 3))
    assert golden.level_for_horizon(2 * N1 + 1) == 1
    assert golden.level_for_horizon(2 * N2) == 1
    assert golden.level_for_horizon(4 * N2) == 2
    with pytest.raises(ValueError):
        golden.level_for_horizon(2 * N1)
    with pytest.raises(ValueError):
        golden.level_for_horizon(2 * N3 + 1)


def test_window_index_matches_scan(golden):
    a = golden.alpha
    lv = golden.level(1)
    rng = random.Random(3)
    for t in range(300):
        if t % 2:
            x = rng.randrange(a.modulus)
        else:
            x = (rng.randrange(-5, lv.chain_length + 5) * a.units
                 + rng.randint(-2 * lv.window_units, 2 * lv.window_units)) % a.modulus
        i, d = brute_nearest(a.units, a.modulus, x, 0, lv.chain_length - 1)
        want = i if d <= lv.window_units else None
        assert golden.window_index(x, 1) == want


def test_level_one_windows_disjoint_by_sorting(golden):
    a = golden.alpha
    lv = golden.level(1)
    centres = sorted((i * a.units) % a.modulus for i in range(lv.chain_length))
    gaps = [b - c for c, b in zip(centres, centres[1:])] + [centres[0] + a.modulus - centres[-1]]
    assert min(gaps) > 2 * lv.window_units


def test_magnitude_cap_reports_level():
    with pytest.raises(DepthInfeasible) as info:
        build_schedule("golden", depth=2, magnitude_cap=10 ** 6)
    assert info.value.level == 2
    assert "magnitude" in info.value.constraint


def test_bad_arguments():
    with pytest.raises(ValueError):
        build_schedule("golden", depth=0)
    with pytest.raises(ValueError):
        build_schedule("golden", budget=Fraction(3, 2))


def test_other_rotation_numbers_certify():
    for alpha in ("sqrt2", "silver"):
        sch = build_schedule(alpha, depth=1)
        assert sch.level(1).plateau == 100
        audit = check_schedule(sch)
        assert audit.passed, [c.to_dict() for c in audit.failures]
