from dataclasses import replace

from orbitspan.certify import check_schedule


def _names(audit):
    return {(c.name, c.level) for c in audit.failures()}


def test_golden_schedule_passes_every_check(golden):
    audit = check_schedule(golden)
    assert audit.passed, [c.to_dict() for c in audit.failures()]
    names = {c.name for c in audit.checks}
    assert {"first-level", "plateau", "window-budget", "windows-disjoint", "tents-disjoint",
            "separation", "arc-hitting", "frequency-certificate", "frequency-counts"} <= names
    methods = {c.method for c in audit.checks}
    assert any("enumeration" in m for m in methods)
    d = audit.to_dict()
    assert d["passed"] is True


def _tamper(sch, k, **changes):
    levels = list(sch.levels)
    levels[k - 1] = replace(levels[k - 1], **changes)
    return replace(sch, levels=tuple(levels))


def test_oversized_window_is_caught(golden):
    lv = golden.level(1)
    bad = _tamper(golden, 1, window_units=lv.window_units * 1000)
    failed = _names(check_schedule(bad))
    assert ("window-budget", 1) in failed


def test_wide_bump_is_caught(golden):
    lv = golden.level(2)
    bad = _tamper(golden, 2, bump_units=lv.window_units + 1)
    failed = _names(check_schedule(bad))
    assert ("bump-inside-window", 2) in failed


def test_short_return_time_is_caught(golden):
    bad = _tamper(golden, 2, return_time=144, plateau=14400)
    failed = _names(check_schedule(bad))
    assert ("arc-hitting", 2) in failed


def test_wrong_first_level_is_caught(golden):
    bad = _tamper(golden, 1, return_time=11, plateau=1100)
    failed = _names(check_schedule(bad))
    assert ("first-level", 1) in failed
