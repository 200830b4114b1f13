"""Independent re-verification of a built parameter schedule.

Small ranges are checked by brute-force enumeration of exact orbit points;
large ones by the three-gap formula and exact visit counting.  Nothing
here calls the construction routines.
"""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
import random

from .schedule import ParameterSchedule

ENUMERATION_LIMIT = 10 ** 6


@dataclass(frozen=True)
class ConstraintCheck:
    name: str
    level: int
    passed: bool
    method: str
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "level": self.level, "passed": self.passed,
                "method": self.method, "detail": self.detail}


@dataclass(frozen=True)
class ScheduleAudit:
    checks: tuple[ConstraintCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[ConstraintCheck]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": [c.to_dict() for c in self.checks]}


def _points(sch: ParameterSchedule, i_lo: int, i_hi: int) -> list[int]:
    a = sch.alpha
    m, u = a.modulus, a.units
    x = (i_lo * u) % m
    out = []
    for _ in range(i_lo, i_hi + 1):
        out.append(x)
        x += u
        if x >= m:
            x -= m
    return out


def _enum_gaps(sch: ParameterSchedule, i_lo: int, i_hi: int) -> tuple[int, int]:
    """(min gap, max gap) of the sorted circle points ``i alpha``, ``i_lo <= i <= i_hi``."""
    pts = sorted(_points(sch, i_lo, i_hi))
    gaps = [b - a for a, b in zip(pts, pts[1:])]
    gaps.append(pts[0] + sch.alpha.modulus - pts[-1])
    return min(gaps), max(gaps)


def _gaps(sch: ParameterSchedule, i_lo: int, i_hi: int, limit: int) -> tuple[int, int, str]:
    count = i_hi - i_lo + 1
    if count <= limit:
        lo, hi = _enum_gaps(sch, i_lo, i_hi)
        return lo, hi, "enumeration"
    # gaps are shift invariant, so the three-gap formula on 0..count-1 applies
    g = sch.alpha.gaps(count)
    return min(g), max(g), "three-gap"


def _endpoints(sch: ParameterSchedule, k_hi: int) -> list[int]:
    a = sch.alpha
    out = []
    for k in range(1, k_hi + 1):
        lv = sch.level(k)
        for c in _points(sch, 0, lv.chain_length - 1):
            out.append((c - lv.window_units) % a.modulus)
            out.append((c + lv.window_units) % a.modulus)
    return out


def _endpoint_gap_enum(sch: ParameterSchedule, k_hi: int) -> int:
    pts = sorted(set(_endpoints(sch, k_hi)))
    gaps = [b - a for a, b in zip(pts, pts[1:])]
    gaps.append(pts[0] + sch.alpha.modulus - pts[-1])
    return min(gaps)


def _endpoint_gap_queries(sch: ParameterSchedule, k_hi: int) -> int:
    """Min distance between distinct endpoints, via nearest-point queries on index differences."""
    a = sch.alpha
    best = None
    for i in range(1, k_hi + 1):
        li = sch.level(i)
        for j in range(1, i + 1):
            lj = sch.level(j)
            for s1 in (1, -1):
                for s2 in (1, -1):
                    # (p alpha + s1 d_i) - (r alpha + s2 d_j) = (p - r) alpha + (s1 d_i - s2 d_j)
                    shift = (s2 * lj.window_units - s1 * li.window_units) % a.modulus
                    lo, hi = -(lj.chain_length - 1), li.chain_length - 1
                    ranges = [(lo, hi)]
                    if i == j and s1 == s2:
                        ranges = [(lo, -1), (1, hi)]
                    for r0, r1 in ranges:
                        if r0 <= r1:
                            d = a.nearest(shift, r0, r1)[1]
                            best = d if best is None else min(best, d)
            if i == j:
                best = min(best, 2 * li.window_units)
    return best


def _window_arc(sch: ParameterSchedule, k: int) -> tuple[int, int]:
    """Smallest convergent arc ``||q alpha||`` holding a closed level-k window: (q, length)."""
    a = sch.alpha
    need = 2 * sch.level(k).window_units + 1
    best = None
    j = 0
    while True:
        try:
            q, eta = a.denominator(j), a.eta(j)
        except IndexError:
            break
        if q >= 1 and eta >= need:
            best = (q, eta)
        elif q >= 1:
            break
        j += 1
    return best


def _window_count_enum(sch: ParameterSchedule, k: int, x: int, n: int) -> int:
    a = sch.alpha
    lv = sch.level(k)
    m = a.modulus
    lefts = sorted(((c - lv.window_units) % m, c) for c in _points(sch, 0, lv.chain_length - 1))
    keys = [l for l, _ in lefts]
    width = 2 * lv.window_units
    total = 0
    for p in _points(sch, 0, n - 1):
        p = (p + x) % m
        j = bisect_right(keys, p) - 1
        # candidates: the window starting just below p, or one wrapping past 0
        for jj in (j, len(keys) - 1):
            if jj >= 0 and (p - keys[jj]) % m <= width:
                total += 1
                break
    return total


def _window_count_exact(sch: ParameterSchedule, k: int, x: int, n: int) -> int:
    """``#{i < n : x + i alpha in some level-k window}`` from the visits of x to ``[-delta, delta]``.

    The windows are disjoint, so the count is a sum over differences
    ``d = i - j`` (window index j) with ``x + d alpha`` in the first window,
    each weighted by the number of pairs ``(i, j)`` with that difference.
    """
    lv = sch.level(k)
    J = lv.chain_length
    total = 0
    for d, _ in sch.alpha.visits(x, lv.window_units, -(J - 1), n - 1):
        total += min(n - 1, d + J - 1) - max(0, d) + 1
    return total


def check_schedule(sch: ParameterSchedule, *, limit: int = ENUMERATION_LIMIT, samples: int = 8,
                   seed: int = 0) -> ScheduleAudit:
    """Re-check every construction constraint of ``sch`` without reusing its builder."""
    a = sch.alpha
    Q = a.modulus
    eta = sch.budget
    out: list[ConstraintCheck] = []

    def add(name, k, ok, method, detail=""):
        out.append(ConstraintCheck(name, k, bool(ok), method, detail))

    lv1 = sch.level(1)
    add("first-level", 1, lv1.return_time == 10 and lv1.plateau == 100, "direct",
        f"M_1={lv1.return_time}, N_1={lv1.plateau}")
    rng = random.Random(seed)
    L = sch.internal_depth
    for k in range(1, L + 1):
        lv = sch.level(k)
        add("plateau", k, lv.plateau == 10 ** k * lv.return_time, "direct")
        add("window-budget", k, Fraction(4 * lv.plateau * lv.window_units, Q) < eta / 2 ** k, "exact",
            f"4 N delta = {4 * lv.plateau * lv.window_units / Q:.3e}")
        add("bump-inside-window", k, 0 < lv.bump_units < lv.window_units, "direct")
        g_min, _, how = _gaps(sch, 0, lv.chain_length - 1, limit)
        add("windows-disjoint", k, g_min > 2 * lv.window_units, how)
        n_next = sch.level(k + 1).plateau if k < L else lv.plateau
        g_min, _, how = _gaps(sch, -2 * n_next, 2 * n_next + 2 * lv.plateau, limit)
        add("tents-disjoint", k, g_min > 2 * lv.bump_units, how,
            f"indices [-2N_{k+1}, 2N_{k+1} + 2N_{k}]" + (" (own plateau)" if k == L else ""))
        n_end = sum(2 * sch.level(j).chain_length for j in range(1, k + 1))
        if n_end <= limit:
            sep, how = _endpoint_gap_enum(sch, k), "enumeration"
        else:
            sep, how = _endpoint_gap_queries(sch, k), "nearest-point"
        cap = min((sch.level(i).bump_units // (2 * k * k) for i in range(1, k)), default=None)
        ok = 0 < lv.separation_units <= sep and (cap is None or lv.separation_units <= cap)
        add("separation", k, ok, how, f"l_k={lv.separation:.3e}, endpoint gap={sep / Q:.3e}")
        if k == 1:
            continue
        prev = sch.level(k - 1)
        _, g_max, how = _gaps(sch, 0, lv.return_time - 1, limit)
        add("arc-hitting", k, g_max < prev.separation_units, how,
            f"max gap of {lv.return_time} points = {g_max / Q:.3e} vs l_{k-1}={prev.separation:.3e}")
        # window frequency after M_k: bounded-remainder certificate
        theta = eta / 2 ** (k - 1)
        arc = _window_arc(sch, k - 1)
        ok = arc is not None
        if ok:
            q, lam = arc
            slope = Fraction(2 * prev.plateau * lam, Q)
            bound = 2 * prev.plateau * (Fraction(lv.return_time * lam, Q) + 1 + Fraction((q - 1) * lam, Q))
            ok = 2 * q * lam < Q and slope < theta and bound < lv.return_time * theta
        add("frequency-certificate", k, ok, "exact", f"theta={float(theta):.3e}")
        # and the counts themselves at sample points and horizons
        worst = Fraction(0)
        how = "visit-count"
        starts = [rng.randrange(Q) for _ in range(samples)]
        starts += [(-prev.window_units) % Q, prev.window_units]
        horizons = [lv.return_time, 3 * lv.return_time + 1, 10 * lv.return_time]
        for x in starts:
            for n in horizons:
                c = _window_count_exact(sch, k - 1, x, n)
                worst = max(worst, Fraction(c, n))
            if lv.return_time <= limit and x == starts[0]:
                c_enum = _window_count_enum(sch, k - 1, x, lv.return_time)
                c_exact = _window_count_exact(sch, k - 1, x, lv.return_time)
                if c_enum != c_exact:
                    add("frequency-counts", k, False, "enumeration", "enumeration and visit count disagree")
                how = "visit-count, enumeration"
        add("frequency-counts", k, worst < theta, how,
            f"max frequency {float(worst):.3e} vs {float(theta):.3e}")
    return ScheduleAudit(tuple(out))


__all__ = ["ENUMERATION_LIMIT", "ConstraintCheck", "ScheduleAudit", "check_schedule"]
