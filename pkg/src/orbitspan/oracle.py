"""Numerical checks of the tent-cocycle lemmas and the witness procedures.

Every bound is tested with a declared slack: the sup of the cocycle tail
that the truncated system drops, plus ``1e-9`` per summed term (or ``1e-9``
for an average).  Reports carry the slack so it is never silent.

Points on the base circle are handled as exact grid units wherever the
arithmetic is done by the schedule's rotation number; floats are accepted
and converted.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from fractions import Fraction
import math
from typing import Any, Sequence

import numpy as np

from .cocycle import CocycleFunction, CocyclePath, birkhoff_sum
from .covering import SampleSet
from .metrics import CirclePoint
from .schedule import ParameterSchedule
from .systems import DynamicalSystem

FP_PER_TERM = 1e-9
MAX_PROBE_BUDGET = 10 ** 8
DEFAULT_STEP_BUDGET = 10 ** 8


class HypothesisViolated(ValueError):
    """The instance does not satisfy the lemma's hypothesis: a bad test case."""


class WitnessNotFound(RuntimeError):
    """No admissible index pair exists, which points at a schedule defect."""


class StepBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class WitnessReport:
    tag: str
    inputs: dict[str, Any]
    achieved: float
    lower: float | None
    upper: float | None
    passed: bool | None        # None: diagnostic only, no claim tested
    slack: float
    details: dict[str, Any] = field(default_factory=dict)

    def within(self, value: float) -> bool:
        lo_ok = self.lower is None or value >= self.lower - self.slack
        hi_ok = self.upper is None or value <= self.upper + self.slack
        return lo_ok and hi_ok

    def to_dict(self) -> dict[str, Any]:
        return _jsonable(asdict(self))


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, Fraction):
        return float(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    return v


def _units(schedule: ParameterSchedule, x) -> int:
    return schedule.alpha.to_units(x)


def _signed(schedule: ParameterSchedule, u: int) -> int:
    m = schedule.alpha.modulus
    u %= m
    return u - m if u > m // 2 else u


def circle_norm(v: float) -> float:
    return abs(v - math.floor(v + 0.5))


# ---- first escape from the window sets -------------------------------------------


@dataclass(frozen=True)
class FirstEscape:
    steps: int
    point: CirclePoint
    point_units: int


def first_escape(x, level: int, schedule: ParameterSchedule) -> FirstEscape:
    """Least ``n >= 0`` with ``x + n alpha`` outside the windows of levels ``1..level-1``.

    Inside a level-a window with index j the orbit stays in that chain for
    the next ``2 N_a - j`` steps at least, so the scan jumps by the largest
    such remainder instead of stepping one by one.
    """
    if not 2 <= level <= schedule.internal_depth + 1:
        raise ValueError(f"level must lie in [2, {schedule.internal_depth + 1}]")
    a = schedule.alpha
    cur = _units(schedule, x)
    n = 0
    while True:
        jump = 0
        for k in range(1, level):
            j = schedule.window_index(cur, k)
            if j is not None:
                jump = max(jump, schedule.level(k).chain_length - j)
        if jump == 0:
            return FirstEscape(n, CirclePoint(a.to_float(cur)), cur)
        n += jump
        cur = a.orbit_units(cur, jump)


def outside_windows(schedule: ParameterSchedule, x_units: int, k_hi: int) -> bool:
    return k_hi < 1 or not schedule.in_windows(x_units, 1, k_hi)


# ---- the two lemmas ----------------------------------------------------------------


def _cocycle(schedule: ParameterSchedule, level: int) -> CocycleFunction:
    if not 1 <= level <= schedule.depth:
        raise ValueError(f"level {level} is not part of the depth-{schedule.depth} cocycle")
    return CocycleFunction(schedule)


def check_lemma_zero_sum(x, m: int, i: int, schedule: ParameterSchedule) -> float:
    """``|H_m^{h_i}(x)|`` for x and ``x + m alpha`` off the level-i windows or in the first one."""
    f = _cocycle(schedule, i)
    if m < 0:
        raise HypothesisViolated("m must be >= 0")
    xu = _units(schedule, x)
    for label, u in (("x", xu), ("x + m alpha", schedule.alpha.orbit_units(xu, m))):
        j = schedule.window_index(u, i)
        if j not in (None, 0):
            raise HypothesisViolated(f"{label} lies in level-{i} window {j}")
    return abs(birkhoff_sum(f, xu, m, levels=[i]))


def check_lemma_small(x, m: int, k: int, j: int, schedule: ParameterSchedule) -> float:
    """``||H_m^{h_j}(x)||`` when ``||m alpha|| < l_k`` and both ends share a level-j window."""
    if not 1 <= j <= k - 1:
        raise HypothesisViolated("need 1 <= j <= k - 1")
    f = _cocycle(schedule, j)
    a = schedule.alpha
    if m < 0:
        raise HypothesisViolated("m must be >= 0")
    if m > 0 and a.circle_units(m * a.units % a.modulus, 0) >= schedule.level(k).separation_units:
        raise HypothesisViolated(f"||m alpha|| is not below the level-{k} separation")
    xu = _units(schedule, x)
    w0 = schedule.window_index(xu, j)
    w1 = schedule.window_index(a.orbit_units(xu, m), j)
    if w0 is None or w0 != w1:
        raise HypothesisViolated(f"x and x + m alpha are not in one level-{j} window")
    return circle_norm(birkhoff_sum(f, xu, m, levels=[j]))


def small_return_times(schedule: ParameterSchedule, k: int, limit: int = 10 ** 15) -> list[int]:
    """Positive ``m <= limit`` of the form ``t q_j`` with ``t ||q_j alpha|| < l_k``."""
    a = schedule.alpha
    sep = schedule.level(k).separation_units
    out = set()
    j = 0
    while True:
        try:
            q, eta = a.denominator(j), a.eta(j)
        except IndexError:
            break
        if q > limit:
            break
        t = 1
        while t * eta < sep and t * q <= limit:
            out.add(t * q)
            t += 1
        j += 1
    return sorted(out)


# ---- witnesses ----------------------------------------------------------------------


def _skew_image(f: CocycleFunction, x_units: int, y: float, n: int, levels) -> tuple[int, float]:
    """``T^n (x, y)`` with the second coordinate unreduced."""
    return f.alpha.orbit_units(x_units, n), y + birkhoff_sum(f, x_units, n, levels=levels)


def _find_pair(schedule, n1_range, n2_range, offset_units, k_hi):
    a = schedule.alpha
    n1 = None
    for t in range(n1_range[0], n1_range[1] + 1):
        u = a.orbit_units(0, t)
        if outside_windows(schedule, u, k_hi) and outside_windows(schedule, (u + offset_units) % a.modulus, k_hi):
            n1 = t
            break
    if n1 is None:
        return None
    for t in range(n2_range[1], max(n2_range[0], n1 + 1) - 1, -1):
        u = a.orbit_units(0, t)
        if outside_windows(schedule, u, k_hi) and outside_windows(schedule, (u + offset_units) % a.modulus, k_hi):
            return n1, t
    return None


def _separation_pair(schedule: ParameterSchedule, k: int, n2_lo: int, n2_hi: int,
                     zero: bool, scale: int, tag: str):
    f = CocycleFunction(schedule)
    lv = schedule.level(k)
    a = schedule.alpha
    offset = lv.window_units + lv.separation_units // 2
    found = _find_pair(schedule, (0, lv.return_time - 1), (n2_lo, n2_hi), offset, k - 1)
    if found is None:
        raise WitnessNotFound(f"{tag}: no admissible (n1, n2) at level {k}")
    n1, n2 = found
    n = n2 - n1
    levels = () if zero else f.levels
    x1 = a.orbit_units(0, n1)
    x2 = (x1 + offset) % a.modulus
    _, y1 = _skew_image(f, x1, 0.0, n, levels)
    _, y2 = _skew_image(f, x2, 0.0, n, levels)
    dH = y1 - y2
    return dict(f=f, n1=n1, n2=n2, n=n, offset=offset, dH=dH,
                initial=a.to_float(offset), scaled=scale * dH)


def nonequicontinuity_witness(schedule: ParameterSchedule, k: int = 2, *, zero_cocycle: bool = False,
                              step_budget: int = DEFAULT_STEP_BUDGET) -> WitnessReport:
    """Two points ``delta_k + l_k/2`` apart whose images end up a definite distance apart."""
    if not 2 <= k <= schedule.depth:
        raise ValueError(f"k must lie in [2, {schedule.depth}]")
    lv = schedule.level(k)
    if lv.plateau // 2 > step_budget:
        raise StepBudgetExceeded(f"N_k/2 = {lv.plateau // 2} steps exceeds the budget")
    half = lv.plateau // 2
    r = _separation_pair(schedule, k, half - lv.return_time, half - 1, zero_cocycle, 1,
                         "nonequicontinuity")
    f = r["f"]
    sep = circle_norm(r["dH"])
    slack = f.tail_bound + FP_PER_TERM * 2 * r["n"]
    lower, upper = 16 / 90, 65 / 90
    details = {
        "initial_distance": r["initial"],
        "expected_initial_distance": lv.window + lv.separation / 2,
        "final_distance": r["initial"] + sep,
        "raw_difference": r["dH"],
        "zero_cocycle": zero_cocycle,
    }
    rep = WitnessReport("nonequicontinuity", {"k": k, "n1": r["n1"], "n2": r["n2"], "n": r["n"],
                                              "x_prime": r["initial"]},
                        sep, lower, upper, None, slack, details)
    return _settle(rep, sep)


def _settle(rep: WitnessReport, value: float) -> WitnessReport:
    return WitnessReport(rep.tag, rep.inputs, rep.achieved, rep.lower, rep.upper,
                         rep.within(value), rep.slack, rep.details)


def nonunique_ergodicity_witness(schedule: ParameterSchedule, k: int = 2, *, start=(0.0, 0.0),
                                 zero_cocycle: bool = False, step_budget: int = DEFAULT_STEP_BUDGET,
                                 chunk: int = 1 << 20) -> WitnessReport:
    """``(2/N_k) sum_{i < N_k/2} f(T^i start)`` for ``f = +1`` on ``y < 1/2`` and ``-1`` above."""
    if not 1 <= k <= schedule.depth:
        raise ValueError(f"k must lie in [1, {schedule.depth}]")
    N = schedule.level(k).plateau
    steps = N // 2
    if steps > step_budget:
        raise StepBudgetExceeded(f"{steps} steps exceeds the budget")
    f = CocycleFunction(schedule)
    x0, y0 = start
    path = CocyclePath(f, x0, steps, levels=() if zero_cocycle else None)
    total = 0
    for m0 in range(0, steps, chunk):
        m = np.arange(m0, min(steps, m0 + chunk))
        y = np.mod(y0 + path.values(m), 1.0)
        low = int(np.count_nonzero(y < 0.5))
        total += low - (len(m) - low)
    avg = 2.0 * total / N
    rep = WitnessReport("nonunique-ergodicity", {"k": k, "steps": steps, "start": list(start)},
                        avg, 0.18, None, None, f.tail_bound + FP_PER_TERM,
                        {"zero_cocycle": zero_cocycle, "plus_minus_total": total})
    return _settle(rep, avg)


def tbeta_witness(schedule: ParameterSchedule, k: int | None = None, s: int = 1, beta="sqrt2") -> WitnessReport:
    """The perturbed-system separation argument, run at the deepest available level.

    The argument needs ``k > p + 10`` with ``10^p <= |s| < 10^{p+1}``; when
    that fails the report is a diagnostic (``passed is None``) comparing the
    separation with the two-sided estimate the argument would give.
    """
    if s == 0:
        raise ValueError("s must be a nonzero integer")
    k = schedule.depth if k is None else k
    if not 2 <= k <= schedule.depth:
        raise ValueError(f"k must lie in [2, {schedule.depth}]")
    p = len(str(abs(s))) - 1
    pre = k > p + 10
    lv = schedule.level(k)
    M = lv.return_time
    base = Fraction(10) ** (k - p - 2) * M
    n2_lo = max(0, math.ceil(base - M))
    n2_hi = math.ceil(base) - 1
    tenth = Fraction(10) ** (-p - 2)
    lower = abs(s) * (tenth - Fraction(2, 10 ** k) - Fraction(2, 9) * tenth)
    upper = abs(s) * (tenth + Fraction(2, 9) * tenth)
    inputs = {"k": k, "s": s, "beta": str(beta), "p": p, "n2_window": [n2_lo, n2_hi]}
    try:
        r = _separation_pair(schedule, k, n2_lo, n2_hi, False, s, "tbeta")
    except WitnessNotFound as exc:
        return WitnessReport("tbeta", inputs, float("nan"), float(lower), float(upper), None, 0.0,
                             {"precondition_holds": pre, "diagnostic": str(exc)})
    value = abs(r["scaled"])
    f = r["f"]
    slack = abs(s) * (f.tail_bound + FP_PER_TERM * 2 * r["n"])
    inputs.update(n1=r["n1"], n2=r["n2"], n=r["n"], x_prime=r["initial"])
    details = {
        "precondition_holds": pre,
        "circle_separation": circle_norm(r["scaled"]),
        "initial_distance": r["initial"],
        "bracket_holds": float(lower) - slack <= value <= float(upper) + slack,
        "asserted_bound": 1 / 200,
    }
    if pre:
        rep = WitnessReport("tbeta", inputs, circle_norm(r["scaled"]), 1 / 200, None, None, slack, details)
        return _settle(rep, rep.achieved)
    return WitnessReport("tbeta", inputs, value, float(lower), float(upper), None, slack, details)


# ---- probe samples ---------------------------------------------------------------------


def tent_probe_sample(schedule: ParameterSchedule, times: Sequence[int] = (150, 1500, 15000),
                      peaks: Sequence[float] = (0.0, 0.25, 0.5)) -> SampleSet:
    """Families of points whose orbits reach a level-1 tent at a chosen time.

    Family t holds ``(u - t alpha, t_index / len(times))`` for offsets u
    giving tent heights ``peaks`` (times 1/N_1); its members agree along the
    orbit until time t and then split, so spanning counts under the Bowen
    metric step up as the horizon passes each t while averaged metrics do
    not.  Fibre coordinates keep the families a third of the circle apart.
    """
    a = schedule.alpha
    lv = schedule.level(1)
    pts = []
    for j, t in enumerate(times):
        for p in peaks:
            u = int(round(lv.bump_units * (1.0 - p)))
            x = a.to_float((u - t * a.units) % a.modulus)
            pts.append((x, j / len(times)))
    return SampleSet(np.array(pts), "probe", params={"times": list(times), "peaks": list(peaks)})


# ---- minimality probe ------------------------------------------------------------------


@dataclass(frozen=True)
class ProbeResult:
    hit_time: int | None
    closest: float
    scanned: int

    @property
    def exhausted(self) -> bool:
        return self.hit_time is None


def minimality_probe(system: DynamicalSystem, start, target, eps: float,
                     budget: int = 10 ** 6, chunk: int = 1 << 16) -> ProbeResult:
    """First ``n <= budget`` with ``d(T^n start, target) < eps``; evidence, not proof."""
    if not 0 <= budget <= MAX_PROBE_BUDGET:
        raise ValueError(f"budget must lie in [0, {MAX_PROBE_BUDGET}]")
    tgt = system.as_states([target])[0]
    best = math.inf
    scanned = 0
    for m0, block in system.orbit_chunks([start], budget + 1, chunk):
        d = np.asarray(system.dist(block[:, 0], tgt[None, :]))
        scanned = m0 + len(d)
        hits = np.flatnonzero(d < eps)
        if hits.size:
            return ProbeResult(m0 + int(hits[0]), float(d[hits[0]]), m0 + int(hits[0]) + 1)
        best = min(best, float(d.min()))
    return ProbeResult(None, best, scanned)


__all__ = [
    "FP_PER_TERM", "HypothesisViolated", "WitnessNotFound", "StepBudgetExceeded",
    "WitnessReport", "FirstEscape", "first_escape", "outside_windows", "circle_norm",
    "check_lemma_zero_sum", "check_lemma_small", "small_return_times",
    "nonequicontinuity_witness", "nonunique_ergodicity_witness", "tbeta_witness",
    "ProbeResult", "minimality_probe", "tent_probe_sample",
]
