"""Explicit finite covers of the torus for the tent skew product.

For a tolerance ``eps`` and a horizon ``n`` with ``2 N_k < n <= 2 N_{k+1}``
the torus is cut by five independent partitions of the base and fibre:

* ``S``: ``floor(c x)`` for both coordinates, ``c = ceil(1/eps)``;
* ``P``: ``floor(c_delta x)`` joined with buckets of the fractional parts of
  first-escape Birkhoff sums of the low levels;
* ``Q``: the level-k tent neighbourhoods ``i alpha + [-gamma_k, gamma_k]``
  cut by index block and by offset, plus their complement;
* ``I``: the same for level ``k + 1``.

A cell is a tuple of the five labels.  All base-circle arithmetic is done
in exact grid units because the offset cells are far narrower than a float
can resolve near 1.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
import math
import random
from typing import Iterable, NamedTuple, Sequence

from .cocycle import CocycleFunction, CocyclePath, birkhoff_sum, mean_path_gap
from .oracle import FP_PER_TERM, first_escape
from .schedule import ParameterSchedule


class EmptyCellSample(ValueError):
    pass


# ---- plan ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoverPlan:
    eps: float
    q: int
    delta_eps: Fraction
    c_eps: int
    c_delta: int
    C_eps: int
    K_eps: int | None
    step_bound: int                 # the largest orbit length the delta certificate spans
    depth_limited: bool
    lipschitz: Fraction             # sum of the Lipschitz constants of h_1..h_q

    def summary(self) -> dict:
        return {
            "eps": self.eps, "q": self.q, "delta_eps": float(self.delta_eps),
            "c_eps": self.c_eps, "c_delta": self.c_delta,
            "C_eps_log10": math.log10(self.C_eps), "K_eps": self.K_eps,
            "step_bound": self.step_bound, "depth_limited": self.depth_limited,
        }


def tail_levels_for(eps: float, budget: Fraction) -> int:
    """Least ``q >= 1`` with ``budget / 2^q < eps`` and ``10^-q < eps``."""
    e = Fraction(eps)
    q = 1
    while not (budget / 2 ** q < e and Fraction(1, 10 ** q) < e):
        q += 1
    return q


def build_cover_plan(eps: float, schedule: ParameterSchedule) -> CoverPlan:
    """Constants of the cover at tolerance ``eps``.

    ``delta_eps`` comes from the Lipschitz bound: for ``||x - y|| < delta``
    and ``s`` steps, ``sum_{i<=q} |H_s^{h_i}(x) - H_s^{h_i}(y)| <= s * delta
    * sum_i 1/(N_i gamma_i)``; solving for ``eps`` at the largest ``s`` gives
    it in closed form.  Levels past the schedule's internal depth are not
    available, which makes the plan depth-limited: the step bound then uses
    the deepest return time and ``K_eps`` is None.
    """
    if not 0 < eps < 0.01:
        raise ValueError("eps must lie in (0, 1/100)")
    q = tail_levels_for(eps, schedule.budget)
    inner = schedule.internal_depth
    depth_limited = q + 2 > inner
    steps_level = min(q + 1, inner)
    step_bound = schedule.level(steps_level).return_time - 1
    mod = schedule.alpha.modulus
    lip = Fraction(0)
    for i in range(1, min(q, schedule.depth) + 1):
        lv = schedule.level(i)
        lip += Fraction(mod, lv.plateau * lv.bump_units)
    e = Fraction(eps)
    delta = e / (step_bound * lip)
    c_eps = math.ceil(1 / e)
    c_delta = math.ceil(1 / delta)
    K = None if depth_limited else 2 * schedule.level(q + 2).plateau
    return CoverPlan(eps, q, delta, c_eps, c_delta, 100 * c_eps ** 11 * c_delta, K,
                     step_bound, depth_limited, lip)


def delta_certificate(plan: CoverPlan, schedule: ParameterSchedule, pairs: int = 200,
                      seed: int = 0) -> float:
    """Largest ``sum_{i<=q} |H_s^{h_i}(x) - H_s^{h_i}(y)|`` seen over random close pairs.

    Half the base points sit inside level-1 tents, where the sums move.
    """
    f = CocycleFunction(schedule)
    levels = [i for i in f.levels if i <= plan.q]
    a = schedule.alpha
    rng = random.Random(seed)
    d_max = max(1, int(plan.delta_eps * a.modulus) - 1)
    lv1 = schedule.level(1)
    worst = 0.0
    for p in range(pairs):
        if p % 2:
            x = rng.randrange(a.modulus)
        else:
            x = (rng.randrange(lv1.chain_length) * a.units + rng.randint(-lv1.bump_units, lv1.bump_units))
        y = (x + rng.randint(-d_max, d_max)) % a.modulus
        x %= a.modulus
        s = rng.randint(0, plan.step_bound)
        gap = sum(abs(birkhoff_sum(f, x, s, levels=[i]) - birkhoff_sum(f, y, s, levels=[i])) for i in levels)
        worst = max(worst, gap)
    return worst


# ---- cells ------------------------------------------------------------------------------


class CellKey(NamedTuple):
    sx: int
    p1: int
    p2: int
    p3: int
    q: tuple[int, int] | None       # None is the complement cell Q_0
    i: tuple[int, int] | None       # None is I_0
    sy: int

    @property
    def base(self) -> tuple:
        return self[:6]


@dataclass(frozen=True)
class TentCells:
    """``i alpha + [gamma s/c^2, gamma (s+1)/c^2]`` for ``i`` in index block r, plus the rest."""

    level: int
    plateau: int
    gamma_units: int
    i_lo: int
    i_hi: int
    c: int

    @property
    def r_range(self) -> tuple[int, int]:
        return (math.floor(self.i_lo * self.c / self.plateau), math.floor(self.i_hi * self.c / self.plateau))

    @property
    def s_range(self) -> tuple[int, int]:
        return (-self.c ** 2, self.c ** 2 - 1)

    @property
    def count(self) -> int:
        (r0, r1), (s0, s1) = self.r_range, self.s_range
        return 1 + (r1 - r0 + 1) * (s1 - s0 + 1)

    def block(self, r: int) -> tuple[int, int]:
        """Indices ``ceil(r N / c) <= i < (r + 1) N / c`` clipped to the range."""
        lo = max(self.i_lo, -((-r * self.plateau) // self.c))
        hi = min(self.i_hi, -((-(r + 1) * self.plateau) // self.c) - 1)
        return lo, hi

    def subinterval(self, s: int) -> tuple[int, int]:
        """Offsets (units) of sub-cell s; the ends are the exact floor/ceil of the real ends."""
        c2 = self.c ** 2
        return (-((-self.gamma_units * s) // c2), (self.gamma_units * (s + 1)) // c2)

    def label(self, schedule: ParameterSchedule, x_units: int) -> tuple[int, int] | None:
        a = schedule.alpha
        i, d = a.nearest(x_units, self.i_lo, self.i_hi)
        if d > self.gamma_units:
            return None
        off = (x_units - i * a.units) % a.modulus
        if off > a.modulus // 2:
            off -= a.modulus
        s = min((off * self.c ** 2) // self.gamma_units, self.c ** 2 - 1)
        return (i * self.c // self.plateau, s)


@dataclass
class CoverFamily:
    n: int
    eps: float
    k: int
    plan: CoverPlan
    schedule: ParameterSchedule
    Q: TentCells
    I: TentCells
    short_horizon: bool            # n <= 2 c N_k
    counts: dict = field(default_factory=dict)
    bounds: dict = field(default_factory=dict)

    @property
    def cocycle(self) -> CocycleFunction:
        return CocycleFunction(self.schedule)

    def _levels(self, lo: int, hi: int) -> list[int]:
        return [i for i in range(lo, hi + 1) if i <= self.schedule.depth]

    @property
    def escape_levels(self) -> tuple[list[int], list[int]]:
        q = self.plan.q
        return self._levels(1, q), self._levels(q + 1, self.k - 1)

    def _bucket(self, x_units: int, levels: Sequence[int], escape_level: int) -> int:
        if not levels:
            return 0
        esc = first_escape(x_units, escape_level, self.schedule)
        v = birkhoff_sum(self.cocycle, x_units, esc.steps, levels=levels)
        return min(int((v % 1.0) * self.plan.c_eps), self.plan.c_eps - 1)

    def key(self, x_units: int, y: float) -> CellKey:
        a = self.schedule.alpha
        x_units %= a.modulus
        c = self.plan.c_eps
        low, mid = self.escape_levels
        p1 = x_units * self.plan.c_delta // a.modulus
        p2 = self._bucket(x_units, low, self.plan.q + 1)
        p3 = self._bucket(x_units, mid, self.k)
        y = y % 1.0
        return CellKey(x_units * c // a.modulus, p1, p2, p3,
                       self.Q.label(self.schedule, x_units), self.I.label(self.schedule, x_units),
                       min(int(y * c), c - 1))

    def summary(self) -> dict:
        return {"n": self.n, "k": self.k, "eps": self.eps, "short_horizon": self.short_horizon,
                "counts": {k: v for k, v in self.counts.items()},
                "bounds": {k: v for k, v in self.bounds.items()},
                "within_bounds": all(self.counts[f] <= self.bounds[f] for f in self.bounds)}


def build_cover(n: int, eps: float, schedule: ParameterSchedule, plan: CoverPlan | None = None) -> CoverFamily:
    plan = build_cover_plan(eps, schedule) if plan is None else plan
    k = schedule.level_for_horizon(n)
    if k + 1 > schedule.internal_depth:
        raise ValueError(f"level {k + 1} parameters are not available")
    c = plan.c_eps
    lv, nxt = schedule.level(k), schedule.level(k + 1)
    N = lv.plateau
    short = n <= 2 * c * N
    if short:
        Q = TentCells(k, N, lv.bump_units, -2 * c * N, (2 + 2 * c) * N - 1, c)
    else:
        Q = TentCells(k, N, lv.bump_units, 0, 2 * N - 1, c)
    I = TentCells(k + 1, nxt.plateau, nxt.bump_units, -2 * nxt.plateau, 2 * nxt.plateau, c)
    fam = CoverFamily(n, eps, k, plan, schedule, Q, I, short)
    low, mid = fam.escape_levels
    nP = plan.c_delta * c * (c if mid else 1)
    counts = {"S": c, "P": nP, "Q": Q.count, "I": I.count}
    counts["T"] = c * nP * Q.count * I.count * c
    fam.counts = counts
    fam.bounds = {"P": plan.c_delta * c ** 2, "Q": 10 * c ** 4, "I": 10 * c ** 3, "T": plan.C_eps}
    return fam


# ---- pair samplers --------------------------------------------------------------------


@dataclass(frozen=True)
class CellPair:
    family: str                   # "P", "Q", "I" or "T"
    x1: int
    y1: float
    x2: int
    y2: float


def _tent_point(cells: TentCells, schedule: ParameterSchedule, rng: random.Random,
                r: int, s: int) -> int:
    a = schedule.alpha
    i_lo, i_hi = cells.block(r)
    u_lo, u_hi = cells.subinterval(s)
    i = rng.randint(i_lo, i_hi)
    return (i * a.units + rng.randint(u_lo, u_hi)) % a.modulus


def _active_blocks(cells: TentCells, n: int) -> list[int]:
    """Blocks r whose indices hit a tent visit time inside ``[-(2N - 1), n - 1]``."""
    rs = []
    for r in range(cells.r_range[0], cells.r_range[1] + 1):
        lo, hi = cells.block(r)
        # x = i alpha + u visits the tent at time -i
        if lo <= hi and -hi <= n - 1 and -lo >= -(2 * cells.plateau - 1):
            rs.append(r)
    return rs


def sample_tent_pairs(cover: CoverFamily, family: str, count: int, seed: int = 0) -> list[CellPair]:
    """Pairs inside one ``Q``- or ``I``-cell; half from blocks the horizon actually sees."""
    cells = cover.Q if family == "Q" else cover.I
    rng = random.Random(seed)
    sch = cover.schedule
    a = sch.alpha
    active = _active_blocks(cells, cover.n) or [cells.r_range[0]]
    out = []
    while len(out) < count:
        if len(out) % 10 == 9:
            # complement cell: a point off every tent and a close neighbour
            x1 = rng.randrange(a.modulus)
            x2 = (x1 + rng.randint(-(a.modulus >> 40), a.modulus >> 40)) % a.modulus
            if cells.label(sch, x1) is None and cells.label(sch, x2) is None:
                out.append(CellPair(family, x1, 0.0, x2, 0.0))
            continue
        if len(out) % 2:
            r = rng.choice(active)
        else:
            r = rng.randint(*cells.r_range)
        s = rng.randint(*cells.s_range)
        x1 = _tent_point(cells, sch, rng, r, s)
        x2 = _tent_point(cells, sch, rng, r, s)
        out.append(CellPair(family, x1, 0.0, x2, 0.0))
    return out


def sample_cell_pairs(cover: CoverFamily, count: int, seed: int = 0, family: str = "T",
                      max_tries: int | None = None) -> list[CellPair]:
    """Pairs with equal full cell keys (``family="T"``) or equal ``P`` labels (``"P"``).

    A cell is at most ``1/c_delta`` wide in x, so the second point is a
    small perturbation of the first; the first is drawn near a tent of a
    random level half the time.  Pairs whose keys differ are dropped.
    """
    rng = random.Random(seed)
    sch = cover.schedule
    a = sch.alpha
    width = a.modulus // cover.plan.c_delta
    c = cover.plan.c_eps
    out = []
    tries = 0
    max_tries = 20 * count if max_tries is None else max_tries
    while len(out) < count and tries < max_tries:
        tries += 1
        if tries % 2:
            lv = sch.level(rng.randint(1, sch.depth))
            t = rng.randint(-(2 * lv.plateau - 1), min(cover.n, 2 * lv.plateau) - 1)
            x1 = (-t * a.units + rng.randint(-lv.bump_units, lv.bump_units)) % a.modulus
        else:
            x1 = rng.randrange(a.modulus)
        x2 = (x1 + rng.randint(-width, width)) % a.modulus
        y1 = rng.random()
        y2 = (math.floor(y1 * c) + rng.random()) / c
        k1, k2 = cover.key(x1, y1), cover.key(x2, y2)
        same = k1 == k2 if family == "T" else k1[1:4] == k2[1:4]
        if same:
            out.append(CellPair(family, x1, y1, x2, y2))
    return out


# ---- verification ------------------------------------------------------------------------


FAMILY_BOUNDS = {"P": 6, "Q": 4, "I": 4, "T": 17}


@dataclass
class CoverCheck:
    family: str
    pairs: int
    max_gap: float
    bound: float
    slack: float
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.max_gap <= self.bound + self.slack

    def to_dict(self) -> dict:
        return {"family": self.family, "pairs": self.pairs, "max_gap": self.max_gap,
                "bound": self.bound, "slack": self.slack, "passed": self.passed, "note": self.note}


def _family_levels(cover: CoverFamily, family: str) -> list[int]:
    if family == "P":
        return cover._levels(1, cover.k - 1)
    if family == "Q":
        return cover._levels(cover.k, cover.k)
    if family == "I":
        return cover._levels(cover.k + 1, cover.k + 1)
    return list(cover.cocycle.levels)


def pair_gap(cover: CoverFamily, pair: CellPair) -> float:
    """The averaged gap checked for the pair's family over the cover's horizon.

    For ``P``, ``Q`` and ``I`` this is ``(1/n) sum_m ||H_m^g(x1) - H_m^g(x2)||``
    for the family's levels g; for ``T`` it is the full mean orbit distance
    ``||x1 - x2|| + (1/n) sum_m ||y1 - y2 + H_m(x1) - H_m(x2)||``.
    """
    f = cover.cocycle
    levels = _family_levels(cover, pair.family)
    n = cover.n
    a = cover.schedule.alpha
    if pair.family != "T" and not levels:
        return 0.0
    p1 = CocyclePath(f, pair.x1, n, levels=levels)
    p2 = CocyclePath(f, pair.x2, n, levels=levels)
    if pair.family != "T":
        return mean_path_gap(p1, p2, n, circle=True)
    dx = a.circle_units(pair.x1, pair.x2) / a.modulus
    return dx + mean_path_gap(p1, p2, n, offset=pair.y1 - pair.y2, circle=True)


def verify_cover(cover: CoverFamily, pairs: Iterable[CellPair]) -> dict[str, CoverCheck]:
    """Per-family maxima of :func:`pair_gap` against ``bound * eps`` plus slack."""
    by_family: dict[str, list[float]] = {}
    for pr in pairs:
        by_family.setdefault(pr.family, []).append(pair_gap(cover, pr))
    if not by_family:
        raise EmptyCellSample("no pairs to check")
    f = cover.cocycle
    out = {}
    for fam, gaps in sorted(by_family.items()):
        note = ""
        if not _family_levels(cover, fam) and fam != "T":
            note = f"level {cover.k + 1} is past the cocycle depth, so this component vanishes"
        out[fam] = CoverCheck(fam, len(gaps), max(gaps), FAMILY_BOUNDS[fam] * cover.eps,
                              f.tail_bound + FP_PER_TERM, note)
    return out


__all__ = [
    "CoverPlan", "build_cover_plan", "tail_levels_for", "delta_certificate",
    "CellKey", "TentCells", "CoverFamily", "build_cover",
    "CellPair", "sample_tent_pairs", "sample_cell_pairs",
    "CoverCheck", "FAMILY_BOUNDS", "pair_gap", "verify_cover", "EmptyCellSample",
]
