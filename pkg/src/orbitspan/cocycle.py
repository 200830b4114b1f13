"""The tent cocycle ``h = h_1 + ... + h_d`` and its Birkhoff sums.

``h_k`` is a signed train of tents of radius ``bump[k]`` centred at the
first ``2 N_k`` orbit points of 0: height ``+1/N_k`` on the first half,
``-1/N_k`` on the second.  Along an orbit ``x + m alpha`` the level-k term
is nonzero only ``2 N_k`` steps after a *visit*, a time ``t`` with
``x + t alpha`` inside ``[-bump, bump]``.  Visits are rare and found by
exact nearest-point queries, so Birkhoff sums cost O(#visits * log) instead
of O(n).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
import math
from typing import Callable, Iterable, Sequence

import numpy as np

from .diophantine import ContinuedFractionAlpha
from .schedule import ParameterSchedule

_TOP_BITS = 128


def to_units(alpha: ContinuedFractionAlpha, x) -> int:
    return alpha.to_units(x)


# ---- float orbit coordinates ---------------------------------------------------


def rotation_orbit_floats(alpha: ContinuedFractionAlpha, x_units: int, m0: int, count: int) -> np.ndarray:
    """``(x + m alpha) mod 1`` as float64 for ``m0 <= m < m0 + count``.

    The 128-bit state is split into two 64-bit words; the low word wraps in
    uint64 arithmetic and its carries are recovered exactly by rounding,
    so points far along the orbit stay accurate to the last float bit.
    """
    if count <= 0:
        return np.empty(0)
    shift = _TOP_BITS - alpha.bits
    if shift >= 0:
        X = (x_units % alpha.modulus) << shift
        A = alpha.units << shift
    else:
        X = (x_units % alpha.modulus) >> -shift
        A = alpha.units >> -shift
    Q = 1 << _TOP_BITS
    X = (X + m0 * A) % Q
    mask = (1 << 64) - 1
    x_top, x_lo = np.uint64(X >> 64), np.uint64(X & mask)
    a_top, a_lo = np.uint64(A >> 64), np.uint64(A & mask)
    j = np.arange(count, dtype=np.uint64)
    with np.errstate(over="ignore"):
        lo = x_lo + j * a_lo
        approx = float(x_lo) + j.astype(np.float64) * float(a_lo)
        carry = np.rint((approx - lo.astype(np.float64)) / 2.0 ** 64).astype(np.uint64)
        top = x_top + j * a_top + carry
    out = top.astype(np.float64) * 2.0 ** -64 + lo.astype(np.float64) * 2.0 ** -128
    out[out >= 1.0] -= 1.0
    return out


# ---- the cocycle ----------------------------------------------------------------


@dataclass(frozen=True)
class CocycleFunction:
    """``h_1 + ... + h_depth`` for a schedule; everything past ``depth`` is dropped."""

    schedule: ParameterSchedule
    depth: int | None = None

    def __post_init__(self):
        if self.depth is None:
            object.__setattr__(self, "depth", self.schedule.depth)
        if not 1 <= self.depth <= self.schedule.depth:
            raise ValueError("depth out of range for schedule")

    @property
    def alpha(self) -> ContinuedFractionAlpha:
        return self.schedule.alpha

    @property
    def tail_bound(self) -> float:
        """Sup of the dropped tail ``sum_{i > depth} |h_i|``."""
        return 1.0 / (9 * 10 ** self.depth)

    @property
    def levels(self) -> tuple[int, ...]:
        return tuple(range(1, self.depth + 1))

    def level_value(self, k: int, x) -> float:
        """``h_k(x)`` by locating the nearest tent centre among the first ``2 N_k``."""
        lv = self.schedule.level(k)
        a = self.alpha
        xu = a.to_units(x)
        i, d = a.nearest(xu, 0, lv.chain_length - 1)
        if d >= lv.bump_units:
            return 0.0
        v = (lv.bump_units - d) / lv.bump_units / lv.plateau
        return v if i < lv.plateau else -v

    def __call__(self, x, levels: Iterable[int] | None = None):
        levels = self.levels if levels is None else tuple(levels)
        if np.ndim(x) == 0:
            return sum(self.level_value(k, x) for k in levels)
        arr = np.asarray(x, dtype=float)
        flat = [sum(self.level_value(k, float(v)) for k in levels) for v in arr.ravel()]
        return np.array(flat).reshape(arr.shape)


def h_eval(f: CocycleFunction, x, levels: Iterable[int] | None = None):
    return f(x, levels)


# ---- visits and piecewise-linear Birkhoff paths ---------------------------------


@dataclass(frozen=True)
class Visit:
    level: int
    time: int
    weight: float      # tent height at the visit, signed +1/N side
    plateau: int


def level_visits(f: CocycleFunction, k: int, x_units: int, t_lo: int, t_hi: int) -> list[Visit]:
    """Times ``t`` in ``[t_lo, t_hi]`` with ``x + t alpha`` strictly inside the level-k tent."""
    if t_hi < t_lo:
        return []
    lv = f.schedule.level(k)
    out = []
    for t, off in f.alpha.visits(x_units, lv.bump_units - 1, t_lo, t_hi):
        w = (lv.bump_units - abs(off)) / lv.bump_units / lv.plateau
        out.append(Visit(k, t, w, lv.plateau))
    return out


def _block_count(m, t: int, a: int, b: int):
    """``#{a <= i < b : 0 <= t + i < m}`` elementwise in m."""
    lo = max(a, -t)
    return np.clip(np.minimum(b, np.asarray(m) - t) - lo, 0, None)


def visit_contribution(v: Visit, m):
    """Contribution of one visit to ``H_m`` (array in m)."""
    N = v.plateau
    c = _block_count(m, v.time, 0, N) - _block_count(m, v.time, N, 2 * N)
    return v.weight * c.astype(np.float64)


def _visit_breaks(v: Visit) -> tuple[int, ...]:
    t, N = v.time, v.plateau
    return (max(t, 0), t + N, max(t + N, 0), t + 2 * N)


class CocyclePath:
    """``m -> H_m(x)`` for ``0 <= m <= n`` as a sum of visit ramps."""

    def __init__(self, f: CocycleFunction, x, n: int, levels: Iterable[int] | None = None,
                 scale: float = 1.0):
        self.f = f
        self.n = int(n)
        self.levels = f.levels if levels is None else tuple(levels)
        self.x_units = f.alpha.to_units(x)
        self.scale = scale
        vs: list[Visit] = []
        for k in self.levels:
            N = f.schedule.level(k).plateau
            vs.extend(level_visits(f, k, self.x_units, -(2 * N - 1), self.n - 1))
        self.visits = sorted(vs, key=lambda v: (v.time, v.level))

    def values(self, m) -> np.ndarray:
        m = np.asarray(m, dtype=np.int64)
        out = np.zeros(m.shape)
        if m.size == 0:
            return out
        lo, hi = int(m.min()), int(m.max())
        for v in self.visits:
            if v.time >= hi:
                continue
            if v.time >= 0 and v.time + 2 * v.plateau <= lo:
                continue
            out += visit_contribution(v, m)
        return self.scale * out

    def value(self, m: int) -> float:
        return float(self.values(np.array([m]))[0])

    def breakpoints(self) -> set[int]:
        out = {0, self.n}
        for v in self.visits:
            out.update(b for b in _visit_breaks(v) if 0 < b < self.n)
        return out


def birkhoff_visits(f: CocycleFunction, x_units: int, n: int, levels: Sequence[int]) -> float:
    """``H_n`` from boundary visits only; visits with whole blocks in ``[0, n)`` add 0."""
    total = 0.0
    for k in levels:
        N = f.schedule.level(k).plateau
        lo, hi = -(2 * N - 1), n - 1
        if n <= 4 * N:
            ranges = [(lo, hi)]
        else:
            ranges = [(lo, -1), (n - 2 * N + 1, hi)]
        for a, b in ranges:
            for v in level_visits(f, k, x_units, a, b):
                total += float(visit_contribution(v, np.array([n]))[0])
    return total


def birkhoff_sum(g, x, n: int, alpha: ContinuedFractionAlpha | None = None,
                 levels: Iterable[int] | None = None, chunk: int = 1 << 20) -> float:
    """``H_n^g(x) = sum_{i<n} g(x + i alpha)``.

    A :class:`CocycleFunction` uses the visit formula; any other callable is
    summed directly along the orbit in vectorised chunks.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return 0.0
    if isinstance(g, CocycleFunction):
        lv = g.levels if levels is None else tuple(levels)
        return birkhoff_visits(g, g.alpha.to_units(x), n, lv)
    if alpha is None:
        raise ValueError("alpha required for a plain circle function")
    alpha = ContinuedFractionAlpha.parse(alpha)
    xu = alpha.to_units(x)
    total = 0.0
    for m0 in range(0, n, chunk):
        pts = rotation_orbit_floats(alpha, xu, m0, min(chunk, n - m0))
        try:
            vals = np.asarray(g(pts), dtype=float)
            if vals.shape != pts.shape:
                vals = np.broadcast_to(vals, pts.shape)
        except Exception:
            vals = np.array([g(float(p)) for p in pts])
        total += math.fsum(vals)
    return total


# ---- exact averages of piecewise-linear paths -----------------------------------


def _sum_linear(u0: float, s: float, j0: int, j1: int) -> float:
    cnt = j1 - j0
    if cnt <= 0:
        return 0.0
    return cnt * u0 + s * (j0 + j1 - 1) * cnt / 2.0


def _sum_abs_linear(u0: float, s: float, j0: int, j1: int) -> float:
    """``sum_{j0 <= j < j1} |u0 + s j|``."""
    if j1 <= j0:
        return 0.0
    if s == 0:
        return (j1 - j0) * abs(u0)
    jc = min(max(math.ceil(-u0 / s), j0), j1)
    left, right = _sum_linear(u0, s, j0, jc), _sum_linear(u0, s, jc, j1)
    if s > 0:
        return -left + right
    return left - right


def _sum_circle_norm_linear(u0: float, s: float, cnt: int) -> float:
    """``sum_{0 <= j < cnt} ||u0 + s j||`` with ``||.||`` the distance to Z."""
    if cnt <= 0:
        return 0.0
    total = 0.0
    j = 0
    while j < cnt:
        z = u0 + s * j
        k = math.floor(z + 0.5)
        if s > 0:
            j_end = min(cnt, math.ceil((k + 0.5 - u0) / s))
        elif s < 0:
            j_end = min(cnt, math.ceil((k - 0.5 - u0) / s))
        else:
            j_end = cnt
        j_end = max(j_end, j + 1)
        total += _sum_abs_linear(u0 - k, s, j, j_end)
        j = j_end
    return total


def _merged_breaks(paths: Sequence[CocyclePath], n: int) -> list[int]:
    bs = {0, n}
    for p in paths:
        bs.update(b for b in p.breakpoints() if 0 < b < n)
    return sorted(bs)


def mean_path_gap(p1: CocyclePath, p2: CocyclePath, n: int, offset: float = 0.0,
                  circle: bool = True) -> float:
    """``(1/n) sum_{m<n} ||offset + H_m(x1) - H_m(x2)||``, summed segment by segment."""
    if n <= 0:
        raise ValueError("n must be positive")
    total = 0.0
    bs = _merged_breaks([p1, p2], n)
    for a, b in zip(bs, bs[1:]):
        pts = np.array([a, b - 1])
        g = offset + p1.values(pts) - p2.values(pts)
        s = float(g[1] - g[0]) / (b - 1 - a) if b - a >= 2 else 0.0
        if circle:
            total += _sum_circle_norm_linear(float(g[0]), s, b - a)
        else:
            total += _sum_abs_linear(float(g[0]), s, 0, b - a)
    return total / n
