"""Independent reference implementations used by the tests.

Everything here is either brute force or floating point along the orbit,
so it shares no code path with the exact-arithmetic machinery under test.
"""
from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np


def brute_orbit_units(alpha_units: int, modulus: int, x_units: int, i_lo: int, i_hi: int) -> list[int]:
    return [(x_units + i * alpha_units) % modulus for i in range(i_lo, i_hi + 1)]


def brute_gaps(alpha_units: int, modulus: int, count: int) -> dict[int, int]:
    pts = sorted((i * alpha_units) % modulus for i in range(count))
    gaps = [b - a for a, b in zip(pts, pts[1:])] + [pts[0] + modulus - pts[-1]]
    out: dict[int, int] = {}
    for g in gaps:
        out[g] = out.get(g, 0) + 1
    return out


def brute_nearest(alpha_units: int, modulus: int, x_units: int, i_lo: int, i_hi: int) -> tuple[int, int]:
    best = None
    for i in range(i_lo, i_hi + 1):
        d = (x_units - i * alpha_units) % modulus
        d = min(d, modulus - d)
        if best is None or d < best[1]:
            best = (i, d)
    return best


def brute_floor_sum(n: int, m: int, a: int, b: int) -> int:
    return sum((a * i + b) // m for i in range(n))


def brute_min_linear_mod(n: int, m: int, a: int, b: int) -> tuple[int, int]:
    vals = [((a * i + b) % m, i) for i in range(n)]
    v, i = min(vals)
    return v, i


def circle_dist(a, b):
    d = np.abs(np.asarray(a, float) - np.asarray(b, float)) % 1.0
    return np.minimum(d, 1.0 - d)


def tent_level_float(alpha: float, plateau: int, bump: float, x: float) -> float:
    """One tent level evaluated in floats by scanning all 2N centres."""
    centres = (np.arange(2 * plateau) * alpha) % 1.0
    d = circle_dist(x, centres)
    i = int(np.argmin(d))
    if d[i] >= bump:
        return 0.0
    v = (bump - d[i]) / bump / plateau
    return v if i < plateau else -v


def direct_level_sum(alpha: float, plateau: int, bump: float, x: float, n: int) -> float:
    """``sum_{i<n} h(x + i alpha)`` for one tent level, point by point."""
    centres = (np.arange(2 * plateau) * alpha) % 1.0
    total = 0.0
    for i in range(n):
        p = (x + i * alpha) % 1.0
        d = circle_dist(p, centres)
        j = int(np.argmin(d))
        if d[j] < bump:
            v = (bump - d[j]) / bump / plateau
            total += v if j < plateau else -v
    return total


def brute_min_cover(D: np.ndarray, eps: float) -> int:
    """Minimum number of sample-centred open eps-balls covering the sample, by enumeration."""
    P = D.shape[0]
    inside = D < eps
    for size in range(1, P + 1):
        for combo in itertools.combinations(range(P), size):
            if inside[list(combo)].any(axis=0).all():
                return size
    return P


def exact_fraction_units(x: Fraction, bits: int) -> int:
    return int((x % 1) * (1 << bits))


def direct_level_sum_units(alpha_units: int, modulus: int, plateau: int, bump_units: int,
                           x_units: int, n: int) -> float:
    """As :func:`direct_level_sum` but in exact integer units, scanning all 2N centres."""
    centres = [(j * alpha_units) % modulus for j in range(2 * plateau)]
    total = 0.0
    for i in range(n):
        p = (x_units + i * alpha_units) % modulus
        best, j_best = modulus, -1
        for j, c in enumerate(centres):
            d = (p - c) % modulus
            d = min(d, modulus - d)
            if d < best:
                best, j_best = d, j
        if best < bump_units:
            v = (bump_units - best) / bump_units / plateau
            total += v if j_best < plateau else -v
    return total


def near_returns(alpha_units: int, modulus: int, bits: int, x_units: int, radius: int,
                 t_lo: int, t_hi: int, chunk: int = 1 << 20) -> list[tuple[int, int]]:
    """All ``t`` in ``[t_lo, t_hi]`` with ``||x + t alpha|| <= radius``, as ``(t, signed offset)``.

    Scans the top 64 bits with numpy (restarting exactly at every chunk so
    the truncation error stays below ``chunk`` ulps), then confirms each
    candidate in exact integer arithmetic.
    """
    shift = bits - 64
    a64 = np.uint64(alpha_units >> shift)
    margin = (radius >> shift) + chunk + 4
    out = []
    for c0 in range(t_lo, t_hi + 1, chunk):
        cnt = min(chunk, t_hi + 1 - c0)
        start = (x_units + c0 * alpha_units) % modulus
        with np.errstate(over="ignore"):
            p = np.uint64(start >> shift) + np.arange(cnt, dtype=np.uint64) * a64
            d = np.minimum(p, np.uint64(0) - p)
        for j in np.flatnonzero(d <= np.uint64(margin)):
            t = c0 + int(j)
            off = (x_units + t * alpha_units) % modulus
            if off > modulus // 2:
                off -= modulus
            if abs(off) <= radius:
                out.append((t, off))
    return out


def _tent_visits(schedule, k: int, x_units: int, n: int, boundary_only: bool = False):
    a = schedule.alpha
    lv = schedule.level(k)
    N = lv.plateau
    ranges = [(-(2 * N - 1), n - 1)]
    if boundary_only and n > 4 * N:
        ranges = [(-(2 * N - 1), -1), (n - 2 * N + 1, n - 1)]
    for lo, hi in ranges:
        for t, off in near_returns(a.units, a.modulus, a.bits, x_units, lv.bump_units - 1, lo, hi):
            yield t, (lv.bump_units - abs(off)) / lv.bump_units / N, N


def oracle_sum(schedule, levels, x_units: int, n: int, boundary_only: bool = False) -> float:
    """``H_n(x)`` from exact near returns: a return at time t adds one ramp of 2N steps.

    A ramp lying wholly inside ``[0, n)`` adds N steps of +w and N of -w,
    so with ``boundary_only`` only returns near the two ends are scanned.
    """
    total = 0.0
    for k in levels:
        for t, w, N in _tent_visits(schedule, k, x_units, n, boundary_only):
            plus = max(0, min(N, n - t) - max(0, -t))
            minus = max(0, min(2 * N, n - t) - max(N, -t))
            total += w * (plus - minus)
    return total


def oracle_path(schedule, levels, x_units: int, n: int) -> np.ndarray:
    """``H_m(x)`` for ``m = 0..n`` via difference arrays of the per-step values."""
    diff = np.zeros(n + 1)
    for k in levels:
        for t, w, N in _tent_visits(schedule, k, x_units, n):
            for lo, hi, sgn in ((t, t + N, 1.0), (t + N, t + 2 * N, -1.0)):
                lo, hi = max(lo, 0), min(hi, n)
                if lo < hi:
                    diff[lo] += sgn * w
                    diff[hi] -= sgn * w
    h = np.cumsum(diff)[:n]
    return np.concatenate([[0.0], np.cumsum(h)])


def in_window_exact(schedule, k: int, x_units: int) -> bool:
    lv = schedule.level(k)
    a = schedule.alpha
    return bool(near_returns(a.units, a.modulus, a.bits, x_units, lv.window_units,
                             -(lv.chain_length - 1), 0))
