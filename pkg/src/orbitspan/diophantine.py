"""Exact arithmetic for circle rotations by a fixed-point irrational.

The rotation number is stored as an integer ``units`` on the grid
``2**-bits``; points of the circle are integers modulo ``2**bits``.  Every
query here (nearest orbit point, orbit counting, gap lengths) is exact
integer arithmetic and runs in time logarithmic in the index range, via
Euclid-style recursions on the continued fraction of ``units / 2**bits``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
import math
from math import isqrt
from typing import Iterable

DEFAULT_BITS = 128


def floor_sum(n: int, m: int, a: int, b: int) -> int:
    """Return ``sum(floor((a*i + b) / m) for i in range(n))`` in O(log m)."""
    if n <= 0:
        return 0
    ans = 0
    if a < 0 or a >= m:
        ans += n * (n - 1) // 2 * (a // m)
        a %= m
    if b < 0 or b >= m:
        ans += n * (b // m)
        b %= m
    while True:
        if a >= m:
            ans += n * (n - 1) // 2 * (a // m)
            a %= m
        if b >= m:
            ans += n * (b // m)
            b %= m
        y_max = a * n + b
        if y_max < m:
            return ans
        n, b = divmod(y_max, m)
        m, a = a, m


def min_linear_mod(n: int, m: int, a: int, b: int) -> tuple[int, int]:
    """Minimise ``(a*i + b) % m`` over ``0 <= i < n``.

    Returns ``(value, i)``.  Between two wrap-arounds the sequence increases,
    so the minimum sits at ``i = 0`` or right after a wrap; the post-wrap
    values form a problem of the same shape with modulus ``a``.  Reflecting
    when ``2a > m`` keeps the modulus halving every two levels.
    """
    if n <= 0:
        raise ValueError("empty index range")
    a %= m
    b %= m
    if a == 0:
        return b, 0
    if 2 * a > m:
        a2 = m - a
        v, j = min_linear_mod(n, m, a2, b - a2 * (n - 1))
        return v, n - 1 - j
    wraps = (b + a * (n - 1)) // m
    if wraps == 0:
        return b, 0
    v, t = min_linear_mod(wraps, a, -m, b - m)
    if v < b:
        t += 1
        return v, -((b - t * m) // a)
    return b, 0


@dataclass(frozen=True)
class ContinuedFractionAlpha:
    """Rotation number ``units / 2**bits`` with its continued fraction.

    ``quotients`` holds a_1, a_2, ... of the full (finite) expansion of the
    stored dyadic, so convergent denominators agree with those of the
    intended irrational up to roughly ``2**(bits/2)``.
    """

    units: int
    bits: int = DEFAULT_BITS
    name: str = ""

    def __post_init__(self):
        if not 0 < self.units < (1 << self.bits):
            raise ValueError("alpha must lie strictly inside (0, 1)")

    @classmethod
    def golden(cls, bits: int = DEFAULT_BITS) -> "ContinuedFractionAlpha":
        q = 1 << bits
        return cls((isqrt(5 * q * q) - q) // 2, bits, "golden")

    @classmethod
    def from_value(cls, x, bits: int = DEFAULT_BITS, name: str = "") -> "ContinuedFractionAlpha":
        frac = Fraction(x) % 1
        return cls(int(frac * (1 << bits)), bits, name)

    @classmethod
    def from_quotients(cls, quotients: Iterable[int], bits: int = DEFAULT_BITS,
                       name: str = "") -> "ContinuedFractionAlpha":
        value = Fraction(0)
        for a in reversed(list(quotients)):
            value = 1 / (a + value)
        return cls.from_value(value, bits, name)

    @classmethod
    def parse(cls, value, bits: int = DEFAULT_BITS) -> "ContinuedFractionAlpha":
        """Accept ``"golden"``, ``"silver"``, ``"sqrt2"`` or a number."""
        if isinstance(value, ContinuedFractionAlpha):
            return value
        if isinstance(value, str):
            key = value.strip().lower()
            if key == "golden":
                return cls.golden(bits)
            if key == "silver":
                q = 1 << bits
                return cls(isqrt(2 * q * q) - q, bits, "silver")
            if key == "sqrt2":
                q = 1 << bits
                return cls(isqrt(2 * q * q) % q, bits, "sqrt2")
            value = Fraction(value)
        return cls.from_value(value, bits)

    @property
    def modulus(self) -> int:
        return 1 << self.bits

    @property
    def value(self) -> float:
        return self.units / self.modulus

    @cached_property
    def convergents(self) -> tuple[tuple[int, int, int], ...]:
        """Triples ``(a_j, p_j, q_j)`` for j = 1..J."""
        out = []
        p2, p1, q2, q1 = 1, 0, 0, 1
        x, y = self.modulus, self.units
        while y:
            a, r = divmod(x, y)
            x, y = y, r
            p, q = a * p1 + p2, a * q1 + q2
            out.append((a, p, q))
            p2, p1, q2, q1 = p1, p, q1, q
        return tuple(out)

    @property
    def quotients(self) -> tuple[int, ...]:
        return tuple(a for a, _, _ in self.convergents)

    @cached_property
    def _qs(self) -> tuple[int, ...]:
        # q_{-1}=0, q_0=1, q_1, ...
        return (0, 1) + tuple(q for _, _, q in self.convergents)

    @cached_property
    def _etas(self) -> tuple[int, ...]:
        # eta_j = |q_j alpha - p_j| in units; eta_{-1}=1, eta_0=alpha
        out = [self.modulus, self.units]
        for _, p, q in self.convergents:
            out.append(abs(q * self.units - p * self.modulus))
        return tuple(out)

    def eta(self, j: int) -> int:
        """``||q_j alpha||`` in units, indexing q_0 = 1 as j = 0."""
        return self._etas[j + 1]

    def denominator(self, j: int) -> int:
        return self._qs[j + 1]

    def smallest_denominator_at_least(self, n: int) -> int:
        for q in self._qs[1:]:
            if q >= n:
                return q
        raise OverflowError(f"no convergent denominator >= {n} at {self.bits} bits")

    # ---- point conversion ---------------------------------------------------

    def to_units(self, x) -> int:
        """Floor ``x mod 1`` onto the grid; ints are taken as units already."""
        if isinstance(x, int):
            return x % self.modulus
        if isinstance(x, float) and math.isfinite(x):
            f = x % 1.0
            if 0.0 <= f < 1.0 and (f == 0.0 or x >= 0.0):
                # scaling by a power of two is exact, int() floors
                return int(math.ldexp(f, self.bits)) % self.modulus
        return int((Fraction(x) % 1) * self.modulus)

    def to_float(self, units: int) -> float:
        return (units % self.modulus) / self.modulus

    def orbit_units(self, x_units: int, i: int) -> int:
        return (x_units + i * self.units) % self.modulus

    def circle_units(self, a: int, b: int) -> int:
        """``||a - b||`` in units."""
        d = (a - b) % self.modulus
        return min(d, self.modulus - d)

    # ---- gap structure ------------------------------------------------------

    def gaps(self, count: int) -> dict[int, int]:
        """Gap lengths (units) and multiplicities of ``{i alpha : 0 <= i < count}``."""
        if count < 1:
            raise ValueError("need at least one point")
        if count == 1:
            return {self.modulus: 1}
        n = count - 1
        qs = self._qs
        for k in range(len(qs) - 2):
            q_prev, q_k, q_next = qs[k], qs[k + 1], qs[k + 2]
            if q_k + q_prev <= n < q_next + q_k:
                r, s = divmod(n - q_prev, q_k)
                e_k, e_prev = self.eta(k), self.eta(k - 1)
                out: dict[int, int] = {}
                for length, mult in ((e_k, n + 1 - q_k),
                                     (e_prev - r * e_k, s + 1),
                                     (e_prev - (r - 1) * e_k, q_k - s - 1)):
                    if mult > 0:
                        out[length] = out.get(length, 0) + mult
                return out
        raise OverflowError(f"{count} points exceed the resolution of {self.bits}-bit alpha")

    def min_gap(self, count: int) -> int:
        return min(self.gaps(count))

    def max_gap(self, count: int) -> int:
        return max(self.gaps(count))

    # ---- queries ------------------------------------------------------------

    def nearest(self, x_units: int, i_lo: int, i_hi: int) -> tuple[int, int]:
        """Index in ``[i_lo, i_hi]`` minimising ``||x - i alpha||`` and that distance."""
        if i_hi < i_lo:
            raise ValueError("empty index range")
        m, a = self.modulus, self.units
        n = i_hi - i_lo + 1
        right, jr = min_linear_mod(n, m, a, i_lo * a - x_units)
        left, jl = min_linear_mod(n, m, -a, x_units - i_lo * a)
        if right < left or (right == left and jr <= jl):
            return i_lo + jr, right
        return i_lo + jl, left

    def visits(self, x_units: int, radius: int, i_lo: int, i_hi: int) -> list[tuple[int, int]]:
        """All ``i`` in ``[i_lo, i_hi]`` with ``||x + i alpha|| <= radius``.

        Returns sorted ``(i, signed offset)`` pairs, offset being the
        representative of ``x + i alpha`` in ``(-1/2, 1/2]`` (units).
        Cost is O((#visits + 1) * bits).
        """
        out = []
        stack = [(i_lo, i_hi)]
        target = (-x_units) % self.modulus
        while stack:
            lo, hi = stack.pop()
            if hi < lo:
                continue
            i, d = self.nearest(target, lo, hi)
            if d > radius:
                continue
            off = (x_units + i * self.units) % self.modulus
            if off > self.modulus // 2:
                off -= self.modulus
            out.append((i, off))
            stack.append((lo, i - 1))
            stack.append((i + 1, hi))
        out.sort()
        return out

    def count_in(self, x_units: int, a_units: int, length: int, n: int) -> int:
        """``#{0 <= i < n : (x + i alpha - a) mod 1 < length}`` (half-open arc)."""
        if n <= 0 or length <= 0:
            return 0
        m = self.modulus
        if length >= m:
            return n
        c = x_units - a_units
        return floor_sum(n, m, self.units, c) - floor_sum(n, m, self.units, c - length)


@dataclass(frozen=True)
class NearestOrbitPoint:
    index: int
    dist: float
    dist_units: int = field(repr=False, default=0)


def nearest_orbit_point(x, i_lo: int, i_hi: int, alpha: ContinuedFractionAlpha) -> NearestOrbitPoint:
    """Index ``i*`` in ``[i_lo, i_hi]`` minimising ``||x - i* alpha||``."""
    i, d = alpha.nearest(alpha.to_units(x), i_lo, i_hi)
    return NearestOrbitPoint(i, d / alpha.modulus, d)


def orbit_interval_count(a, b, n: int, alpha: ContinuedFractionAlpha, start=0) -> int:
    """Exact ``#{0 <= i < n : start + i alpha mod 1 in [a, b)}``.

    ``b - a`` must lie in ``[0, 1]``; arcs that wrap past 1 are fine.
    """
    fa, fb = Fraction(a), Fraction(b)
    if not 0 <= fb - fa <= 1:
        raise ValueError("need 0 <= b - a <= 1")
    q = alpha.modulus
    a_units = math.ceil(fa * q)
    b_units = math.ceil(fb * q)
    return alpha.count_in(alpha.to_units(start), a_units % q, b_units - a_units, n)
