"""Parameter induction for the bump-cocycle skew product.

Each level ``k`` carries

* ``return_time`` (M_k): every arc of length ``separation[k-1]`` is hit
  within this many steps, and after it the orbit frequency of the previous
  window set stays below ``budget / 2**(k-1)``;
* ``plateau`` (N_k = 10**k * M_k): half the number of windows, i.e. the
  tent signs flip after ``plateau`` steps;
* ``window`` (delta_k): radius of the windows ``[i alpha +- window]``,
  ``0 <= i < 2 * plateau``;
* ``bump`` (gamma_k): radius of the tent supports, strictly inside the
  windows;
* ``separation`` (l_k): minimum distance between window endpoints of all
  levels so far, capped by ``bump[i] / (2 k**2)``.

All radii are stored as integers on the ``2**-bits`` grid of the rotation
number, so constraints are checked exactly.  Radii live far below double
precision at level 2 already (``bump[2]`` is about 1e-15).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from decimal import Decimal, localcontext
from fractions import Fraction
import math
from typing import Sequence

from .diophantine import ContinuedFractionAlpha

DEFAULT_BUDGET = Fraction(1, 100)
DEFAULT_FILL = Fraction(9, 10)
DEFAULT_MAGNITUDE_CAP = 10 ** 15
FORMAT_TAG = "orbitspan-schedule 1"


class DepthInfeasible(ValueError):
    """A level could not be built within the magnitude cap or bit budget."""

    def __init__(self, level: int, constraint: str, detail: str = ""):
        self.level = level
        self.constraint = constraint
        msg = f"level {level}: {constraint}"
        super().__init__(msg + (f" ({detail})" if detail else ""))


@dataclass(frozen=True)
class LevelParams:
    k: int
    return_time: int
    plateau: int
    window_units: int
    bump_units: int
    separation_units: int
    bits: int
    # the bump of the deepest internal level is built without its successor
    provisional: bool = False

    @property
    def window(self) -> float:
        return self.window_units / (1 << self.bits)

    @property
    def bump(self) -> float:
        return self.bump_units / (1 << self.bits)

    @property
    def separation(self) -> float:
        return self.separation_units / (1 << self.bits)

    @property
    def chain_length(self) -> int:
        """Number of windows, ``2 * plateau``."""
        return 2 * self.plateau


@dataclass(frozen=True)
class ParameterSchedule:
    alpha: ContinuedFractionAlpha
    budget: Fraction
    depth: int
    levels: tuple[LevelParams, ...]
    fill: Fraction = DEFAULT_FILL
    magnitude_cap: int = DEFAULT_MAGNITUDE_CAP

    @property
    def internal_depth(self) -> int:
        return len(self.levels)

    def level(self, k: int) -> LevelParams:
        if not 1 <= k <= len(self.levels):
            raise IndexError(f"level {k} not in schedule (internal depth {len(self.levels)})")
        return self.levels[k - 1]

    def __getitem__(self, k: int) -> LevelParams:
        return self.level(k)

    def truncated(self, depth: int) -> "ParameterSchedule":
        if not 1 <= depth <= self.depth:
            raise ValueError("depth out of range")
        return replace(self, depth=depth, levels=self.levels[:depth + 1])

    def level_for_horizon(self, n: int) -> int:
        """The ``k`` with ``2 N_k < n <= 2 N_{k+1}``, using internal levels."""
        for lv, nxt in zip(self.levels, self.levels[1:]):
            if 2 * lv.plateau < n <= 2 * nxt.plateau:
                return lv.k
        raise ValueError(f"horizon {n} outside the range covered by the schedule")

    # ---- window-set queries --------------------------------------------------

    def window_index(self, x_units: int, k: int) -> int | None:
        """Index ``i < 2 N_k`` of the level-k window containing x, or None."""
        lv = self.level(k)
        i, d = self.alpha.nearest(x_units, 0, lv.chain_length - 1)
        return i if d <= lv.window_units else None

    def in_windows(self, x_units: int, k_lo: int, k_hi: int) -> bool:
        return any(self.window_index(x_units, k) is not None for k in range(k_lo, k_hi + 1))

    # ---- text form ------------------------------------------------------------

    def to_text(self) -> str:
        lines = [
            FORMAT_TAG,
            f"bits {self.alpha.bits}",
            f"alpha_name {self.alpha.name or '-'}",
            "alpha_quotients " + " ".join(map(str, self.alpha.quotients)),
            f"budget {self.budget}",
            f"fill {self.fill}",
            f"magnitude_cap {self.magnitude_cap}",
            f"depth {self.depth}",
        ]
        for lv in self.levels:
            lines.append(
                f"level {lv.k} return_time={lv.return_time} plateau={lv.plateau}"
                f" window={_exact_decimal(lv.window_units, lv.bits)}"
                f" bump={_exact_decimal(lv.bump_units, lv.bits)}"
                f" separation={_exact_decimal(lv.separation_units, lv.bits)}"
                f" provisional={int(lv.provisional)}"
            )
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ParameterSchedule":
        rows = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        if not rows or rows[0] != FORMAT_TAG:
            raise ValueError("not a schedule document")
        head: dict[str, str] = {}
        level_rows = []
        for row in rows[1:]:
            key, _, rest = row.partition(" ")
            if key == "level":
                level_rows.append(rest)
            else:
                head[key] = rest
        bits = int(head["bits"])
        name = head.get("alpha_name", "-")
        alpha = ContinuedFractionAlpha.from_quotients(
            [int(t) for t in head["alpha_quotients"].split()], bits, "" if name == "-" else name)
        levels = []
        for rest in level_rows:
            k_str, *pairs = rest.split()
            kv = dict(p.split("=", 1) for p in pairs)
            levels.append(LevelParams(
                k=int(k_str),
                return_time=int(kv["return_time"]),
                plateau=int(kv["plateau"]),
                window_units=_parse_units(kv["window"], bits),
                bump_units=_parse_units(kv["bump"], bits),
                separation_units=_parse_units(kv["separation"], bits),
                bits=bits,
                provisional=bool(int(kv.get("provisional", "0"))),
            ))
        return cls(alpha=alpha, budget=Fraction(head["budget"]), depth=int(head["depth"]),
                   levels=tuple(levels), fill=Fraction(head.get("fill", str(DEFAULT_FILL))),
                   magnitude_cap=int(head.get("magnitude_cap", DEFAULT_MAGNITUDE_CAP)))


def _exact_decimal(units: int, bits: int) -> str:
    # units / 2**bits has a terminating decimal expansion of at most `bits` digits
    with localcontext() as ctx:
        ctx.prec = bits + 50
        d = Decimal(units) / Decimal(1 << bits)
    s = format(d, "f")
    return s.rstrip("0").rstrip(".") if "." in s else s


def _parse_units(text: str, bits: int) -> int:
    v = Fraction(text) * (1 << bits)
    if v.denominator != 1:
        raise ValueError(f"{text} is not on the 2**-{bits} grid")
    return int(v)


# ---- construction -------------------------------------------------------------


@dataclass
class _Work:
    alpha: ContinuedFractionAlpha
    budget: Fraction
    fill: Fraction
    cap: int
    M: list = field(default_factory=list)
    N: list = field(default_factory=list)
    delta: list = field(default_factory=list)
    delta_arc: list = field(default_factory=list)   # (Lambda, q) per level
    gamma: list = field(default_factory=list)
    sep: list = field(default_factory=list)


def remainder_bound(q: int, arc: int, modulus: int) -> Fraction:
    """Upper bound on ``visits - n * arc / modulus`` for a half-open arc of length ``||q alpha||``.

    Valid when ``arc == ||q alpha||`` in units for a convergent denominator q
    with ``q * arc < modulus / 2``: any q consecutive orbit points hit the
    arc at most once more than the mean, and the mean over a block of q is
    ``q * arc / modulus``.
    """
    return 1 + Fraction((q - 1) * arc, modulus)


def _window_radius(w: _Work, k: int, plateau: int) -> tuple[int, int, int]:
    """Pick a window radius sitting inside an arc of length ``||q alpha||``.

    Returns ``(delta_units, arc_units, q)``.  The first convergent whose
    ``2 N ||q alpha||`` fits under ``fill * budget / 2**k`` is used, so the
    windows inherit the bounded-remainder property of that arc.
    """
    a = w.alpha
    Q = a.modulus
    target = w.fill * w.budget / (1 << k)
    min_sep = a.min_gap(2 * plateau + 2)
    j = 0
    while True:
        try:
            q, lam = a.denominator(j), a.eta(j)
        except IndexError:
            raise DepthInfeasible(k, "window radius", "rotation number resolution exhausted")
        if q >= 1 and Fraction(2 * plateau * lam, Q) <= target and 2 * ((lam - 1) // 2) < min_sep:
            break
        j += 1
    if 2 * q * lam >= Q:
        raise DepthInfeasible(k, "window radius", "bounded-remainder arc condition fails")
    if 4 * q > Q or lam < 8:
        raise DepthInfeasible(k, "window radius", "rotation number resolution exhausted")
    delta = (lam - 1) // 2
    while _collides(w, k, plateau, delta):
        delta -= 1
    return delta, lam, q


def _collides(w: _Work, k: int, plateau: int, delta: int) -> bool:
    """Does some endpoint ``i alpha +- delta`` coincide with an earlier endpoint?"""
    a = w.alpha
    for m in range(len(w.delta)):
        dm, nm = w.delta[m], w.N[m]
        for s1 in (1, -1):
            for s2 in (1, -1):
                # i alpha + s1 delta == j alpha + s2 dm  <=>  (i - j) alpha == s2 dm - s1 delta
                x = (s2 * dm - s1 * delta) % a.modulus
                _, dist = a.nearest(x, -(2 * nm - 1), 2 * plateau - 1)
                if dist == 0:
                    return True
    return False


def _bump_radius(w: _Work, idx: int, next_plateau: int, provisional: bool) -> int:
    """Tent radius for level ``idx + 1`` given the plateau of the next level."""
    a = w.alpha
    n_prev = w.N[idx]
    # points i alpha for -2 N_next <= i <= 2 N_next + 2 N_prev
    count = 4 * next_plateau + 2 * n_prev + 1
    g = a.min_gap(count)
    gamma = min((g * 45) // 100, (w.delta[idx] * 9) // 10)
    if gamma < 1:
        raise DepthInfeasible(idx + 1, "bump radius", "below grid resolution")
    return gamma


def endpoint_separation(alpha: ContinuedFractionAlpha, plateaus: Sequence[int],
                        windows: Sequence[int]) -> int:
    """Minimum distance (units) between distinct window endpoints over all levels given."""
    best = None

    def upd(v):
        nonlocal best
        if best is None or v < best:
            best = v

    L = len(plateaus)
    for i in range(L):
        n_i, d_i = plateaus[i], windows[i]
        upd(2 * d_i)
        if 2 * n_i > 1:
            upd(alpha.min_gap(2 * n_i))
            # || d alpha - 2 delta || for 0 < |d| < 2N
            for lo, hi in ((1, 2 * n_i - 1), (-(2 * n_i - 1), -1)):
                upd(alpha.nearest((2 * d_i) % alpha.modulus, lo, hi)[1])
        for j in range(i):
            n_j, d_j = plateaus[j], windows[j]
            # endpoints a alpha + s1 d_i (a < 2 n_i) vs b alpha + s2 d_j (b < 2 n_j)
            for s1 in (1, -1):
                for s2 in (1, -1):
                    x = (s2 * d_j - s1 * d_i) % alpha.modulus
                    upd(alpha.nearest(x, -(2 * n_j - 1), 2 * n_i - 1)[1])
    return best


def _return_time(w: _Work, k: int) -> int:
    """Certified threshold for level k: hitting of every short arc plus low window frequency."""
    a = w.alpha
    Q = a.modulus
    sep = w.sep[k - 2]
    # hitting: smallest n whose max gap is already < sep
    lo, hi = 1, 2
    while a.max_gap(hi) >= sep:
        hi *= 2
        if hi > 4 * w.cap:
            raise DepthInfeasible(k, "arc hitting", f"max gap stays >= separation beyond {hi}")
    while lo < hi:
        mid = (lo + hi) // 2
        if a.max_gap(mid) < sep:
            hi = mid
        else:
            lo = mid + 1
    t_hit = lo
    # frequency: count(x, n) <= 2N (n lam + R) < n theta  for n >= t_freq
    n_prev = w.N[k - 2]
    lam_units, q = w.delta_arc[k - 2]
    lam = Fraction(lam_units, Q)
    theta = w.budget / (1 << (k - 1))
    slack = theta - 2 * n_prev * lam
    if slack <= 0:
        raise DepthInfeasible(k, "window frequency", "window set too large")
    t_freq = math.floor(2 * n_prev * remainder_bound(q, lam_units, Q) / slack) + 1
    return max(t_hit, t_freq, n_prev + 1)


def build_schedule(alpha="golden", depth: int = 2, budget=DEFAULT_BUDGET, *,
                   fill=DEFAULT_FILL, magnitude_cap: int = DEFAULT_MAGNITUDE_CAP,
                   bits: int = 128) -> ParameterSchedule:
    """Build levels ``1..depth+1``; the last one only fixes ``bump[depth]``."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    budget = Fraction(budget)
    if not 0 < budget < 1:
        raise ValueError("budget must lie in (0, 1)")
    a = ContinuedFractionAlpha.parse(alpha, bits)
    w = _Work(a, budget, Fraction(fill), magnitude_cap)
    internal = depth + 1
    for k in range(1, internal + 1):
        if k == 1:
            M = 10
        else:
            thr = _return_time(w, k)
            try:
                M = a.smallest_denominator_at_least(thr)
            except OverflowError as exc:
                raise DepthInfeasible(k, "return time", str(exc))
        N = 10 ** k * M
        if N > magnitude_cap:
            raise DepthInfeasible(k, "magnitude cap", f"plateau {N} > {magnitude_cap}")
        w.M.append(M)
        w.N.append(N)
        if k >= 2:
            w.gamma.append(_bump_radius(w, k - 2, N, False))
        delta, lam, q = _window_radius(w, k, N)
        w.delta.append(delta)
        w.delta_arc.append((lam, q))
        sep = endpoint_separation(a, w.N, w.delta)
        for i, g in enumerate(w.gamma, start=1):
            sep = min(sep, g // (2 * k * k))
        if sep < 1:
            raise DepthInfeasible(k, "separation", "below grid resolution")
        w.sep.append(sep)
    # deepest bump: no successor, use the range of a successor equal to itself
    w.gamma.append(_bump_radius(w, internal - 1, w.N[-1], True))
    levels = tuple(
        LevelParams(k=k + 1, return_time=w.M[k], plateau=w.N[k], window_units=w.delta[k],
                    bump_units=w.gamma[k], separation_units=w.sep[k], bits=bits,
                    provisional=(k == internal - 1))
        for k in range(internal))
    return ParameterSchedule(alpha=a, budget=budget, depth=depth, levels=levels,
                             fill=Fraction(fill), magnitude_cap=magnitude_cap)
