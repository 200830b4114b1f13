"""Spanning numbers over finite samples.

A cover uses open balls ``{y : d(c, y) < eps}`` centred at sample points.
The greedy count is an upper bound on the minimal span of the sample. The
size of a greedily built ``2 eps``-separated subset is a lower bound,
because an eps-ball holds at most one point of such a set.

Ball structure is stored as runs of consecutive positions, either dense
(rows of a boolean matrix) or, for large circle samples under the Bowen or
max-mean metric, pruned to the initial-distance window of the sorted sample.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import time
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.stats import qmc

from . import _kernels as K
from .metrics import METRIC_KINDS
from .systems import DynamicalSystem

PROVENANCES = ("uniform-grid", "low-discrepancy", "measure-sample", "orbit-empirical", "probe")
DEFAULT_MEMORY_BUDGET = 2 * 1024 ** 3
DENSE_LIMIT = 6000
_KIND_CODE = {"bowen": K.BOWEN, "maxmean": K.MAXMEAN, "mean": K.MEAN}


class MemoryBudgetExceeded(MemoryError):
    pass


class SampleTooSmall(ValueError):
    pass


class InsufficientRows(ValueError):
    pass


# ---- samples -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SampleSet:
    points: np.ndarray
    provenance: str
    seed: int | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.shape[0] == 0:
            raise ValueError("empty sample")
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        pts = np.mod(pts, 1.0)
        pts[pts >= 1.0] = 0.0
        if len(np.unique(pts, axis=0)) != len(pts):
            raise ValueError("sample contains duplicate points")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def uniform_grid(dim: int, per_axis: int) -> SampleSet:
    """``per_axis ** dim`` points ``(i_1, ..., i_dim) / per_axis``."""
    axes = np.arange(per_axis) / per_axis
    mesh = np.meshgrid(*([axes] * dim), indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    return SampleSet(pts, "uniform-grid", params={"per_axis": per_axis})


def grid_for_radius(dim: int, eps: float) -> SampleSet:
    """Finest-needed grid: spacing below ``eps / 4`` and never a divisor of eps."""
    g = int(np.floor(4.0 / eps)) + 1
    while abs(eps * g - round(eps * g)) < 1e-9:
        g += 1
    return uniform_grid(dim, g)


def low_discrepancy(dim: int, count: int, seed: int = 0) -> SampleSet:
    pts = qmc.Halton(d=dim, scramble=True, seed=seed).random(count)
    return SampleSet(pts, "low-discrepancy", seed=seed, params={"count": count})


def measure_sample(dim: int, count: int, seed: int = 0, sampler: Callable | None = None) -> SampleSet:
    """i.i.d. points; Lebesgue unless ``sampler(rng, count)`` is given."""
    rng = np.random.default_rng(seed)
    pts = rng.random((count, dim)) if sampler is None else np.asarray(sampler(rng, count), float)
    return SampleSet(pts, "measure-sample", seed=seed, params={"count": count})


def orbit_empirical(system: DynamicalSystem, start, count: int, burn_in: int = 1000,
                    stride: int = 1) -> SampleSet:
    """Points ``T^(burn_in + j * stride)(start)`` of one long orbit."""
    n = burn_in + count * stride
    orb = system.orbit(np.atleast_2d(start), n)[:, 0, :]
    pts = orb[burn_in::stride][:count]
    return SampleSet(pts, "orbit-empirical", params={"burn_in": burn_in, "stride": stride,
                                                 "count": count})


# ---- results ---------------------------------------------------------------------


@dataclass(frozen=True)
class SpanEstimate:
    n: int
    eps: float
    greedy_count: int
    packing_lb: int
    centers: tuple[int, ...]
    covered_fraction: float
    metric: str = "base"

    def __post_init__(self):
        if self.packing_lb > self.greedy_count:
            raise AssertionError("packing lower bound exceeds greedy count")
        if len(set(self.centers)) != len(self.centers):
            raise AssertionError("repeated centre")


@dataclass(frozen=True)
class ProfileRow:
    metric: str
    n: int
    eps: float
    estimate: SpanEstimate
    wall_ms: float


@dataclass
class ComplexityProfile:
    rows: list[ProfileRow] = field(default_factory=list)
    name: str = ""

    def add(self, row: ProfileRow) -> None:
        key = (row.metric, row.n, row.eps)
        if any((r.metric, r.n, r.eps) == key for r in self.rows):
            raise ValueError(f"duplicate row {key}")
        self.rows.append(row)

    def counts(self, metric: str, eps: float) -> list[tuple[int, int]]:
        return sorted((r.n, r.estimate.greedy_count) for r in self.rows
                      if r.metric == metric and r.eps == eps)

    @property
    def metrics(self) -> list[str]:
        return sorted({r.metric for r in self.rows})

    @property
    def eps_values(self) -> list[float]:
        return sorted({r.eps for r in self.rows})


# ---- ball structures --------------------------------------------------------------


@dataclass
class Balls:
    """Runs of positions per centre; ``pos_of[c]`` is centre c's own position."""

    ptr: np.ndarray
    start: np.ndarray
    length: np.ndarray
    pos_of: np.ndarray

    @property
    def size(self) -> int:
        return self.pos_of.shape[0]

    @classmethod
    def from_matrix(cls, dist: np.ndarray, eps: float) -> "Balls":
        adj = np.ascontiguousarray(np.asarray(dist) < eps)
        ptr, start, length = K.dense_runs(adj)
        return cls(ptr, start, length, np.arange(adj.shape[0]))

    def members(self, c: int) -> np.ndarray:
        pos = [np.arange(s, s + l) for s, l in
               zip(self.start[self.ptr[c]:self.ptr[c + 1]], self.length[self.ptr[c]:self.ptr[c + 1]])]
        return np.concatenate(pos) if pos else np.empty(0, dtype=np.int64)


def _as_matrix(sample, dist) -> np.ndarray:
    pts = sample.points if isinstance(sample, SampleSet) else np.asarray(sample, float)
    if len(pts) == 0:
        raise ValueError("empty sample")
    if isinstance(dist, np.ndarray):
        return dist
    if dist is None:
        d = np.abs(pts[:, None, :] - pts[None, :, :]) % 1.0
        return np.minimum(d, 1.0 - d).sum(axis=2)
    P = len(pts)
    out = np.zeros((P, P))
    for i in range(P):
        out[i] = dist(pts[i], pts)
    return out


def _cover(balls: Balls, eps: float, n: int, metric: str, mass: float | None,
           packing: Balls | None) -> SpanEstimate:
    P = balls.size
    target = P - 1 if mass is None else int(np.floor(mass * P))
    centres, covered = K.lazy_greedy(balls.ptr, balls.start, balls.length, P, target)
    lb = 1
    if packing is not None:
        lb = int(K.greedy_packing(packing.ptr, packing.start, packing.length, packing.pos_of, P))
        # a partial cover may leave up to P - target - 1 packed points out
        lb = max(1, lb - (P - target - 1))
    return SpanEstimate(n=n, eps=float(eps), greedy_count=int(len(centres)), packing_lb=lb,
                        centers=tuple(int(c) for c in centres), covered_fraction=covered / P,
                        metric=metric)


def greedy_span(sample, dist=None, eps: float = 0.1, n: int = 1, metric: str = "base") -> SpanEstimate:
    """Greedy eps-cover of the whole sample.

    ``dist`` is a ``(P, P)`` matrix, a callable ``dist(point, points)`` or
    ``None`` for the base torus metric on the sample coordinates.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    D = _as_matrix(sample, dist)
    sep = Balls.from_matrix(D, 2 * eps)
    return _cover(Balls.from_matrix(D, eps), eps, n, metric, None, sep)


def packing_number(sample, dist=None, eps: float = 0.1) -> int:
    """Size of the greedy (index order) eps-separated subset."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    b = Balls.from_matrix(_as_matrix(sample, dist), eps)
    return int(K.greedy_packing(b.ptr, b.start, b.length, b.pos_of, b.size))


# ---- profiles ---------------------------------------------------------------------


def orbit_cache(system: DynamicalSystem, points: np.ndarray, n_max: int) -> np.ndarray:
    """Orbits of all sample points, shape ``(P, n_max, dim)``."""
    out = np.empty((points.shape[0], n_max, system.dim))
    for m0, block in system.orbit_chunks(points, n_max, chunk=min(n_max, 1 << 14)):
        out[:, m0:m0 + block.shape[0], :] = np.transpose(block, (1, 0, 2))
    return out


def pairwise_orbit_matrices(system: DynamicalSystem, points: np.ndarray, kinds: Sequence[str],
                            n_list: Sequence[int], memory_budget: int = DEFAULT_MEMORY_BUDGET):
    """``{kind: array (len(n_list), P, P)}`` from one orbit cache and one pass per pair."""
    P = points.shape[0]
    horizons = np.array(sorted(set(int(n) for n in n_list)), dtype=np.int64)
    n_max = int(horizons[-1])
    need = P * n_max * system.dim * 8 + len(kinds) * len(horizons) * P * P * 8
    if need > memory_budget:
        raise MemoryBudgetExceeded(f"needs {need} bytes, budget {memory_budget}")
    orbits = orbit_cache(system, points, n_max)
    empty = np.zeros((0, 0, 0))
    mats = {k: (np.zeros((len(horizons), P, P)) if k in kinds else empty) for k in METRIC_KINDS}
    K.pairwise_profiles(orbits, np.ascontiguousarray(system.weights, dtype=float), horizons,
                        mats["bowen"], mats["maxmean"], mats["mean"])
    return {k: mats[k] for k in kinds}, [int(h) for h in horizons]


def _windowed_balls(system, points, kind, horizons, radii, memory_budget):
    P = points.shape[0]
    n_max = int(horizons[-1])
    need = P * n_max * 8 * 2
    if need > memory_budget:
        raise MemoryBudgetExceeded(f"needs {need} bytes, budget {memory_budget}")
    orbits = orbit_cache(system, points, n_max)
    base = np.ascontiguousarray(orbits[:, 0, 0])
    order = np.argsort(base, kind="stable").astype(np.int64)
    ptr, start, length, offs = K.window_runs(np.ascontiguousarray(orbits[order]), np.ascontiguousarray(system.weights, float),
                                             order, base, np.asarray(radii, float),
                                             np.asarray(horizons, np.int64), _KIND_CODE[kind])
    pos_of = np.empty(P, dtype=np.int64)
    pos_of[order] = np.arange(P)
    R = len(radii)
    out = {}
    for h in range(len(horizons)):
        for r in range(R):
            cell = h * R + r
            sl = slice(offs[cell], offs[cell + 1])
            out[(h, r)] = Balls(np.ascontiguousarray(ptr[h, r]), start[sl], length[sl], pos_of)
    return out


def _windowed(system: DynamicalSystem, P: int, kinds) -> bool:
    return system.dim == 1 and P > DENSE_LIMIT and all(k in ("bowen", "maxmean") for k in kinds)


def span_profile(system: DynamicalSystem, sample: SampleSet, metric_kind, n_list: Iterable[int],
                 eps_list: Iterable[float], *, memory_budget: int = DEFAULT_MEMORY_BUDGET,
                 mass: float | None = None, name: str = "") -> ComplexityProfile:
    """Greedy span and packing bound for every (metric, n, eps) cell."""
    kinds = [metric_kind] if isinstance(metric_kind, str) else list(metric_kind)
    for k in kinds:
        if k not in METRIC_KINDS:
            raise ValueError(f"unknown metric kind {k!r}")
    n_list = sorted(set(int(n) for n in n_list))
    eps_list = sorted(set(float(e) for e in eps_list))
    if not n_list or not eps_list or n_list[0] < 1 or eps_list[0] <= 0:
        raise ValueError("need n >= 1 and eps > 0")
    pts = sample.points
    profile = ComplexityProfile(name=name)
    if _windowed(system, len(pts), kinds):
        radii = sorted(set(eps_list) | {2 * e for e in eps_list})
        for kind in kinds:
            t0 = time.perf_counter()
            balls = _windowed_balls(system, pts, kind, n_list, radii, memory_budget)
            setup = (time.perf_counter() - t0) * 1e3 / (len(n_list) * len(eps_list))
            for h, n in enumerate(n_list):
                for e in eps_list:
                    t1 = time.perf_counter()
                    est = _cover(balls[(h, radii.index(e))], e, n, kind, mass,
                                 balls[(h, radii.index(2 * e))])
                    profile.add(ProfileRow(kind, n, e, est,
                                           setup + (time.perf_counter() - t1) * 1e3))
        return profile
    t0 = time.perf_counter()
    mats, horizons = pairwise_orbit_matrices(system, pts, kinds, n_list, memory_budget)
    setup = (time.perf_counter() - t0) * 1e3 / (len(kinds) * len(n_list) * len(eps_list))
    for kind in kinds:
        for h, n in enumerate(horizons):
            D = mats[kind][h]
            for e in eps_list:
                t1 = time.perf_counter()
                est = _cover(Balls.from_matrix(D, e), e, n, kind, mass, Balls.from_matrix(D, 2 * e))
                profile.add(ProfileRow(kind, n, e, est, setup + (time.perf_counter() - t1) * 1e3))
    return profile


def measure_span(system: DynamicalSystem, measure_sampler, metric_kind: str, n: int, eps: float,
                 *, count: int | None = None, seed: int = 0,
                 memory_budget: int = DEFAULT_MEMORY_BUDGET) -> SpanEstimate:
    """Greedy cover of more than ``1 - eps`` of a sample drawn from the measure.

    ``measure_sampler`` is a :class:`SampleSet` or a callable
    ``(count, seed) -> SampleSet``.
    """
    if eps <= 0 or n < 1:
        raise ValueError("need n >= 1 and eps > 0")
    if isinstance(measure_sampler, SampleSet):
        sample = measure_sampler
    else:
        count = count if count is not None else int(np.ceil(40 / eps))
        try:
            sample = measure_sampler(count, seed)
        except Exception as exc:  # pragma: no cover - reported to caller
            raise RuntimeError(f"sampler failed: {exc}") from exc
    if len(sample) < 10 / eps:
        raise SampleTooSmall(f"{len(sample)} points; need at least {int(np.ceil(10 / eps))}")
    prof = span_profile(system, sample, metric_kind, [n], [eps], memory_budget=memory_budget,
                        mass=1.0 - eps)
    return prof.rows[0].estimate


def boundedness_verdict(profile: ComplexityProfile, metric: str | None = None) -> str:
    """``bounded`` / ``growing`` / ``inconclusive`` for one metric kind of a profile."""
    kinds = profile.metrics
    if metric is None:
        if len(kinds) != 1:
            raise ValueError("profile mixes metric kinds; pass metric=")
        metric = kinds[0]
    eps_values = sorted({r.eps for r in profile.rows if r.metric == metric})
    if not eps_values:
        raise InsufficientRows("no rows for metric")
    series = []
    for e in eps_values:
        s = profile.counts(metric, e)
        if len(s) < 4:
            raise InsufficientRows(f"eps={e}: {len(s)} horizon values, need 4")
        series.append([c for _, c in s])
    if all(len(set(s[len(s) // 2:])) == 1 for s in series):
        return "bounded"
    if all(all(a < b for a, b in zip(s[-4:], s[-3:])) for s in series):
        return "growing"
    return "inconclusive"
