"""Base metrics and the three orbit metrics.

For a pair of orbits with step distances ``d(T^i x, T^i y)``, ``i < n``:

* Bowen ``d_n``: the maximum;
* mean ``dbar_n``: the average;
* max-mean ``dhat_n``: ``max_{k <= n} dbar_k``.

So ``d_n >= dhat_n >= dbar_n``, with equality at ``n = 1``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .systems import DynamicalSystem, HorizonOverflow

METRIC_KINDS = ("bowen", "maxmean", "mean")


@dataclass(frozen=True)
class CirclePoint:
    x: float

    def __post_init__(self):
        v = float(self.x) % 1.0
        object.__setattr__(self, "x", 0.0 if v >= 1.0 else v)


@dataclass(frozen=True)
class Torus2Point:
    x: float
    y: float

    def __post_init__(self):
        for name in ("x", "y"):
            v = float(getattr(self, name)) % 1.0
            object.__setattr__(self, name, 0.0 if v >= 1.0 else v)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])


def _coord(p):
    if isinstance(p, CirclePoint):
        return p.x
    if isinstance(p, Torus2Point):
        return p.as_array()
    return p


def circle_dist(a, b):
    """``||a - b||``, the distance to the nearest integer; works elementwise."""
    d = np.abs(np.asarray(_coord(a), float) - np.asarray(_coord(b), float)) % 1.0
    d = np.minimum(d, 1.0 - d)
    return float(d) if d.ndim == 0 else d


def torus2_dist(p, q):
    """Sum of the two coordinate circle distances."""
    p = np.asarray(_coord(p), float)
    q = np.asarray(_coord(q), float)
    d = circle_dist(p, q)
    s = np.sum(d, axis=-1)
    return float(s) if np.ndim(s) == 0 else s


@dataclass(frozen=True)
class OrbitMetricTriple:
    n: int
    d_n: float
    dhat_n: float
    dbar_n: float


@dataclass
class MetricProfiles:
    """Profiles of many pairs at once: arrays of shape ``(n_max, P)``."""

    bowen: np.ndarray
    maxmean: np.ndarray
    mean: np.ndarray

    def triple(self, n: int, p: int = 0) -> OrbitMetricTriple:
        i = n - 1
        return OrbitMetricTriple(n, float(self.bowen[i, p]), float(self.maxmean[i, p]),
                                 float(self.mean[i, p]))


def _stream(system: DynamicalSystem, X, Y, n: int, keep: bool, chunk: int):
    X = system.as_states(X)
    Y = system.as_states(Y)
    if X.shape != Y.shape:
        raise ValueError("point batches must have equal shapes")
    if n < 1:
        raise ValueError("n must be >= 1")
    P = X.shape[0]
    both = np.concatenate([X, Y], axis=0)
    run_max = np.zeros(P)
    run_sum = np.zeros(P)
    run_mm = np.zeros(P)
    rows = []
    for m0, block in system.orbit_chunks(both, n, chunk):
        d = system.dist(block[:, :P], block[:, P:])
        mx = np.maximum.accumulate(d, axis=0)
        np.maximum(mx, run_max, out=mx)
        cs = np.cumsum(d, axis=0) + run_sum
        # rounding in the running sum must not lift an average above the maximum
        mean = np.minimum(cs / np.arange(m0 + 1, m0 + 1 + d.shape[0])[:, None], mx)
        mm = np.maximum.accumulate(mean, axis=0)
        np.maximum(mm, run_mm, out=mm)
        run_max, run_sum, run_mm = mx[-1], cs[-1], mm[-1]
        if keep:
            rows.append((mx, mm, mean))
        last_mean = mean[-1]
    if keep:
        return MetricProfiles(*(np.concatenate([r[i] for r in rows]) for i in range(3)))
    return run_max, run_mm, last_mean


def orbit_metrics(system: DynamicalSystem, x, y, n: int, chunk: int = 1 << 14) -> OrbitMetricTriple:
    """``(d_n, dhat_n, dbar_n)`` for one pair in a single streaming pass."""
    mx, mm, mean = _stream(system, [_coord(x)], [_coord(y)], n, False, chunk)
    return OrbitMetricTriple(n, float(mx[0]), float(mm[0]), float(mean[0]))


def metric_profile(system: DynamicalSystem, x, y, n_max: int) -> list[OrbitMetricTriple]:
    prof = _stream(system, [_coord(x)], [_coord(y)], n_max, True, 1 << 14)
    return [prof.triple(n) for n in range(1, n_max + 1)]


def metric_profile_batch(system: DynamicalSystem, X, Y, n_max: int, chunk: int = 1 << 12) -> MetricProfiles:
    """Profiles for the pairs ``(X[p], Y[p])``, ``n = 1..n_max``."""
    return _stream(system, X, Y, n_max, True, chunk)


__all__ = [
    "CirclePoint", "Torus2Point", "OrbitMetricTriple", "MetricProfiles", "METRIC_KINDS",
    "circle_dist", "torus2_dist", "orbit_metrics", "metric_profile", "metric_profile_batch",
    "HorizonOverflow",
]
