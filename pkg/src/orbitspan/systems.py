"""Reference dynamical systems on the circle, the 2-torus and finite tori.

Every state space here is a torus ``T^dim`` with the weighted metric
``sum_c w_c ||a_c - b_c||``; states are float arrays of shape ``(P, dim)``.
Orbits are produced time-major in chunks, using closed forms where the map
is a rotation so that long orbits do not accumulate rounding.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from .cocycle import CocycleFunction, CocyclePath, rotation_orbit_floats
from .diophantine import ContinuedFractionAlpha
from .schedule import ParameterSchedule

DEFAULT_MAX_HORIZON = 10 ** 9
DEFAULT_CHUNK = 1 << 16


class HorizonOverflow(ValueError):
    pass


def _wrap(a: np.ndarray) -> np.ndarray:
    a = np.mod(a, 1.0)
    a[a >= 1.0] = 0.0
    return a


class DynamicalSystem:
    """A map ``T`` on ``T^dim`` together with its base metric."""

    space: str = "circle"
    dim: int = 1
    description: str = ""
    max_horizon: int = DEFAULT_MAX_HORIZON

    @property
    def weights(self) -> np.ndarray:
        return np.ones(self.dim)

    def as_states(self, states) -> np.ndarray:
        a = np.array(states, dtype=float)
        if a.ndim == 0:
            a = a.reshape(1, 1)
        elif a.ndim == 1:
            a = a.reshape(-1, 1) if self.dim == 1 else a.reshape(1, -1)
        if a.shape[1] != self.dim:
            raise ValueError(f"{self.space} states need {self.dim} coordinates, got {a.shape[1]}")
        return _wrap(a)

    def step(self, states) -> np.ndarray:
        raise NotImplementedError

    def dist(self, a, b) -> np.ndarray:
        d = np.abs(np.asarray(a, float) - np.asarray(b, float)) % 1.0
        d = np.minimum(d, 1.0 - d)
        return d @ self.weights

    def check_horizon(self, n: int) -> None:
        if n > self.max_horizon:
            raise HorizonOverflow(f"horizon {n} exceeds configured maximum {self.max_horizon}")

    def orbit_chunks(self, states, n: int, chunk: int = DEFAULT_CHUNK) -> Iterator[tuple[int, np.ndarray]]:
        """Yield ``(m0, block)`` with ``block[j] = T^(m0+j)(states)``, covering ``0 <= m < n``."""
        self.check_horizon(n)
        cur = self.as_states(states)
        for m0 in range(0, n, chunk):
            cnt = min(chunk, n - m0)
            block = np.empty((cnt,) + cur.shape)
            for j in range(cnt):
                block[j] = cur
                cur = self.step(cur)
            yield m0, block

    def orbit(self, states, n: int) -> np.ndarray:
        """Time-major orbit array of shape ``(n, P, dim)``."""
        blocks = [b for _, b in self.orbit_chunks(states, n, chunk=max(n, 1))]
        return blocks[0] if blocks else np.empty((0,) + self.as_states(states).shape)

    def iterate(self, states, n: int) -> np.ndarray:
        """``T^n`` applied by repeated stepping."""
        cur = self.as_states(states)
        for _ in range(n):
            cur = self.step(cur)
        return cur


# ---- circle maps ------------------------------------------------------------------


def rotation_step(alpha, x):
    a = alpha.value if isinstance(alpha, ContinuedFractionAlpha) else float(alpha)
    return _wrap(np.asarray(x, dtype=float) + a) if np.ndim(x) else float((x + a) % 1.0)


def doubling_step(x):
    if np.ndim(x):
        return _wrap(2.0 * np.asarray(x, dtype=float))
    return float((2.0 * x) % 1.0)


def _exact_alpha(alpha) -> ContinuedFractionAlpha | None:
    if isinstance(alpha, ContinuedFractionAlpha):
        return alpha
    if isinstance(alpha, str):
        return ContinuedFractionAlpha.parse(alpha)
    a = float(alpha) % 1.0
    return None if a == 0.0 else ContinuedFractionAlpha.from_value(a)


def _multiples(alpha: ContinuedFractionAlpha | None, m0: int, count: int) -> np.ndarray:
    if alpha is None:
        return np.zeros(count)
    return rotation_orbit_floats(alpha, 0, m0, count)


class Rotation(DynamicalSystem):
    space = "circle"
    dim = 1

    def __init__(self, alpha="golden"):
        self.alpha = _exact_alpha(alpha)
        self.alpha_value = 0.0 if self.alpha is None else self.alpha.value
        self.description = f"rotation by {self.alpha_value!r}"

    def step(self, states):
        return _wrap(np.asarray(states, float) + self.alpha_value)

    def orbit_chunks(self, states, n, chunk=DEFAULT_CHUNK):
        self.check_horizon(n)
        x0 = self.as_states(states)
        for m0 in range(0, n, chunk):
            cnt = min(chunk, n - m0)
            yield m0, _wrap(x0[None, :, :] + _multiples(self.alpha, m0, cnt)[:, None, None])


class Doubling(DynamicalSystem):
    space = "circle"
    dim = 1
    description = "doubling map x -> 2x"

    def step(self, states):
        return _wrap(2.0 * np.asarray(states, float))


# ---- finite product of rotations -----------------------------------------------------


def _primes(count: int) -> list[int]:
    out, c = [], 2
    while len(out) < count:
        if all(c % p for p in out if p * p <= c):
            out.append(c)
        c += 1
    return out


def default_taus(count: int) -> np.ndarray:
    """Halved square roots of the first primes."""
    return np.sqrt(np.array(_primes(count), dtype=float)) / 2.0


class ProductBernoulliRotations(DynamicalSystem):
    """Coordinates ``i < N``; coordinate i rotates by ``taus[i]`` iff ``omega[i] == 1``."""

    space = "product"
    max_coordinates = 32

    def __init__(self, N: int = 8, omega=None, taus=None, seed: int = 0):
        if not 1 <= N <= self.max_coordinates:
            raise ValueError(f"N must lie in [1, {self.max_coordinates}]")
        if omega is None:
            omega = np.random.default_rng(seed).integers(0, 2, size=N)
        omega = np.asarray(omega, dtype=np.int64)
        taus = default_taus(N) if taus is None else np.asarray(taus, dtype=float)
        if omega.shape != (N,) or taus.shape != (N,):
            raise ValueError("omega and taus must have length N")
        if not set(np.unique(omega)) <= {0, 1}:
            raise ValueError("omega must be a bit vector")
        if len(np.unique(taus)) != N:
            raise ValueError("taus must be pairwise distinct")
        self.N = N
        self.dim = N
        self.omega = omega
        self.taus = taus
        self._w = 0.5 ** np.arange(1, N + 1)
        self._exact = [ContinuedFractionAlpha.from_value(t % 1.0) if b and t % 1.0 else None
                       for t, b in zip(taus, omega)]
        self.description = f"product of {N} rotations, omega={''.join(map(str, omega))}"

    @property
    def weights(self) -> np.ndarray:
        return self._w

    @property
    def tail_weight(self) -> float:
        """Weight of the coordinates dropped from the infinite product."""
        return 2.0 ** -self.N

    def step(self, states):
        s = np.asarray(states, float)
        if s.shape[-1] != self.N:
            raise ValueError("dimension mismatch")
        return _wrap(s + self.omega * self.taus)

    def orbit_chunks(self, states, n, chunk=DEFAULT_CHUNK):
        self.check_horizon(n)
        w0 = self.as_states(states)
        for m0 in range(0, n, chunk):
            cnt = min(chunk, n - m0)
            shifts = np.stack([_multiples(e, m0, cnt) for e in self._exact], axis=1)
            yield m0, _wrap(w0[None, :, :] + shifts[:, None, :])


def product_step(system: ProductBernoulliRotations, state):
    return system.step(state)


# ---- skew products on the 2-torus -----------------------------------------------------


class SkewProduct(DynamicalSystem):
    """``(x, y) -> (x + alpha, y + s h(x) + beta)``.

    ``h`` may be a :class:`CocycleFunction`, a constant, ``None`` (zero) or
    a vectorised circle function.
    """

    space = "torus2"
    dim = 2

    def __init__(self, alpha="golden", h=None, s: int = 1, beta=0.0, description: str = ""):
        if isinstance(h, CocycleFunction):
            alpha = h.alpha
        self.alpha = _exact_alpha(alpha)
        self.alpha_value = 0.0 if self.alpha is None else self.alpha.value
        self.h = h
        self.s = s
        self.beta = _exact_alpha(beta)
        self.beta_value = 0.0 if self.beta is None else self.beta.value
        if h is not None and not callable(h):
            self.h = float(h)
        self.description = description or f"skew product over rotation by {self.alpha_value!r}"

    def h_values(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.h is None:
            return np.zeros_like(x)
        if isinstance(self.h, float):
            return np.full_like(x, self.h)
        return np.asarray(self.h(x), dtype=float)

    def step(self, states):
        s = np.asarray(states, float)
        out = np.empty_like(s)
        out[..., 0] = s[..., 0] + self.alpha_value
        out[..., 1] = s[..., 1] + self.s * self.h_values(s[..., 0]) + self.beta_value
        return _wrap(out)

    def orbit_chunks(self, states, n, chunk=DEFAULT_CHUNK):
        self.check_horizon(n)
        z0 = self.as_states(states)
        P = z0.shape[0]
        if isinstance(self.h, CocycleFunction):
            paths = [CocyclePath(self.h, float(x), n, scale=float(self.s)) for x in z0[:, 0]]
        else:
            paths = None
        xs_units = [self.alpha.to_units(float(x)) if self.alpha else 0 for x in z0[:, 0]]
        acc = np.zeros(P)  # running Birkhoff sum for generic h
        for m0 in range(0, n, chunk):
            cnt = min(chunk, n - m0)
            block = np.empty((cnt, P, 2))
            for p in range(P):
                if self.alpha is None:
                    block[:, p, 0] = z0[p, 0]
                else:
                    block[:, p, 0] = rotation_orbit_floats(self.alpha, xs_units[p], m0, cnt)
            m = np.arange(m0, m0 + cnt)
            shift = _multiples(self.beta, m0, cnt)
            if paths is not None:
                for p in range(P):
                    block[:, p, 1] = z0[p, 1] + paths[p].values(m) + shift
            elif self.h is None or isinstance(self.h, float):
                c = 0.0 if self.h is None else self.h
                # s * c * m, reduced before adding to keep magnitudes small
                block[:, :, 1] = z0[None, :, 1] + np.mod(self.s * c * m, 1.0)[:, None] + shift[:, None]
            else:
                hv = self.s * self.h_values(block[:, :, 0])
                cs = np.cumsum(hv, axis=0)
                prev = np.vstack([np.zeros((1, P)), cs[:-1]]) + acc
                block[:, :, 1] = z0[None, :, 1] + prev + shift[:, None]
                acc = acc + cs[-1]
            yield m0, _wrap(block)


def skew_step(alpha, h, state):
    """One step of ``(x, y) -> (x + alpha, y + h(x))``."""
    return SkewProduct(alpha, h).step(state)


def tbeta_step(schedule: ParameterSchedule, s: int, beta, state, depth: int | None = None):
    """One step of ``(x, y) -> (x + alpha, y + s h(x) + beta)``."""
    if s == 0:
        raise ValueError("s must be a nonzero integer")
    return SkewProduct(schedule.alpha, CocycleFunction(schedule, depth), s, beta).step(state)


def appendix_system(schedule: ParameterSchedule, depth: int | None = None) -> SkewProduct:
    f = CocycleFunction(schedule, depth)
    return SkewProduct(schedule.alpha, f, description=f"tent skew product, depth {f.depth}")


def perturbed_system(schedule: ParameterSchedule, s: int = 1, beta="sqrt2",
                     depth: int | None = None) -> SkewProduct:
    """The uniquely ergodic perturbation ``y + s h(x) + beta``."""
    if s == 0:
        raise ValueError("s must be a nonzero integer")
    f = CocycleFunction(schedule, depth)
    return SkewProduct(schedule.alpha, f, s=s, beta=beta,
                       description=f"perturbed tent skew product, s={s}, depth {f.depth}")


class StepSystem(DynamicalSystem):
    """Wrap a plain vectorised step function."""

    def __init__(self, step: Callable, space: str = "circle", dim: int = 1, description: str = ""):
        self._step = step
        self.space = space
        self.dim = dim
        self.description = description or getattr(step, "__name__", "custom map")

    def step(self, states):
        return _wrap(np.asarray(self._step(np.asarray(states, float)), float))
