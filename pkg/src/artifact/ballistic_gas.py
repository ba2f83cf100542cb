"""Ballistic point gas on a ring with velocity-randomizing collisions.

Particles move freely with |v| <= 1. When two neighbours cross within a
time step they collide at the crossing point and both velocities are
redrawn uniformly on [-1, 1]. A weak bath injects particles at rate
gamma/2 per unit length and removes each at rate gamma, so the bath fixed
point has density 1/2. The soft tilt penalises occupation of the window
(-a/2, a/2) around the origin at rate lambda per particle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba as nb
import numpy as np

from .cloning import run_population
from .errors import CapacityError, DomainError
from .streams import counter_uniform

DEFAULT_DT = 0.05
BATH_DENSITY = 0.5

_CH_COLLIDE = 0
_CH_REMOVE = 1
_CH_INJECT = 2


@dataclass
class GasState:
    L: float
    x: np.ndarray
    v: np.ndarray
    time: float = 0.0
    n_collisions: int = 0

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        if self.x.shape != self.v.shape:
            raise DomainError("positions and velocities differ in length")
        if np.any(self.x < 0) or np.any(self.x >= self.L):
            raise DomainError("positions must lie in [0, L)")
        if np.any(np.abs(self.v) > 1):
            raise DomainError("velocities must satisfy |v| <= 1")
        order = np.argsort(self.x, kind="stable")
        self.x, self.v = self.x[order], self.v[order]

    @property
    def n(self):
        return self.x.size


@dataclass(frozen=True)
class TiltParams:
    lam: float
    a: float = 1.0
    gamma: float = 0.0

    def __post_init__(self):
        if self.lam < 0 or self.a <= 0 or self.gamma < 0:
            raise DomainError("need lambda >= 0, a > 0, gamma >= 0")


@nb.njit(cache=True)
def _insert_sorted(x, v, n, xi, vi):
    j = n
    while j > 0 and x[j - 1] > xi:
        x[j] = x[j - 1]
        v[j] = v[j - 1]
        j -= 1
    x[j] = xi
    v[j] = vi


@nb.njit(cache=True)
def _substep(x, v, n, L, dt, gamma, seed, slot, step, newx, done):
    """Advance one clone by dt in place. Returns (n, collisions, overflow)."""
    b = step * 4
    ncoll = 0
    for i in range(n):
        done[i] = False
        newx[i] = x[i] + v[i] * dt
    if n >= 2:
        for i in range(n):
            j = i + 1
            if j < n:
                gap = x[j] - x[i]
            else:
                j = 0
                gap = x[0] + L - x[i]
            if done[i] or done[j]:
                continue
            dv = v[i] - v[j]
            if dv > 0.0 and gap < dv * dt:
                tc = gap / dv
                xc = x[i] + v[i] * tc
                u1 = 2.0 * counter_uniform(seed, slot, b + _CH_COLLIDE, 2 * i) - 1.0
                u2 = 2.0 * counter_uniform(seed, slot, b + _CH_COLLIDE, 2 * i + 1) - 1.0
                lo = min(u1, u2)
                hi = max(u1, u2)
                rest = dt - tc
                newx[i] = xc + lo * rest
                newx[j] = xc + hi * rest - (L if j == 0 else 0.0)
                v[i] = lo
                v[j] = hi
                done[i] = True
                done[j] = True
                ncoll += 1
    # wrap and restore order; particles that slipped past each other in a
    # multi-collision step simply pass through
    for i in range(n):
        xi = newx[i] % L
        if xi >= L:
            xi = 0.0
        newx[i] = xi
    for i in range(n):
        x[i] = newx[i]
    for i in range(1, n):
        xi = x[i]
        vi = v[i]
        j = i
        while j > 0 and x[j - 1] > xi:
            x[j] = x[j - 1]
            v[j] = v[j - 1]
            j -= 1
        x[j] = xi
        v[j] = vi

    overflow = 0
    if gamma > 0.0:
        p_remove = -np.expm1(-gamma * dt)
        m = 0
        for i in range(n):
            if counter_uniform(seed, slot, b + _CH_REMOVE, i) >= p_remove:
                x[m] = x[i]
                v[m] = v[i]
                m += 1
        n = m
        # Poisson injection by inversion
        mean = BATH_DENSITY * gamma * L * dt
        u = counter_uniform(seed, slot, b + _CH_INJECT, 0)
        k = 0
        p = np.exp(-mean)
        cdf = p
        while u > cdf and k < 64:
            k += 1
            p *= mean / k
            cdf += p
        cap = x.size
        for q in range(k):
            if n >= cap:
                overflow += 1
                continue
            xi = L * counter_uniform(seed, slot, b + _CH_INJECT, 2 * q + 1)
            vi = 2.0 * counter_uniform(seed, slot, b + _CH_INJECT, 2 * q + 2) - 1.0
            _insert_sorted(x, v, n, xi, vi)
            n += 1
    return n, ncoll, overflow


@nb.njit(cache=True)
def _window_count(x, n, L, a):
    half = 0.5 * a
    c = 0
    for i in range(n):
        if x[i] < half or x[i] > L - half:
            c += 1
    return c


def _seed_of(rng):
    return np.uint64(rng.integers(0, 2**63 - 1))


def evolve_gas(state: GasState, dt, rng, gamma=0.0) -> GasState:
    """Advance a single gas by one time step of length ``dt``."""
    if dt <= 0:
        raise DomainError("dt must be positive")
    cap = max(2 * state.n + 64, 16)
    x = np.zeros(cap)
    v = np.zeros(cap)
    x[: state.n] = state.x
    v[: state.n] = state.v
    n, ncoll, overflow = _substep(
        x, v, state.n, float(state.L), float(dt), float(gamma),
        _seed_of(rng), np.int64(0), np.int64(0), np.zeros(cap), np.zeros(cap, dtype=np.bool_),
    )
    if overflow:
        raise CapacityError("particle buffer overflow")
    return GasState(state.L, x[:n].copy(), v[:n].copy(), state.time + dt, state.n_collisions + ncoll)


def tilt_weight(state: GasState, dt, p: TiltParams) -> float:
    """Log weight -lambda dt times the occupation of the open window around 0."""
    if p.lam == 0.0:
        return 0.0
    return -p.lam * dt * _window_count(state.x, state.n, float(state.L), float(p.a))


@nb.njit(parallel=True, cache=True)
def _advance_all(X, V, N, L, dt, n_sub, gamma, lam, a, seed, step0, stats):
    n_clones = X.shape[0]
    cap = X.shape[1]
    logw = np.zeros(n_clones)
    for c in nb.prange(n_clones):
        newx = np.empty(cap)
        done = np.empty(cap, dtype=np.bool_)
        n = N[c]
        acc = 0.0
        for k in range(n_sub):
            n, ncoll, over = _substep(X[c], V[c], n, L, dt, gamma, seed, c, step0 + k, newx, done)
            stats[c, 0] += ncoll
            stats[c, 1] += over
            if lam > 0.0:
                acc -= lam * dt * _window_count(X[c], n, L, a)
        N[c] = n
        logw[c] = acc
    return logw


class GasProcess:
    """Tilted ballistic gas as a cloning process.

    Each barrier interval ``barrier`` is split into substeps of length ``dt``.
    Clones start from the bath measure: Poisson positions at density 1/2 and
    independent uniform velocities.
    """

    def __init__(self, L, tilt: TiltParams, dt=DEFAULT_DT, barrier=1.0, capacity=None):
        if L <= 0:
            raise DomainError("L must be positive")
        n_sub = barrier / dt
        if dt <= 0 or abs(n_sub - round(n_sub)) > 1e-9:
            raise DomainError("barrier must be a whole number of substeps")
        self.L = float(L)
        self.tilt = tilt
        self.gamma = tilt.gamma
        self.sub_dt = float(dt)
        self.n_sub = int(round(n_sub))
        self.dt = float(barrier)
        self.capacity = int(capacity or max(32, 2 * int(np.ceil(L))))

    def initial(self, n_clones, seed):
        rng = np.random.default_rng([int(seed), 0x6A5])
        X = np.zeros((n_clones, self.capacity))
        V = np.zeros((n_clones, self.capacity))
        N = np.zeros(n_clones, dtype=np.int64)
        for c in range(n_clones):
            n = min(rng.poisson(BATH_DENSITY * self.L), self.capacity)
            X[c, :n] = np.sort(rng.uniform(0.0, self.L, n))
            V[c, :n] = rng.uniform(-1.0, 1.0, n)
            N[c] = n
        return {"x": X, "v": V, "n": N, "stats": np.zeros((n_clones, 2), dtype=np.int64)}

    def advance(self, state, step, seed):
        logw = _advance_all(
            state["x"], state["v"], state["n"], self.L, self.sub_dt, self.n_sub,
            float(self.tilt.gamma), float(self.tilt.lam), float(self.tilt.a),
            np.uint64(seed), np.int64(step * self.n_sub), state["stats"],
        )
        if state["stats"][:, 1].any():
            raise CapacityError("particle buffer overflow; raise capacity")
        return logw

    def select(self, state, idx):
        return {
            "x": state["x"][idx],
            "v": state["v"][idx],
            "n": state["n"][idx],
            "stats": state["stats"][idx],
        }


def qss_rate_gas(p: TiltParams, L, n_clones, T, seed, dt=DEFAULT_DT, burn_in=None, window=None):
    """Quasi-stationary decay rate of the tilted gas via population dynamics."""
    proc = GasProcess(L, p, dt=dt)
    if burn_in is None and p.gamma == 0.0:
        burn_in = 0.0
    return run_population(proc, n_clones, T, seed, burn_in=burn_in, window=window).estimate
