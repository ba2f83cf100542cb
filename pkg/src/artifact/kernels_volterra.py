"""Diffusion kernels and Volterra closures for the fluid filtering rate.

A coherence at position X(t) is dephased by fluid charge arriving at its
site. Conditioning on survival leaves a rate r(t) fixed by the first-kind
Volterra relation

    int_0^t G(X(t) - X(tau), t - tau) r(tau) dtau = exp(-s) / 2

with the screened heat kernel G. Everything here is deterministic and
vectorised over numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import DomainError, NumericalFailure

# relative growth of |r| past the reference scale that counts as blow-up
INSTABILITY_FACTOR = 1.0e3


@dataclass(frozen=True)
class KernelParams:
    D: float = 1.0
    gamma: float = 0.04
    s: float = 0.5

    def __post_init__(self):
        if not (np.isfinite(self.D) and self.D > 0):
            raise DomainError(f"D must be positive, got {self.D}")
        if not (np.isfinite(self.gamma) and self.gamma >= 0):
            raise DomainError(f"gamma must be >= 0, got {self.gamma}")
        if not (np.isfinite(self.s) and self.s >= 0):
            raise DomainError(f"s must be >= 0, got {self.s}")


@dataclass(frozen=True)
class Trajectory:
    """Coherence path sampled on a uniform time grid starting at t=0."""

    times: np.ndarray
    positions: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        x = np.asarray(self.positions, dtype=float)
        if t.ndim != 1 or t.shape != x.shape or t.size < 2:
            raise DomainError("times and positions must be 1-d arrays of equal length >= 2")
        if t[0] != 0.0:
            raise DomainError("trajectory must start at t=0")
        steps = np.diff(t)
        if np.any(steps <= 0):
            raise DomainError("times must be strictly increasing")
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
            raise DomainError("time grid must be uniform")
        if not np.all(np.isfinite(x)):
            raise DomainError("positions must be finite")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "positions", x)

    @property
    def dt(self):
        return float(self.times[1] - self.times[0])

    @classmethod
    def uniform(cls, T, dt, velocity=0.0):
        n = int(round(T / dt))
        if n < 1 or not np.isclose(n * dt, T):
            raise DomainError(f"T={T} is not a multiple of dt={dt}")
        t = dt * np.arange(n + 1)
        return cls(t, velocity * t)


@dataclass(frozen=True)
class RateHistory:
    """Piecewise-constant rate: ``rates[j]`` holds on (times[j] - dt, times[j]]."""

    times: np.ndarray
    rates: np.ndarray

    @property
    def late_rate(self):
        return float(self.rates[-1])


def kernel_screened(dx, tau, p: KernelParams):
    tau = np.asarray(tau, dtype=float)
    if np.any(tau <= 0):
        raise DomainError("kernel lag tau must be positive")
    dx = np.asarray(dx, dtype=float)
    return np.exp(-p.gamma * tau - dx * dx / (4.0 * p.D * tau)) / np.sqrt(4.0 * np.pi * p.D * tau)


def _radial_integral(a, b, p: KernelParams):
    """Exact int_a^b exp(-gamma u) / sqrt(4 pi D u) du for 0 <= a < b."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if p.gamma == 0.0:
        return (np.sqrt(b) - np.sqrt(a)) / np.sqrt(np.pi * p.D)
    g = p.gamma
    # erfc differences keep precision once gamma*u is large
    lo = np.sqrt(g * a)
    hi = np.sqrt(g * b)
    big = lo > 1.0
    diff = np.where(big, special.erfc(lo) - special.erfc(hi), special.erf(hi) - special.erf(lo))
    return diff / (2.0 * np.sqrt(p.D * g))


def _reference_rate(p: KernelParams, dt):
    # scale of r on the first step (Abel regime) or at late times, whichever is larger
    return np.exp(-p.s) * np.sqrt(p.D * max(p.gamma, 1.0 / (np.pi * dt)))


def solve_rate_history(traj: Trajectory, p: KernelParams) -> RateHistory:
    """Product-integration solve of the filtering-rate Volterra equation.

    r is piecewise constant per step. On each subinterval the
    exp(-gamma u)/sqrt(u) factor is integrated exactly and the Gaussian
    displacement factor is taken at the subinterval midpoint. The lower
    triangular system is solved by forward substitution.
    """
    t = traj.times
    x = traj.positions
    dt = traj.dt
    n = t.size - 1
    rhs = 0.5 * np.exp(-p.s)
    edges = dt * np.arange(n + 1)
    radial = _radial_integral(edges[:-1], edges[1:], p)  # lag index m = n - j
    x_mid = 0.5 * (x[:-1] + x[1:])
    t_mid = 0.5 * (t[:-1] + t[1:])
    pinned = np.all(x == x[0])
    r = np.empty(n)
    cap = INSTABILITY_FACTOR * _reference_rate(p, dt)
    for k in range(n):
        # collocation at t[k+1]; unknowns r[0..k]
        lags = radial[k::-1]
        if pinned:
            w = lags
        else:
            dx = x[k + 1] - x_mid[: k + 1]
            u = t[k + 1] - t_mid[: k + 1]
            w = lags * np.exp(-dx * dx / (4.0 * p.D * u))
        acc = np.dot(w[:k], r[:k]) if k else 0.0
        r[k] = (rhs - acc) / w[k]
        if not np.isfinite(r[k]) or abs(r[k]) > cap:
            raise NumericalFailure(
                f"rate history unstable at t={t[k + 1]:.6g} (|r|={abs(r[k]):.3g} > {cap:.3g})",
                history=r[: k + 1],
            )
    return RateHistory(times=t[1:].copy(), rates=r)


def rate_constant_velocity(v, p: KernelParams):
    if p.gamma == 0.0 and np.any(np.asarray(v) == 0):
        raise DomainError("no stationary rate for a pinned coherence without noise")
    v = np.asarray(v, dtype=float)
    out = np.exp(-p.s) * np.sqrt(p.D * p.gamma + 0.25 * v * v)
    return float(out) if out.ndim == 0 else out


def action_eff(traj: Trajectory, p: KernelParams):
    """Effective action of a coherence path: kinetic cost plus filtering cost."""
    hist = solve_rate_history(traj, p)
    dt = traj.dt
    vel = np.diff(traj.positions) / dt
    kinetic = np.sum(vel * vel) * dt / (4.0 * p.D)
    filtering = 2.0 * np.expm1(p.s) * np.sum(hist.rates) * dt
    return float(kinetic + filtering)


def late_rate_velocity(v, p: KernelParams, T=300.0, dt=0.05):
    """Late-time Volterra rate on the straight path X = v t."""
    hist = solve_rate_history(Trajectory.uniform(T, dt, velocity=v), p)
    return hist.late_rate


def rate_function_velocity(v, p: KernelParams, T=300.0, dt=0.05, r0=None):
    """Cost per unit time of moving at constant speed v, relative to v = 0.

    Uses late-time Volterra rates, so it tests the discretised closure and
    not the closed form.
    """
    if r0 is None:
        r0 = late_rate_velocity(0.0, p, T, dt)
    rv = late_rate_velocity(v, p, T, dt)
    return v * v / (4.0 * p.D) + 2.0 * np.expm1(p.s) * (rv - r0)


def deff_weak_noise(p: KernelParams):
    if p.gamma <= 0:
        raise DomainError("dressed diffusivity needs gamma > 0")
    return 1.0 / (1.0 / p.D + (-np.expm1(-p.s)) / np.sqrt(p.D * p.gamma))


def deff_from_rate_function(p: KernelParams, v=0.02, T=300.0, dt=0.05):
    """Dressed diffusivity from the curvature of the Volterra rate function.

    Second differences at v and 2v are combined to cancel the quartic term.
    """
    r0 = late_rate_velocity(0.0, p, T, dt)
    i1 = rate_function_velocity(v, p, T, dt, r0)
    i2 = rate_function_velocity(2 * v, p, T, dt, r0)
    # I is even: I(v) = c2 v^2 + c4 v^4 + ...
    c2 = (16.0 * i1 - i2) / (12.0 * v * v)
    return 1.0 / (4.0 * c2)


def pinned_kernel_integral(p: KernelParams):
    """int_0^inf G(0, u) du in closed form."""
    if p.gamma <= 0:
        raise DomainError("pinned kernel integral diverges at gamma = 0")
    return 0.5 / np.sqrt(p.D * p.gamma)


def _split_quad(f, p: KernelParams):
    """int_0^inf f(u) du / sqrt(u), split at 1/gamma, with u = w^2 on the inner piece."""
    split = 1.0 / p.gamma
    inner, e1 = integrate.quad(lambda w: 2.0 * f(w * w), 0.0, np.sqrt(split), limit=200, epsabs=1e-14, epsrel=1e-12)
    outer, e2 = integrate.quad(lambda u: f(u) / np.sqrt(u), split, np.inf, limit=200, epsabs=1e-14, epsrel=1e-12)
    err = e1 + e2
    total = inner + outer
    if not np.isfinite(total) or err > 1e-8 * max(abs(total), 1e-300) + 1e-13:
        raise NumericalFailure(f"annealed quadrature did not converge (estimate {total}, error {err})")
    return total


def annealed_rate(ell, p: KernelParams, deff):
    """Rate for a coherence wandering around a fixed centre with spread ell.

    The lag kernel is the pinned kernel averaged over Gaussian increments of
    variance 2 deff u + 2 ell^2 (1 - exp(-D u / ell^2)).
    """
    if ell < 0:
        raise DomainError("ell must be >= 0")
    if deff < 0:
        raise DomainError("deff must be >= 0")
    if p.gamma <= 0:
        raise DomainError("annealed rate needs gamma > 0")
    D, g = p.D, p.gamma

    def variance(u):
        bound = 0.0 if ell == 0 else 2.0 * ell * ell * -np.expm1(-D * u / (ell * ell))
        return 2.0 * deff * u + bound

    def deficit(u):
        # pinned kernel minus annealed kernel, times sqrt(u)
        if u == 0.0:
            x = (deff + (D if ell > 0 else 0.0)) / D
        else:
            x = variance(u) / (2.0 * D * u)
        return np.exp(-g * u) / np.sqrt(4.0 * np.pi * D) * -np.expm1(-0.5 * np.log1p(x))

    missing = 0.0 if (ell == 0 and deff == 0) else _split_quad(deficit, p)
    total = pinned_kernel_integral(p) - missing
    return float(0.5 * np.exp(-p.s) / total)
