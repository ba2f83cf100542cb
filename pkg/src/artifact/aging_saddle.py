"""Noiseless aging void: similarity solution and cumulant generating function.

Without a bath the optimal void keeps growing as sqrt(D t). Its
similarity profile follows from the integral equation

    Omega(u) + int_0^inf Omega(z) Omega(u + z) dz = (e^{-2s} - 1) e^{-u^2/4} / sqrt(4 pi)

with u = x / sqrt(D t), and Phi(u) = 1/2 int_0^u Omega / int_0^inf Omega.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import DomainError, NumericalFailure
from .grids import GridSpec

DEFAULT_GRID = GridSpec(length=12.0, n_points=2400)
RESIDUAL_TOL = 1e-10


@dataclass
class OmegaSolution:
    u: np.ndarray
    omega: np.ndarray
    s: float
    residual_norm: float
    residual_history: list = field(default_factory=list)


@dataclass
class SimilarityProfile:
    u: np.ndarray
    phi: np.ndarray


def _trapezoid_weights(n, h):
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


def _tail_overlap(omega, h):
    """c[i] = trapezoid of Omega(z) Omega(u_i + z) over z in [0, u_max - u_i]."""
    n = omega.size
    full = np.correlate(omega, omega, mode="full")[n - 1 :]  # sum_j omega_j omega_{i+j}
    # halve the two endpoint terms, z = 0 and z = u_max - u_i
    c = full - 0.5 * omega[0] * omega - 0.5 * omega[-1] * omega[::-1]
    c[-1] = 0.0  # empty interval
    return h * c


def _source(u, s):
    return np.expm1(-2.0 * s) * np.exp(-0.25 * u * u) / np.sqrt(4.0 * np.pi)


def omega_residual(omega, u, s):
    h = u[1] - u[0]
    return omega + _tail_overlap(omega, h) - _source(u, s)


def _newton_matrix(omega, h):
    # d/d omega_k of sum_j w_j omega_j omega_{i+j}
    n = omega.size
    J = np.eye(n)
    for i in range(n):
        m = n - i  # number of z nodes
        w = _trapezoid_weights(m, h) if m > 1 else np.zeros(1)
        J[i, :m] += w * omega[i:]
        J[i, i:] += w * omega[:m]
    return J


def solve_omega(s, grid: GridSpec = DEFAULT_GRID, tol=RESIDUAL_TOL, damping=0.5, max_iter=2000) -> OmegaSolution:
    if s < 0:
        raise DomainError("s must be >= 0")
    if grid.length < 10:
        raise DomainError("u_max must be >= 10")
    u = grid.points()
    h = grid.spacing
    src = _source(u, s)
    omega = src.copy()
    history = []
    for _ in range(max_iter):
        res = omega + _tail_overlap(omega, h) - src
        norm = float(np.max(np.abs(res)))
        history.append(norm)
        if norm < tol:
            return OmegaSolution(u, omega, float(s), norm, history)
        if not np.isfinite(norm) or (len(history) > 50 and norm > history[-50]):
            break
        omega = omega - damping * res
    # Newton fallback from the best fixed-point iterate
    for _ in range(30):
        res = omega + _tail_overlap(omega, h) - src
        norm = float(np.max(np.abs(res)))
        history.append(norm)
        if norm < tol:
            return OmegaSolution(u, omega, float(s), norm, history)
        omega = omega - np.linalg.solve(_newton_matrix(omega, h), res)
    raise NumericalFailure(f"Omega iteration did not converge (residual {history[-1]:.3e})", history=history)


def phi_profile(sol: OmegaSolution) -> SimilarityProfile:
    h = sol.u[1] - sol.u[0]
    cum = np.concatenate(([0.0], np.cumsum(0.5 * h * (sol.omega[1:] + sol.omega[:-1]))))
    total = cum[-1]
    if total == 0.0 or not np.isfinite(total):
        raise DomainError("Omega integrates to zero; s=0 has no void")
    return SimilarityProfile(sol.u.copy(), 0.5 * cum / total)


def profile_at(profile: SimilarityProfile, scaled_x):
    """Phi at |x|/sqrt(D t), saturating at 1/2 beyond the grid."""
    return np.interp(np.abs(scaled_x), profile.u, profile.phi, right=0.5)


def polylog_series(order, z, tol=1e-12, max_terms=10_000_000):
    """Li_order(z) for 0 <= z <= 1 by direct summation of z^k / k^order.

    The remainder after K terms is bounded by z^(K+1) / ((K+1)^order (1 - z)),
    and summation stops once that bound drops below ``tol``. At z = 1 the
    series is the Riemann zeta value.
    """
    if not 0.0 <= z <= 1.0:
        raise DomainError("series evaluation needs 0 <= z <= 1")
    if z == 0.0:
        return 0.0
    if z == 1.0:
        if order <= 1:
            raise DomainError("Li_order(1) diverges for order <= 1")
        return float(special.zeta(order, 1))
    total = 0.0
    k0 = 1
    chunk = 4096
    log_z = np.log(z)
    while k0 <= max_terms:
        k = np.arange(k0, k0 + chunk, dtype=float)
        total += float(np.sum(np.exp(k * log_z - order * np.log(k))))
        K = k0 + chunk - 1
        bound = np.exp((K + 1) * log_z - order * np.log(K + 1)) / (1.0 - z)
        if bound < tol:
            return total
        k0 += chunk
        chunk *= 2
    raise NumericalFailure(f"polylog series for z={z} did not reach tolerance")


def cgf_hat_lambda0(s):
    if s < 0:
        raise DomainError("s must be >= 0")
    z = 1.0 if np.isinf(s) else -np.expm1(-2.0 * s)
    if 0.99 < z < 1.0:
        warnings.warn(
            f"polylog argument {z:.6f} > 0.99: slow series convergence near z=1",
            RuntimeWarning,
            stacklevel=2,
        )
    return polylog_series(1.5, z) / (2.0 * np.sqrt(np.pi))
