"""Weak-noise stationary void: boundary-value solver and rate functions.

Dimensionless fields on the half line z >= 0 (lengths in units of
sqrt(D/gamma)). With optional comoving drift u the saddle equations are

    rho'' = (sigma0(rho) pi')' - 1/2 [(1 - rho) e^pi - rho e^-pi] - u rho'
    pi''  = sinh(pi) - 1/2 sigma0'(rho) pi'^2 + u pi'

with sigma0(rho) = 2 rho (1 - rho), rho(0) = 0, pi(0) = -s and the
equilibrium (1/2, 0) at the far end.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from .errors import DomainError, NumericalFailure
from .grids import GridSpec

DEFAULT_GRID = GridSpec(length=14.0, n_points=2800)
RESIDUAL_TOL = 1e-9


@dataclass
class SaddleSolution:
    z: np.ndarray
    rho_hat: np.ndarray
    pi_hat: np.ndarray
    residual_norm: float
    s: float
    u: float = 0.0
    iterations: int = 0
    residual_history: list = field(default_factory=list)

    @property
    def grid(self):
        return GridSpec(length=float(self.z[-1]), n_points=self.z.size)


# the comoving solution carries the same fields; u is stored on it
ComovingSolution = SaddleSolution


def _sigma(r):
    return 2.0 * r * (1.0 - r)


def _dsigma(r):
    return 2.0 - 4.0 * r


def _full_fields(y, s, n):
    rho = np.empty(n)
    pi = np.empty(n)
    rho[0], pi[0] = 0.0, -s
    rho[-1], pi[-1] = 0.5, 0.0
    rho[1:-1] = y[0::2]
    pi[1:-1] = y[1::2]
    return rho, pi


def saddle_residual(y, s, u, h, n):
    """Residuals of both saddle equations at the interior nodes, interleaved."""
    rho, pi = _full_fields(y, s, n)
    sig = _sigma(rho)
    sig_half = 0.5 * (sig[:-1] + sig[1:])
    dpi = np.diff(pi)
    flux = (sig_half[1:] * dpi[1:] - sig_half[:-1] * dpi[:-1]) / h**2
    r, p = rho[1:-1], pi[1:-1]
    rho_xx = (rho[2:] - 2 * r + rho[:-2]) / h**2
    pi_xx = (pi[2:] - 2 * p + pi[:-2]) / h**2
    rho_x = (rho[2:] - rho[:-2]) / (2 * h)
    pi_x = (pi[2:] - pi[:-2]) / (2 * h)
    bath = 0.5 * ((1 - r) * np.exp(p) - r * np.exp(-p))
    out = np.empty(2 * (n - 2))
    out[0::2] = rho_xx - flux + bath + u * rho_x
    out[1::2] = pi_xx - np.sinh(p) + 0.5 * _dsigma(r) * pi_x**2 - u * pi_x
    return out


def saddle_jacobian(y, s, u, h, n):
    """Analytic sparse Jacobian of :func:`saddle_residual`."""
    rho, pi = _full_fields(y, s, n)
    m = n - 2
    sig = _sigma(rho)
    dsig = _dsigma(rho)
    sig_half = 0.5 * (sig[:-1] + sig[1:])
    dpi = np.diff(pi)
    dm, dp = dpi[:-1], dpi[1:]  # pi_i - pi_{i-1}, pi_{i+1} - pi_i
    sm, spl = sig_half[:-1], sig_half[1:]
    r, p = rho[1:-1], pi[1:-1]
    pi_x = (pi[2:] - pi[:-2]) / (2 * h)
    h2 = h * h
    ch = np.cosh(p)
    dbath_dpi = 0.5 * ((1 - r) * np.exp(p) + r * np.exp(-p))

    rows, cols, vals = [], [], []
    idx = np.arange(m)

    def put(eq, var, offset, values):
        # eq, var: 0 for rho, 1 for pi; offset: neighbour shift in node index
        j = idx + offset
        ok = (j >= 0) & (j < m)
        rows.append(2 * idx[ok] + eq)
        cols.append(2 * j[ok] + var)
        vals.append(np.broadcast_to(values, (m,))[ok])

    # rho equation
    put(0, 0, -1, 1 / h2 + 0.5 * dsig[:-2] * dm / h2 - u / (2 * h))
    put(0, 0, 0, -2 / h2 - 0.5 * dsig[1:-1] * (dp - dm) / h2 - ch)
    put(0, 0, 1, 1 / h2 - 0.5 * dsig[2:] * dp / h2 + u / (2 * h))
    put(0, 1, -1, -sm / h2)
    put(0, 1, 0, (sm + spl) / h2 + dbath_dpi)
    put(0, 1, 1, -spl / h2)
    # pi equation
    put(1, 1, -1, 1 / h2 - dsig[1:-1] * pi_x / (2 * h) + u / (2 * h))
    put(1, 1, 0, -2 / h2 - ch)
    put(1, 1, 1, 1 / h2 + dsig[1:-1] * pi_x / (2 * h) - u / (2 * h))
    put(1, 0, 0, -2.0 * pi_x**2)

    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(2 * m, 2 * m),
    )


def _newton(y, s, u, grid: GridSpec, tol=RESIDUAL_TOL, max_iter=60):
    n, h = grid.n_points, grid.spacing
    res = saddle_residual(y, s, u, h, n)
    norm = np.max(np.abs(res))
    history = [norm]
    for it in range(1, max_iter + 1):
        if norm < tol:
            return y, norm, it - 1, history
        step = spsolve(saddle_jacobian(y, s, u, h, n).tocsc(), -res)
        if not np.all(np.isfinite(step)):
            break
        alpha = 1.0
        while alpha > 1e-4:
            trial = y + alpha * step
            tres = saddle_residual(trial, s, u, h, n)
            tnorm = np.max(np.abs(tres))
            if np.isfinite(tnorm) and tnorm < (1 - 1e-4 * alpha) * norm:
                break
            alpha *= 0.5
        else:
            break
        y, res, norm = trial, tres, tnorm
        history.append(norm)
    if norm < tol:
        return y, norm, max_iter, history
    raise NumericalFailure(f"Newton stalled at residual {norm:.3e} (s={s}, u={u})", history=history)


def _initial_guess(s, grid: GridSpec):
    z = grid.points()[1:-1]
    y = np.empty(2 * z.size)
    y[0::2] = 0.5 * (1 - np.exp(-z))
    y[1::2] = -s * np.exp(-z)
    return y


def _pack(sol: SaddleSolution):
    y = np.empty(2 * (sol.z.size - 2))
    y[0::2] = sol.rho_hat[1:-1]
    y[1::2] = sol.pi_hat[1:-1]
    return y


def _solution(y, s, u, grid, norm, iters, history):
    rho, pi = _full_fields(y, s, grid.n_points)
    return SaddleSolution(grid.points(), rho, pi, float(norm), float(s), float(u), iters, history)


def _check_grid(grid: GridSpec):
    if grid.length < 12:
        raise DomainError(f"z_max must be >= 12, got {grid.length}")


def solve_stationary_void(s, grid: GridSpec = DEFAULT_GRID, tol=RESIDUAL_TOL) -> SaddleSolution:
    if not s > 0:
        raise DomainError("s must be positive; s=0 has degenerate boundary data")
    _check_grid(grid)
    try:
        y, norm, iters, hist = _newton(_initial_guess(s, grid), s, 0.0, grid, tol)
        return _solution(y, s, 0.0, grid, norm, iters, hist)
    except NumericalFailure:
        pass
    # continuation in s from a small tilt
    path = np.arange(0.05, s, 0.05)
    y = _initial_guess(path[0] if path.size else s, grid)
    for s_k in list(path) + [s]:
        y, norm, iters, hist = _newton(y, s_k, 0.0, grid, tol)
    return _solution(y, s, 0.0, grid, norm, iters, hist)


def solve_comoving_void(s, u, grid: GridSpec = DEFAULT_GRID, start=None, du=0.1, tol=RESIDUAL_TOL):
    """Drifted saddle, reached by continuation in u from the static solution.

    ``start`` may be any converged solution at the same s and grid. On
    failure the exception carries the last converged u in ``last_good``.
    """
    if abs(u) > 2.0:
        raise DomainError("|u| <= 2 is the validated range")
    sol = start if start is not None else solve_stationary_void(s, grid, tol)
    if sol.s != s or sol.z.size != grid.n_points:
        raise DomainError("start solution does not match s and grid")
    u_now = sol.u
    n_steps = int(np.ceil(abs(u - u_now) / du - 1e-12))
    y = _pack(sol)
    for u_k in np.linspace(u_now, u, n_steps + 1)[1:]:
        try:
            y, norm, iters, hist = _newton(y, s, u_k, grid, tol)
        except NumericalFailure as exc:
            raise NumericalFailure(
                f"comoving continuation failed at u={u_k:.3g}; last converged u={u_now:.3g}",
                history=exc.history,
                last_good=u_now,
            ) from exc
        sol = _solution(y, s, u_k, grid, norm, iters, hist)
        u_now = u_k
    return sol


def _functional_density(sol: SaddleSolution):
    """Integrand at cell midpoints, with derivatives from cell differences."""
    h = sol.z[1] - sol.z[0]
    r = 0.5 * (sol.rho_hat[1:] + sol.rho_hat[:-1])
    p = 0.5 * (sol.pi_hat[1:] + sol.pi_hat[:-1])
    dr = np.diff(sol.rho_hat) / h
    dp = np.diff(sol.pi_hat) / h
    bath = 0.5 * (r * np.expm1(-p) + (1 - r) * np.expm1(p))
    return h, dp * dr - 0.5 * _sigma(r) * dp**2 - bath - sol.u * p * dr


def rate_phi(sol: SaddleSolution):
    h, f = _functional_density(sol)
    return float(np.sum(f) * h)


def rate_hat_lambda(sol: SaddleSolution):
    if sol.u != 0.0:
        raise DomainError("hat-Lambda is defined on the static (u=0) solution")
    return rate_phi(sol)


def phi_symmetric_excess(s, us, grid: GridSpec = DEFAULT_GRID, base=None):
    """Phi(u) + Phi(-u) - 2 Phi(0) for each u in ``us`` (positive values)."""
    base = base if base is not None else solve_stationary_void(s, grid)
    phi0 = rate_phi(base)
    out = []
    plus, minus = base, base
    for u in sorted(us):
        plus = solve_comoving_void(s, u, grid, start=plus)
        minus = solve_comoving_void(s, -u, grid, start=minus)
        out.append(rate_phi(plus) + rate_phi(minus) - 2 * phi0)
    order = np.argsort(np.argsort(us))
    return np.asarray(out)[order]


def curvature_a(s, grid: GridSpec = DEFAULT_GRID, us=(0.1, 0.2, 0.3), base=None):
    """a(s) from a fit of the symmetric excess to 2 a u^2 + c u^4."""
    us = np.asarray(us, dtype=float)
    excess = phi_symmetric_excess(s, us, grid, base)
    basis = np.column_stack([2 * us**2, us**4])
    coef, *_ = np.linalg.lstsq(basis, excess, rcond=None)
    return float(coef[0])


def deff_comoving(a, D, gamma, fluids=2):
    """Dressed diffusivity implied by the comoving curvature coefficient.

    ``fluids`` counts the independent conditioned fluids whose half-line
    actions add to the coherence cost. The two-replica coherence drags one
    void per replica, so the default is 2; ``fluids=1`` is the single-fluid
    expression 1/D_eff = 1/D + 8a/sqrt(D gamma).
    """
    if gamma <= 0:
        raise DomainError("gamma must be positive")
    root = np.sqrt(D * gamma)
    return root * D / (root + 8.0 * fluids * a * D)


def far_field_decay(sol: SaddleSolution, window=(6.0, 10.0)):
    """Fitted exponential decay rates of |rho - 1/2| and |pi| over ``window``."""
    mask = (sol.z >= window[0]) & (sol.z <= window[1])
    z = sol.z[mask]
    rates = []
    for f in (np.abs(sol.rho_hat[mask] - 0.5), np.abs(sol.pi_hat[mask])):
        rates.append(-np.polyfit(z, np.log(f), 1)[0])
    return tuple(rates)


def physical_profile(sol: SaddleSolution, x, D, gamma):
    """Density at physical distance x from the coherence, rho_hat(x sqrt(gamma/D))."""
    z = np.abs(np.asarray(x, dtype=float)) * np.sqrt(gamma / D)
    return np.interp(z, sol.z, sol.rho_hat, right=0.5)
