"""Least-squares fits used by the scaling analyses."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

MIN_POINTS = 5


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    stderr: float
    prefactor: float
    r2: float
    n_points: int


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r2: float


def _r2(y, yhat):
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        return 1.0
    return 1.0 - float(np.sum((y - yhat) ** 2)) / ss_tot


def linear_fit(x, y) -> LinearFit:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or x.size != y.size:
        raise DomainError("need matching arrays with at least two points")
    slope, intercept = np.polyfit(x, y, 1)
    return LinearFit(float(slope), float(intercept), _r2(y, slope * x + intercept))


def fit_power_law(x, y, window=None, n_boot=200, seed=0, min_points=MIN_POINTS) -> PowerLawFit:
    """Fit y = A x^alpha by least squares in log-log.

    ``window`` = (x_lo, x_hi) restricts the points used. The standard error
    comes from a pairs bootstrap over the selected points.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise DomainError("x and y must have the same shape")
    if window is not None:
        keep = (x >= window[0]) & (x <= window[1])
        x, y = x[keep], y[keep]
    if x.size < min_points:
        raise DomainError(f"need at least {min_points} points, got {x.size}")
    if np.any(x <= 0) or np.any(y <= 0) or not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise DomainError("power-law fit needs finite positive data")
    lx, ly = np.log(x), np.log(y)
    alpha, c = np.polyfit(lx, ly, 1)
    rng = np.random.default_rng(seed)
    boots = []
    n = lx.size
    for _ in range(n_boot):
        idx = rng.integers(0, n, n)
        if np.ptp(lx[idx]) == 0:
            continue
        boots.append(np.polyfit(lx[idx], ly[idx], 1)[0])
    stderr = float(np.std(boots, ddof=1)) if len(boots) > 1 else float("nan")
    return PowerLawFit(float(alpha), stderr, float(np.exp(c)), _r2(ly, alpha * lx + c), int(n))
