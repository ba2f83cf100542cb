"""Population dynamics for substochastic processes.

A process advances a batch of clones by one barrier interval and returns
per-clone log survival weights. The engine turns mean weights into decay
rates, resamples systematically, and hands weighted states to observers.

Process protocol::

    dt: float
    initial(n_clones, seed) -> state
    advance(state, step, seed) -> log_weights   (mutates state, -inf kills)
    select(state, indices) -> state
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ExtinctionError
from .streams import uniform, uniform_array

MIN_BOOTSTRAP = 50
_RESAMPLE_STREAM = 0x7E5A


@dataclass
class QssEstimate:
    lambda_t: np.ndarray
    lambda_qss: float
    stderr: float
    window: tuple
    dt: float
    n_alive: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def times(self):
        return self.dt * np.arange(1, self.lambda_t.size + 1)

    @property
    def log_survival(self):
        """log Z(t) accumulated from the instantaneous rates."""
        return -np.cumsum(self.lambda_t) * self.dt


@dataclass
class PopulationResult:
    estimate: QssEstimate
    state: object
    observations: dict


def resample_systematic(weights, offset):
    """Systematic resampling with a single uniform offset in [0, 1).

    Returns N parent indices; parent i appears floor or ceil of
    N w_i / sum(w) times.
    """
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise DomainError("weights must be finite and non-negative")
    total = w.sum()
    if total <= 0:
        raise ExtinctionError("all weights vanish", time=float("nan"))
    n = w.size
    cum = np.cumsum(w) * (n / total)
    marks = offset + np.arange(n)
    idx = np.searchsorted(cum, marks, side="right")
    return np.minimum(idx, n - 1)


def block_bootstrap_mean(series, seed, n_boot=200, block=None):
    """Mean and moving-block bootstrap standard error of a correlated series."""
    x = np.asarray(series, dtype=float)
    if n_boot < MIN_BOOTSTRAP:
        raise DomainError(f"need at least {MIN_BOOTSTRAP} bootstrap resamples")
    n = x.size
    if n < 2:
        return float(x.mean()), float("nan")
    block = block or max(1, int(round(n ** (1 / 3))) * 2)
    block = min(block, n)
    n_blocks = int(np.ceil(n / block))
    rng = np.random.default_rng(seed)
    starts = rng.integers(0, n - block + 1, size=(n_boot, n_blocks))
    offs = np.arange(block)
    means = x[(starts[:, :, None] + offs).reshape(n_boot, -1)[:, :n]].mean(axis=1)
    return float(x.mean()), float(means.std(ddof=1))


def run_population(
    process,
    n_clones,
    duration,
    seed,
    burn_in=None,
    window=None,
    observer=None,
    n_boot=200,
):
    """Evolve ``n_clones`` clones for ``duration`` and estimate the decay rate.

    ``burn_in`` defaults to 5/gamma when the process exposes ``gamma > 0``.
    ``window`` is the (t_start, t_end) plateau window; it defaults to
    (burn_in, duration). ``observer(state, weights, t)`` is called after each
    barrier past the burn-in with normalised pre-resampling weights.
    """
    if n_clones < 1:
        raise DomainError("need at least one clone")
    dt = float(process.dt)
    n_steps = int(round(duration / dt))
    if n_steps < 1:
        raise DomainError("duration shorter than one barrier interval")
    if burn_in is None:
        g = getattr(process, "gamma", 0.0)
        burn_in = min(5.0 / g, 0.5 * duration) if g > 0 else 0.0
    if window is None:
        window = (burn_in, duration)
    if not (0 <= window[0] < window[1] <= duration + 1e-9):
        raise DomainError(f"bad plateau window {window}")

    state = process.initial(n_clones, seed)
    lam = np.empty(n_steps)
    alive = np.empty(n_steps, dtype=np.int64)
    for k in range(n_steps):
        logw = process.advance(state, k, seed)
        w = np.exp(logw)
        mean_w = w.mean()
        t = (k + 1) * dt
        if not mean_w > 0:
            raise ExtinctionError(f"population extinct at t={t:.6g}", time=t)
        lam[k] = -np.log(mean_w) / dt
        alive[k] = np.count_nonzero(w)
        if observer is not None and t > burn_in - 1e-9:
            observer(state, w / w.sum(), t)
        if np.all(w == w[0]):
            continue
        idx = resample_systematic(w, uniform(seed, _RESAMPLE_STREAM, k))
        state = process.select(state, idx)

    t_grid = dt * np.arange(1, n_steps + 1)
    mask = (t_grid > window[0] + 1e-9) & (t_grid <= window[1] + 1e-9)
    if not np.any(mask):
        raise DomainError("plateau window contains no barriers")
    qss, err = block_bootstrap_mean(lam[mask], seed, n_boot)
    est = QssEstimate(lam, qss, err, tuple(window), dt, alive)
    obs = getattr(observer, "results", lambda: {})() if observer is not None else {}
    return PopulationResult(est, state, obs)


class TwoStateProcess:
    """Discrete-time two-state Markov chain with state-dependent survival.

    Used as an exactly solvable benchmark: the decay rate is minus the log
    of the principal eigenvalue of P diag(survival), per unit dt.
    """

    def __init__(self, flip, survival, dt=1.0):
        self.flip = np.asarray(flip, dtype=float)  # probability of leaving state i
        self.survival = np.asarray(survival, dtype=float)
        self.dt = dt

    def exact_rate(self):
        p = np.array([[1 - self.flip[0], self.flip[0]], [self.flip[1], 1 - self.flip[1]]])
        tilted = np.diag(self.survival) @ p
        return -np.log(np.max(np.abs(np.linalg.eigvals(tilted)))) / self.dt

    def initial(self, n, seed):
        return {"x": (np.arange(n) % 2).astype(np.int64), "n": n}

    def advance(self, state, step, seed):
        x = state["x"]
        with np.errstate(divide="ignore"):
            logw = np.log(self.survival[x])
        u = uniform_array(seed, step, 1, x.size)
        x[:] = np.where(u < self.flip[x], 1 - x, x)
        return logw

    def select(self, state, idx):
        return {"x": state["x"][idx].copy(), "n": state["n"]}


class ConstantKillProcess:
    """Every clone survives each step with probability exp(-rate dt), as a weight."""

    def __init__(self, rate, dt=1.0):
        self.rate = rate
        self.dt = dt

    def initial(self, n, seed):
        return {"n": n}

    def advance(self, state, step, seed):
        return np.full(state["n"], -self.rate * self.dt)

    def select(self, state, idx):
        return state
