"""Counter-based random numbers.

Every draw is a pure function of (seed, a, b, c), so Monte Carlo output does
not depend on how clones are scheduled across threads. The mixer is the
splitmix64 finaliser applied to a keyed combination of the counters.
"""

import os

import numba as nb
import numpy as np

if "NUMBA_THREADING_LAYER" not in os.environ:
    # skip the TBB probe, which warns on older TBB installs
    nb.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_K1 = np.uint64(0xBF58476D1CE4E5B9)
_K2 = np.uint64(0x94D049BB133111EB)
_KA = np.uint64(0xD6E8FEB86659FD93)
_KB = np.uint64(0xA0761D6478BD642F)
_KC = np.uint64(0xE7037ED1A0B428DB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0


@nb.njit(inline="always", cache=True)
def _mix(z):
    z = (z ^ (z >> _S30)) * _K1
    z = (z ^ (z >> _S27)) * _K2
    return z ^ (z >> _S31)


@nb.njit(inline="always", cache=True)
def counter_bits(seed, a, b, c):
    z = _mix(np.uint64(seed) * _KA + _GOLDEN)
    z = _mix(z ^ (np.uint64(a) * _KB))
    z = _mix(z ^ (np.uint64(b) * _KC))
    return _mix(z ^ (np.uint64(c) * _K1) + _GOLDEN)


@nb.njit(inline="always", cache=True)
def counter_uniform(seed, a, b, c):
    """Uniform double in [0, 1) keyed by four non-negative integers."""
    return float(counter_bits(seed, a, b, c) >> _S11) * _INV53


@nb.njit(cache=True)
def uniform_array(seed, a, b, n):
    out = np.empty(n)
    for i in range(n):
        out[i] = counter_uniform(seed, a, b, i)
    return out


def uniform(seed, a, b, c=0):
    return counter_uniform(np.uint64(seed), np.uint64(a), np.uint64(b), np.uint64(c))


def spawn_seed(seed, tag):
    """Derive an independent master seed for a labelled sub-experiment."""
    return int(counter_bits(np.uint64(seed), np.uint64(tag), np.uint64(0x5EED), np.uint64(0)) >> np.uint64(1))
