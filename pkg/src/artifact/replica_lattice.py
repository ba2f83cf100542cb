"""Two-replica U(1) circuit model.

Per site and replica the doubled operator lives in the span of
P_up, P_down, sigma+ and sigma-. The circuit-averaged dynamics closes on six
joint symbols, indexed as

    0 dd   1 du   2 ud   3 uu   4 p = 2 s+ [x] s-   5 m = 2 s- [x] s+

(first letter replica 1, second replica 2). Two evolutions are provided:

* a dense transfer-matrix evolver over the full 6^L tensor for L <= 8,
  built from the exact Haar average of a U(1)-conserving two-site gate;
* a dilute Monte Carlo for one tagged coherence in a diagonal environment,
  vectorised over clones with numba and driven by counter-based streams.

In the Monte Carlo a replica's site holds u, d or the depolarised identity
symbol ``IDN`` (an even mixture of u and d that is only resolved when the
coherence needs it). One brickwork period is one unit of time: depolarise,
even bonds, depolarise, odd bonds.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numba as nb
import numpy as np

from .errors import CapacityError, DomainError
from .streams import counter_uniform

SYMBOLS = ("dd", "du", "ud", "uu", "p", "m")
CHARGE = np.array([0, 0, 0, 0, 1, -1])
DIAGONAL = (0, 1, 2, 3)
MAX_DENSE_L = 8

# Monte Carlo site codes per replica
D_, U_, IDN, COH = 0, 1, 2, 3

_P_UP = np.array([[1, 0], [0, 0]], dtype=complex)
_P_DN = np.array([[0, 0], [0, 1]], dtype=complex)
_S_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
_S_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)
_PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
_ID2 = np.eye(2, dtype=complex)


def symbol_operators():
    """(coefficient, replica-1 operator, replica-2 operator) for each symbol."""
    return (
        (1.0, _P_DN, _P_DN),
        (1.0, _P_DN, _P_UP),
        (1.0, _P_UP, _P_DN),
        (1.0, _P_UP, _P_UP),
        (2.0, _S_PLUS, _S_MINUS),
        (2.0, _S_MINUS, _S_PLUS),
    )


def _hs(a, b):
    return np.trace(a.conj().T @ b) / 2.0


def covector(op1, op2):
    """Values of <op1 [x] op2 | symbol> on the six symbols (normalised HS product)."""
    return np.array([c * _hs(op1, a) * _hs(op2, b) for c, a, b in symbol_operators()]).real


COV_ONE = covector(_ID2, _ID2)
COV_ZZ = covector(_PAULI[2], _PAULI[2])
COV_COH = covector(_S_PLUS, _S_MINUS)
COV_DOWN_ONE = covector(_P_DN, _ID2)
COV_DOWN_UP = covector(_P_DN, _P_UP)
COV_W1 = sum(covector(s, s) for s in _PAULI)


# ---------------------------------------------------------------------------
# exact local maps


def _charge_block_unitaries():
    """Exact quadrature nodes for Haar averages of fourth-order gate moments.

    A U(1)-conserving two-qubit gate is a phase on |uu>, a U(2) block on
    {|ud>, |du>} and a phase on |dd>; the global phase drops out of the
    doubled channel. Phases use 5-point uniform grids (exact for Fourier
    modes |n| <= 4) and the block's cos^2 of its angle uses 3-point
    Gauss-Legendre (exact to degree 5).
    """
    k = 5
    phases = 2 * np.pi * np.arange(k) / k
    x, w = np.polynomial.legendre.leggauss(3)
    t_nodes, t_wts = 0.5 * (x + 1), 0.5 * w
    us, wts = [], []
    for alpha in phases:
        for phi in phases:
            for psi in phases:
                for chi in phases:
                    for t, wt in zip(t_nodes, t_wts):
                        c, s = np.sqrt(t), np.sqrt(1 - t)
                        u = np.zeros((4, 4), dtype=complex)
                        u[0, 0] = 1.0
                        u[1:3, 1:3] = np.exp(1j * alpha) * np.array(
                            [[c * np.exp(1j * psi), s * np.exp(1j * chi)], [-s * np.exp(-1j * chi), c * np.exp(-1j * psi)]]
                        )
                        u[3, 3] = np.exp(1j * phi)
                        us.append(u)
                        wts.append(wt / k**4)
    return np.array(us), np.array(wts)


def _symbol_embedding():
    """256 x 36 matrix taking symbol-pair coefficients to doubled matrix units."""
    ops = symbol_operators()
    emb = np.zeros((256, 36), dtype=complex)
    for a, (ca, a1, a2) in enumerate(ops):
        for b, (cb, b1, b2) in enumerate(ops):
            r1 = np.kron(a1, b1)
            r2 = np.kron(a2, b2)
            emb[:, 6 * a + b] = ca * cb * np.kron(r1.reshape(-1), r2.reshape(-1))
    return emb


@functools.lru_cache(maxsize=None)
def haar_bond_map():
    """Exact circuit-averaged two-site map on symbol pairs (36 x 36).

    Column 6a+b holds the image of the pair (a, b), left site first. The
    map is computed from the Haar moments, projected on the symbol basis,
    and closure of the six-symbol space is asserted.
    """
    us, wts = _charge_block_unitaries()
    # superoperator O -> U^dag O U on row-major vec(O): R[(k,l),(i,j)] = conj(U_ik) U_jl
    sup = np.einsum("sik,sjl->sklij", us.conj(), us).reshape(len(us), 16, 16)
    doubled = np.einsum("s,sab,scd->acbd", wts, sup, sup).reshape(256, 256)
    emb = _symbol_embedding()
    image = doubled @ emb
    coef, *_ = np.linalg.lstsq(emb, image, rcond=None)
    if np.max(np.abs(emb @ coef - image)) > 1e-12 or np.max(np.abs(coef.imag)) > 1e-12:
        raise AssertionError("six-symbol space not closed under the averaged gate")
    out = coef.real
    out[np.abs(out) < 1e-13] = 0.0
    out.setflags(write=False)
    return out


def bond_map(dilute=False, q=1.0):
    """Two-site map with optional pair-creation channels removed and gate rate q."""
    t = haar_bond_map().copy()
    if dilute:
        for a in DIAGONAL:
            for b in DIAGONAL:
                t[6 * 4 + 5, 6 * a + b] = 0.0
                t[6 * 5 + 4, 6 * a + b] = 0.0
    if q != 1.0:
        t = q * t + (1.0 - q) * np.eye(36)
    return t


def depolarization_map(gamma):
    """Single-site map of both replicas' depolarising channels on the symbols."""
    if not 0.0 <= gamma <= 1.0:
        raise DomainError("gamma must lie in [0, 1]")
    keep, flip = 1.0 - 0.5 * gamma, 0.5 * gamma
    one = np.array([[keep, flip], [flip, keep]])  # on (d, u), column = input
    m = np.zeros((6, 6))
    m[:4, :4] = np.kron(one, one)
    m[4, 4] = m[5, 5] = (1.0 - gamma) ** 2
    return m


# ---------------------------------------------------------------------------
# dense evolution


@dataclass(frozen=True)
class BondParams:
    q: float = 1.0
    slow_bond_index: int | None = None

    def __post_init__(self):
        if not 0.0 < self.q <= 1.0:
            raise DomainError("q must lie in (0, 1]")

    def rates(self, L, periodic=False):
        """Gate rate per bond; a ring has L bonds and needs even L."""
        if periodic and L % 2:
            raise DomainError("a brickwork ring needs an even number of sites")
        n = L if periodic else L - 1
        r = np.ones(n)
        if self.slow_bond_index is not None:
            if not 0 <= self.slow_bond_index < n:
                raise DomainError("slow bond index outside the chain")
            r[self.slow_bond_index] = self.q
        return r


@dataclass
class DenseState:
    """Coefficients over the 6^L symbol basis; ``coh_site`` marks the initial coherence."""

    tensor: np.ndarray
    coh_site: int | None = None

    @property
    def L(self):
        return self.tensor.ndim

    @staticmethod
    def _check(L):
        if L > MAX_DENSE_L:
            raise CapacityError(f"dense evolution limited to L <= {MAX_DENSE_L}, got {L}")
        if L < 2:
            raise DomainError("need at least two sites")

    @classmethod
    def product(cls, site_vectors, coh_site=None):
        cls._check(len(site_vectors))
        t = np.asarray(site_vectors[0], dtype=float)
        for v in site_vectors[1:]:
            t = np.multiply.outer(t, np.asarray(v, dtype=float))
        return cls(t, coh_site)

    @classmethod
    def coherence(cls, L, site):
        """sigma+ [x] sigma- at ``site`` in the infinite-temperature environment."""
        ident = np.array([1.0, 1, 1, 1, 0, 0])
        coh = np.zeros(6)
        coh[4] = 0.5  # p = 2 s+ [x] s-
        return cls.product([coh if x == site else ident for x in range(L)], coh_site=site)

    @classmethod
    def single_z(cls, L, site):
        ident = np.array([1.0, 1, 1, 1, 0, 0])
        zz = np.array([1.0, -1, -1, 1, 0, 0])
        return cls.product([zz if x == site else ident for x in range(L)])

    @classmethod
    def identity(cls, L):
        return cls.product([np.array([1.0, 1, 1, 1, 0, 0])] * L)

    def charge_weights(self):
        """Sum of |coefficients| per total operator charge Q."""
        q = CHARGE
        total = np.zeros(())
        for _ in range(self.L):
            total = np.add.outer(total, q)
        out = {}
        for val in np.unique(total):
            out[int(val)] = float(np.sum(np.abs(self.tensor[total == val])))
        return out


def _apply_site(t, mat, x):
    return np.moveaxis(np.tensordot(mat, t, axes=([1], [x])), 0, x)


def _apply_bond(t, mat36, x):
    m = mat36.reshape(6, 6, 6, 6)
    out = np.tensordot(m, t, axes=([2, 3], [x, x + 1]))
    return np.moveaxis(out, (0, 1), (x, x + 1))


def step_dense(state: DenseState, gamma, bonds: BondParams = BondParams(), dilute=False) -> DenseState:
    """One brickwork period: depolarise, even bonds, depolarise, odd bonds."""
    L = state.L
    DenseState._check(L)
    rates = bonds.rates(L)
    dep = depolarization_map(gamma)
    maps = {}
    t = state.tensor
    for parity in (0, 1):
        if gamma > 0:
            for x in range(L):
                t = _apply_site(t, dep, x)
        for b in range(parity, L - 1, 2):
            q = rates[b]
            if q not in maps:
                maps[q] = bond_map(dilute, q)
            t = _apply_bond(t, maps[q], b)
    return DenseState(t, state.coh_site)


def _contract(t, covectors):
    out = t
    for v in covectors:
        out = np.tensordot(v, out, axes=([0], [0]))
    return float(out)


def _background(L, coh_site, x, at_x, elsewhere):
    vecs = []
    for y in range(L):
        if y == coh_site:
            vecs.append(COV_COH)
        elif y == x:
            vecs.append(at_x)
        else:
            vecs.append(elsewhere)
    return vecs


def coherence_weight(state: DenseState):
    """Overlap of the state with the coherence at its original site in the identity background."""
    return _contract(state.tensor, _background(state.L, state.coh_site, None, None, COV_ONE))


def dilute_survival(state: DenseState):
    """Norm of the single-coherence sector relative to its initial value.

    Each diagonal symbol counts 1 and the p symbol counts 1 wherever it sits;
    the initial state sigma+ [x] sigma- = p / 2 in the uniform diagonal
    environment has total 4^(L-1) / 2.
    """
    L = state.L
    t = state.tensor
    diag = np.array([1.0, 1, 1, 1, 0, 0])
    total = 0.0
    for x in range(L):
        vecs = [diag] * L
        vecs[x] = np.array([0, 0, 0, 0, 1.0, 0])
        total += _contract(t, vecs)
    return total * 2.0 / 4.0 ** (L - 1)


def measure_C(state: DenseState, x):
    """Conditioned second moment <(Z [x] Z)_x> of the local charge deviation."""
    if state.coh_site is None or x == state.coh_site:
        raise DomainError("measure away from a tracked coherence")
    den = _contract(state.tensor, _background(state.L, state.coh_site, None, None, COV_ONE))
    if abs(den) < 1e-300:
        raise DomainError("coherence sector has vanished")
    num = _contract(state.tensor, _background(state.L, state.coh_site, x, COV_ZZ, COV_ONE))
    return num / den


def rho_from_C(C):
    return 0.5 * (1.0 - np.sqrt(np.clip(C, 0.0, 1.0)))


def measure_branch_profile(state: DenseState, x):
    """Replica-2 density with replica 1 projected on P_down away from the coherence."""
    if state.coh_site is None or x == state.coh_site:
        raise DomainError("measure away from a tracked coherence")
    den = _contract(state.tensor, _background(state.L, state.coh_site, None, None, COV_DOWN_ONE))
    if abs(den) < 1e-300:
        raise DomainError("projected coherence sector has vanished")
    num = _contract(state.tensor, _background(state.L, state.coh_site, x, COV_DOWN_UP, COV_DOWN_ONE))
    return num / den


def measure_mbw(state: DenseState):
    """phi(w) for w = 0..L: weight carried by Pauli strings with w non-identity factors."""
    poly = state.tensor[np.newaxis]
    for _ in range(state.L):
        zero = np.tensordot(COV_ONE, poly, axes=([0], [1]))
        one = np.tensordot(COV_W1, poly, axes=([0], [1]))
        nxt = np.zeros((poly.shape[0] + 1,) + zero.shape[1:])
        nxt[:-1] += zero
        nxt[1:] += one
        poly = nxt
    return poly.reshape(-1)


# ---------------------------------------------------------------------------
# dilute Monte Carlo


@nb.njit(inline="always")
def _kill_or_weight(lw, factor, u, weighted):
    if weighted:
        return lw + np.log(factor)
    if u < factor:
        return lw
    return -np.inf


@nb.njit(cache=True)
def _clone_sweep(env, c, pos, seed, slot, sweep, gamma, qbond, weighted):
    """One brickwork period for one clone.

    ``qbond`` has L - 1 entries on an open chain and L on a ring, where bond
    L - 1 joins the last site to the first. Returns (position, log-weight,
    winding change).
    """
    L = env.shape[2]
    nbonds = qbond.size
    wind = 0
    lw = 0.0
    keep = (1.0 - gamma) ** 2
    for layer in range(4):
        ctr = sweep * 4 + layer
        if layer % 2 == 0:
            if gamma == 0.0:
                continue
            for x in range(L):
                if x == pos:
                    u = counter_uniform(seed, slot, ctr, 4 * x)
                    lw = _kill_or_weight(lw, keep, u, weighted)
                    if lw == -np.inf:
                        return pos, lw, wind
                    continue
                for a in range(2):
                    if env[c, a, x] < IDN:
                        if counter_uniform(seed, slot, ctr, 4 * x + 1 + a) < gamma:
                            env[c, a, x] = IDN
            continue
        parity = layer // 2
        for b in range(parity, nbonds, 2):
            y = b + 1 if b + 1 < L else 0
            q = qbond[b]
            if q < 1.0 and counter_uniform(seed, slot, ctr, 8 * b) >= q:
                continue
            if pos == b or pos == y:
                nb_ = y if pos == b else b
                n1 = env[c, 0, nb_]
                n2 = env[c, 1, nb_]
                if n1 < IDN and n2 < IDN:
                    if n1 != n2:
                        return pos, -np.inf, wind
                elif n1 == IDN and n2 == IDN:
                    lw = _kill_or_weight(lw, 0.5, counter_uniform(seed, slot, ctr, 8 * b + 1), weighted)
                    if lw == -np.inf:
                        return pos, lw, wind
                    v = U_ if counter_uniform(seed, slot, ctr, 8 * b + 2) < 0.5 else D_
                    env[c, 0, nb_] = v
                    env[c, 1, nb_] = v
                else:
                    lw = _kill_or_weight(lw, 0.5, counter_uniform(seed, slot, ctr, 8 * b + 1), weighted)
                    if lw == -np.inf:
                        return pos, lw, wind
                    v = n1 if n1 < IDN else n2
                    env[c, 0, nb_] = v
                    env[c, 1, nb_] = v
                if counter_uniform(seed, slot, ctr, 8 * b + 3) < 0.5:
                    env[c, 0, pos] = env[c, 0, nb_]
                    env[c, 1, pos] = env[c, 1, nb_]
                    env[c, 0, nb_] = COH
                    env[c, 1, nb_] = COH
                    if b == L - 1:  # ring closure bond
                        wind += 1 if pos == L - 1 else -1
                    pos = nb_
                continue
            ne1 = env[c, 0, b] != env[c, 0, y]
            ne2 = env[c, 1, b] != env[c, 1, y]
            if not (ne1 or ne2):
                continue
            u = counter_uniform(seed, slot, ctr, 8 * b + 4)
            s1 = False
            s2 = False
            if ne1 and ne2:
                if u < 1.0 / 3.0:
                    pass
                elif u < 2.0 / 3.0:
                    s1 = True
                    s2 = True
                elif u < 5.0 / 6.0:
                    s1 = True
                else:
                    s2 = True
            elif u < 0.5:
                s1 = ne1
                s2 = ne2
            if s1:
                tmp = env[c, 0, b]
                env[c, 0, b] = env[c, 0, y]
                env[c, 0, y] = tmp
            if s2:
                tmp = env[c, 1, b]
                env[c, 1, b] = env[c, 1, y]
                env[c, 1, y] = tmp
    return pos, lw, wind


@nb.njit(parallel=True, cache=True)
def _sweep_all(env, pos, winding, logw, seed, sweep, gamma, qbond, weighted):
    n = env.shape[0]
    for c in nb.prange(n):
        p, lw, dw = _clone_sweep(env, c, pos[c], seed, c, sweep, gamma, qbond, weighted)
        pos[c] = p
        winding[c] += dw
        logw[c] = lw


@nb.njit(cache=True)
def _fill_environment(env, pos, seed, mode, background):
    """mode 0: uniform over uu/ud/du/dd; 1: IDN everywhere; 2: fixed ``background`` code."""
    n, _, L = env.shape
    for c in range(n):
        for x in range(L):
            if x == pos[c]:
                env[c, 0, x] = COH
                env[c, 1, x] = COH
                continue
            for a in range(2):
                if mode == 0:
                    env[c, a, x] = U_ if counter_uniform(seed, c, 0xE17, 2 * x + a) < 0.5 else D_
                elif mode == 1:
                    env[c, a, x] = IDN
                else:
                    env[c, a, x] = background


_INIT_MODES = {"sampled": 0, "identity": 1, "down": 2, "up": 2}


class DiluteProcess:
    """Batched dilute-coherence process for :func:`cloning.run_population`.

    ``survival="weight"`` replaces the coherence's random survival coins with
    their expected weights (same law, lower variance); ``"kill"`` flips them.
    ``start`` is an initial site or a sequence of sites drawn uniformly.
    ``periodic=True`` closes the chain into a ring (even L), which removes
    the edges; an open edge is cheaper for the coherence than the bulk and
    eventually captures it.
    """

    def __init__(
        self,
        L,
        gamma,
        bonds: BondParams = BondParams(),
        init="sampled",
        survival="weight",
        start=None,
        periodic=False,
    ):
        if L < 2:
            raise DomainError("need at least two sites")
        if not 0.0 <= gamma <= 1.0:
            raise DomainError("gamma must lie in [0, 1]")
        if init not in _INIT_MODES:
            raise DomainError(f"unknown environment init {init!r}")
        if survival not in ("weight", "kill"):
            raise DomainError("survival must be 'weight' or 'kill'")
        self.L = L
        self.gamma = float(gamma)
        self.bonds = bonds
        self.periodic = bool(periodic)
        self.qbond = bonds.rates(L, self.periodic)
        self.init = init
        self.weighted = survival == "weight"
        starts = np.atleast_1d(L // 2 if start is None else start).astype(np.int64)
        if np.any((starts < 0) | (starts >= L)):
            raise DomainError("start site outside the chain")
        self.starts = starts
        self.dt = 1.0

    def initial(self, n, seed):
        if self.starts.size == 1:
            pos = np.full(n, self.starts[0], dtype=np.int64)
        else:
            pick = (np.arange(n) * self.starts.size) // n
            pos = self.starts[pick].astype(np.int64)
        env = np.empty((n, 2, self.L), dtype=np.int8)
        bg = U_ if self.init == "up" else D_
        _fill_environment(env, pos, np.uint64(seed), _INIT_MODES[self.init], bg)
        return {
            "env": env,
            "pos": pos,
            "winding": np.zeros(n, dtype=np.int64),
            "start": pos.copy(),
            "sweeps": 0,
            "periodic": self.periodic,
        }

    def advance(self, state, step, seed):
        logw = np.empty(state["pos"].size)
        _sweep_all(
            state["env"],
            state["pos"],
            state["winding"],
            logw,
            np.uint64(seed),
            step,
            self.gamma,
            self.qbond,
            self.weighted,
        )
        state["sweeps"] = step + 1
        return logw

    def select(self, state, idx):
        out = {k: (v[idx] if isinstance(v, np.ndarray) else v) for k, v in state.items()}
        return out


@dataclass
class ReplicaConfig:
    """A single clone: per-replica site codes, coherence position, log-weight."""

    symbols: np.ndarray  # shape (2, L), codes D_, U_, IDN, COH
    coh_pos: int
    log_weight: float = 0.0
    alive: bool = True

    @property
    def L(self):
        return self.symbols.shape[1]


def step_dilute_mc(
    cfg: ReplicaConfig, gamma, bonds: BondParams, rng_stream, weighted=False, periodic=False
) -> ReplicaConfig:
    """Advance one clone by one period. ``rng_stream`` is (seed, clone id, sweep)."""
    if not cfg.alive:
        raise DomainError("clone is dead")
    if not 0.0 <= gamma <= 1.0:
        raise DomainError("gamma must lie in [0, 1]")
    seed, slot, sweep = rng_stream
    env = cfg.symbols.reshape(1, 2, cfg.L).astype(np.int8).copy()
    qbond = bonds.rates(cfg.L, periodic)
    pos, lw, _ = _clone_sweep(env, 0, cfg.coh_pos, np.uint64(seed), slot, sweep, float(gamma), qbond, weighted)
    alive = lw > -np.inf
    return ReplicaConfig(env[0], int(pos), cfg.log_weight + lw if alive else -np.inf, alive)


# ---------------------------------------------------------------------------
# observables


@nb.njit(inline="always")
def _offset(x, X, L, periodic):
    d = x - X
    if periodic:
        d = (d + L // 2) % L - L // 2
    return d


@nb.njit(cache=True)
def _clone_summary(env, pos, periodic, out_offset, out_major):
    """Majority polarised species and its centre of mass relative to the coherence.

    Offsets use the minimal image on a ring. NaN when no site is polarised.
    """
    n, _, L = env.shape
    for c in range(n):
        nu = 0
        nd = 0
        su = 0.0
        sd = 0.0
        X = pos[c]
        for a in range(2):
            for x in range(L):
                v = env[c, a, x]
                if v == U_:
                    nu += 1
                    su += _offset(x, X, L, periodic)
                elif v == D_:
                    nd += 1
                    sd += _offset(x, X, L, periodic)
        if nu == 0 and nd == 0:
            out_offset[c] = np.nan
            out_major[c] = -1
        elif nd >= nu:
            out_offset[c] = sd / nd
            out_major[c] = D_
        else:
            out_offset[c] = su / nu
            out_major[c] = U_


@nb.njit(cache=True)
def _accumulate_profiles(env, pos, periodic, w, major, zz, branch, wsum, bsum):
    """Weighted sums of z1 z2 and branch-oriented density versus offset x - X."""
    n, _, L = env.shape
    for c in range(n):
        if w[c] == 0.0:
            continue
        X = pos[c]
        for x in range(L):
            if x == X:
                continue
            k = _offset(x, X, L, periodic) + L - 1
            a = env[c, 0, x]
            b = env[c, 1, x]
            za = 0.0 if a == IDN else (1.0 if a == U_ else -1.0)
            zb = 0.0 if b == IDN else (1.0 if b == U_ else -1.0)
            zz[k] += w[c] * za * zb
            wsum[k] += w[c]
            if major[c] >= 0:
                da = 0.5 if a == IDN else (0.0 if a == major[c] else 1.0)
                db = 0.5 if b == IDN else (0.0 if b == major[c] else 1.0)
                branch[k] += w[c] * 0.5 * (da + db)
                bsum[k] += w[c]


def unwrapped_position(state):
    """Coherence coordinate including ring windings."""
    return (state["pos"] + state["env"].shape[2] * state["winding"]).astype(float)


def clone_summary(state):
    """(void centre of mass on the unwrapped axis, majority code or -1) per clone."""
    env = state["env"]
    off = np.empty(env.shape[0])
    major = np.empty(env.shape[0], dtype=np.int64)
    _clone_summary(env, state["pos"], state["periodic"], off, major)
    return unwrapped_position(state) + off, major


class ProfileAccumulator:
    """Time-averaged conditioned profiles around the coherence over a window."""

    def __init__(self, L, window):
        self.L = L
        self.window = window
        size = 2 * L - 1
        self.zz = np.zeros(size)
        self.branch = np.zeros(size)
        self.wsum = np.zeros(size)
        self.bsum = np.zeros(size)
        self.samples = 0

    def __call__(self, state, w, t):
        if not (self.window[0] <= t <= self.window[1] + 1e-9):
            return
        _, major = clone_summary(state)
        _accumulate_profiles(
            state["env"], state["pos"], state["periodic"], w, major, self.zz, self.branch, self.wsum, self.bsum
        )
        self.samples += 1

    def folded(self, max_offset=None):
        """Profiles versus distance d >= 1, averaging both sides of the coherence."""
        L = self.L
        max_offset = max_offset or L - 1
        d = np.arange(1, max_offset + 1)
        zz = np.zeros(d.size)
        br = np.zeros(d.size)
        ok = np.zeros(d.size, dtype=bool)
        for i, dist in enumerate(d):
            ks = [L - 1 + dist, L - 1 - dist]
            ws = sum(self.wsum[k] for k in ks)
            bs = sum(self.bsum[k] for k in ks)
            if ws > 0 and bs > 0:
                zz[i] = sum(self.zz[k] for k in ks) / ws
                br[i] = sum(self.branch[k] for k in ks) / bs
                ok[i] = True
        return {"d": d[ok], "C": zz[ok], "rho_C": rho_from_C(zz[ok]), "rho_branch": br[ok], "weight": None}

    def results(self):
        return self.folded()


class PolaronTracker:
    """Conditioned MSDs of the coherence, the void centre of mass and their separation.

    With ``t_ref > 0`` displacements are measured from the positions at
    ``t_ref`` (typically the end of the burn-in); the references live in
    the clone state so they follow resampling. With ``t_ref == 0`` both
    are measured from the starting site. ``msd_rel`` is <(X - x_com)^2>.
    ``hist_times`` requests coherence-position histograms.
    """

    columns = ("t", "msd_X", "msd_com", "msd_rel", "mean_X", "mean_X2", "excluded")

    def __init__(self, t_ref, hist_times=(), origin=0.0):
        self.t_ref = t_ref
        self.hist_times = {round(float(t), 9) for t in hist_times}
        self.origin = origin
        self.rows = []
        self.histograms = {}

    def __call__(self, state, w, t):
        if "x_ref" not in state:
            if t + 1e-9 < self.t_ref:
                return
            if self.t_ref <= 0:
                state["x_ref"] = state["start"].astype(float)
                state["com_ref"] = state["x_ref"].copy()
            else:
                state["x_ref"] = unwrapped_position(state)
                state["com_ref"] = clone_summary(state)[0]
        pos = unwrapped_position(state)
        com, _ = clone_summary(state)
        dcom = com - state["com_ref"]
        good = np.isfinite(dcom) & (w > 0)
        excluded = int(np.count_nonzero((w > 0) & ~good))
        wg = w[good]
        norm = wg.sum()
        if norm > 0:
            msd_com = float(np.sum(wg * dcom[good] ** 2) / norm)
            msd_rel = float(np.sum(wg * (pos[good] - com[good]) ** 2) / norm)
        else:
            msd_com = msd_rel = np.nan
        msd_x = float(np.sum(w * (pos - state["x_ref"]) ** 2))
        x_rel = pos - self.origin
        self.rows.append((t, msd_x, msd_com, msd_rel, float(np.sum(w * x_rel)), float(np.sum(w * x_rel**2)), excluded))
        key = round(float(t), 9)
        if key in self.hist_times:
            self.histograms[key] = np.bincount(state["pos"], weights=w, minlength=state["env"].shape[2])

    def results(self):
        arr = np.array(self.rows, dtype=float).reshape(-1, len(self.columns))
        return {"table": {k: arr[:, i] for i, k in enumerate(self.columns)}, "histograms": self.histograms}


class LagMsdTracker:
    """Stationary-state MSDs versus lag, averaged over staggered time origins.

    After ``t_start`` a new origin opens every ``origin_every`` periods in one
    of ``n_slots`` rotating slots; each slot records displacements of the
    coherence and of the void centre of mass until ``max_lag`` and then
    restarts. In a quasi-stationary state every origin samples the same law,
    so averaging over origins cuts the noise from lineage collapse.
    """

    def __init__(self, t_start, max_lag, origin_every):
        if max_lag < 1 or origin_every < 1:
            raise DomainError("max_lag and origin_every must be positive")
        self.t_start = t_start
        self.max_lag = int(max_lag)
        self.origin_every = int(origin_every)
        self.n_slots = -(-self.max_lag // self.origin_every)
        self.sum_x = np.zeros(self.max_lag + 1)
        self.sum_com = np.zeros(self.max_lag + 1)
        self.count = np.zeros(self.max_lag + 1)
        self.count_com = np.zeros(self.max_lag + 1)
        self.opened = np.full(self.n_slots, -1, dtype=np.int64)

    def __call__(self, state, w, t):
        if t + 1e-9 < self.t_start:
            return
        k = int(round(t - self.t_start))
        n = state["pos"].size
        if "lag_x" not in state:
            state["lag_x"] = np.zeros((n, self.n_slots))
            state["lag_com"] = np.zeros((n, self.n_slots))
        pos = unwrapped_position(state)
        com, _ = clone_summary(state)
        for j in range(self.n_slots):
            if self.opened[j] < 0 and k == j * self.origin_every:
                self.opened[j] = k
            if self.opened[j] < 0:
                continue
            lag = k - self.opened[j]
            if lag > self.max_lag:
                self.opened[j] = k
                lag = 0
            if lag == 0:
                state["lag_x"][:, j] = pos
                state["lag_com"][:, j] = com
                continue
            dx = pos - state["lag_x"][:, j]
            dc = com - state["lag_com"][:, j]
            self.sum_x[lag] += float(np.sum(w * dx * dx))
            self.count[lag] += 1
            good = np.isfinite(dc)
            wg = w[good]
            if wg.sum() > 0:
                self.sum_com[lag] += float(np.sum(wg * dc[good] ** 2) / wg.sum())
                self.count_com[lag] += 1

    def results(self):
        lag = np.arange(self.max_lag + 1)
        with np.errstate(invalid="ignore", divide="ignore"):
            msd_x = self.sum_x / self.count
            msd_com = self.sum_com / self.count_com
        msd_x[0] = msd_com[0] = 0.0
        return {"lag": lag, "msd_X": msd_x, "msd_com": msd_com, "origins": self.count.copy()}


@dataclass
class ObserverGroup:
    observers: list = field(default_factory=list)

    def __call__(self, state, w, t):
        for ob in self.observers:
            ob(state, w, t)

    def results(self):
        return [ob.results() for ob in self.observers]


def free_coherence_diffusion(L=201, sweeps=200, n_clones=4000, seed=11):
    """Lattice diffusion constant from the free coherence MSD on a perfect void.

    Returns (D, stderr) from MSD = 2 D t; bond exchange probability 1/2.
    """
    from .cloning import run_population

    proc = DiluteProcess(L, 0.0, init="down", start=L // 2)
    tracker = PolaronTracker(t_ref=0.0)
    run_population(proc, n_clones, sweeps, seed, burn_in=0.0, observer=tracker)
    tab = tracker.results()["table"]
    t = tab["t"]
    msd = tab["msd_X"]
    half = t.size // 2
    slope = np.polyfit(t[half:], msd[half:], 1)[0]
    # independent walkers: binomial-like error from the final-time spread
    err = np.sqrt(2.0 / n_clones) * msd[-1] / (t[-1] - t[half])
    return slope / 2.0, err / 2.0
