"""Exact diagonalization of the depolarized SSEP/KLS generator and the wedge
localization problem.

Each site carries a particle bit. The generator H = -L has KLS exchange
across every bond, with rate r0 * (1 + delta * (1 - n_left - n_right)) set by
the two outer neighbours, plus a spin flip at rate gamma/2 on every site.
With r0 = 1/4 a lone Z operator at momentum k decays at sin^2(k/2) + gamma,
and the density-dependent diffusivity is r0 * (1 + delta * (1 - 2 rho)).

Spectra are computed in the magnon basis, the local Hadamard rotation that
sends (P_up, P_down) to (identity, Z). There the bath term is diagonal and
counts Z factors, and the number of Z factors is the magnon number.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import sparse
from scipy.linalg import eigh, eigh_tridiagonal

from .errors import CapacityError, DomainError, NumericalFailure

HOP_RATE = 0.25
MAX_SITES = 16
AIRY_HALF_WIDTH = 20.0
AIRY_STEP = 0.01


@dataclass(frozen=True)
class GeneratorSpec:
    L: int
    delta: float = 0.0
    gamma: float = 0.0
    periodic: bool = True

    def __post_init__(self):
        if self.L > MAX_SITES:
            raise CapacityError(f"L={self.L} exceeds the dense limit {MAX_SITES}")
        if self.L < 2:
            raise DomainError("need at least two sites")
        if not abs(self.delta) < 1:
            raise DomainError("need |delta| < 1")
        if self.gamma < 0:
            raise DomainError("gamma must be >= 0")


@dataclass
class SpectrumTable:
    k: np.ndarray
    n_magnon: np.ndarray
    lam: np.ndarray

    def rows(self):
        return list(zip(self.k.tolist(), self.n_magnon.tolist(), self.lam.tolist()))


def diffusivity(rho, delta=0.0):
    return HOP_RATE * (1.0 + delta * (1.0 - 2.0 * rho))


def _bond_term(delta, has_left, has_right):
    """Local H on (left?, i, j, right?) in the occupation basis, bit m = site m."""
    k = 2 + has_left + has_right
    h = np.zeros((2**k, 2**k))
    i = int(has_left)
    j = i + 1
    for c in range(2**k):
        ni = (c >> i) & 1
        nj = (c >> j) & 1
        if ni == nj:
            continue
        nl = (c & 1) if has_left else 0
        nr = (c >> (k - 1)) & 1 if has_right else 0
        rate = HOP_RATE * (1.0 + delta * (1 - nl - nr))
        h[c ^ ((1 << i) | (1 << j)), c] -= rate
        h[c, c] += rate
    return h


def _flip_term(gamma):
    return 0.5 * gamma * np.array([[1.0, -1.0], [-1.0, 1.0]])


def _hadamard(k):
    w = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
    out = np.ones((1, 1))
    for _ in range(k):
        out = np.kron(w, out)
    return out


def _embed(local, sites, L):
    """Sparse embedding of a local matrix acting on ``sites`` (bit m of the
    local index is sites[m])."""
    n = 2**L
    conf = np.arange(n, dtype=np.int64)
    mask = 0
    loc = np.zeros(n, dtype=np.int64)
    for m, s in enumerate(sites):
        loc |= ((conf >> s) & 1) << m
        mask |= 1 << s
    base = conf & ~mask
    rows, cols, vals = [], [], []
    for lo, li in zip(*np.nonzero(local)):
        src = conf[loc == li]
        dst = base[loc == li]
        for m, s in enumerate(sites):
            dst = dst | (((lo >> m) & 1) << s)
        rows.append(dst)
        cols.append(src)
        vals.append(np.full(src.size, local[lo, li]))
    return sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )


def build_generator(spec: GeneratorSpec, basis="occupation"):
    """Sparse H = -L over 2^L configurations.

    ``basis="occupation"`` acts on probability vectors (columns of -H sum to
    zero); ``basis="magnon"`` is the same operator after the local Hadamard
    rotation, where bit 1 marks a Z factor.
    """
    if basis not in ("occupation", "magnon"):
        raise DomainError(f"unknown basis {basis!r}")
    L = spec.L
    rotate = basis == "magnon"
    n_bonds = L if spec.periodic else L - 1
    H = sparse.csr_matrix((2**L, 2**L))
    for i in range(n_bonds):
        j = (i + 1) % L
        left = (i - 1) % L if (spec.periodic or i > 0) else None
        right = (j + 1) % L if (spec.periodic or j < L - 1) else None
        # on rings shorter than four sites the outer neighbours wrap onto
        # the bond itself; they are then ignored
        if left in (i, j):
            left = None
        if right in (i, j, left):
            right = None
        sites = ([left] if left is not None else []) + [i, j] + ([right] if right is not None else [])
        h = _bond_term(spec.delta, left is not None, right is not None)
        if rotate:
            w = _hadamard(len(sites))
            h = w @ h @ w
            h[np.abs(h) < 1e-15] = 0.0
        H = H + _embed(h, sites, L)
    if spec.gamma > 0:
        f = _flip_term(spec.gamma)
        if rotate:
            w = _hadamard(1)
            f = w @ f @ w
            f[np.abs(f) < 1e-15] = 0.0
        for i in range(L):
            H = H + _embed(f, [i], L)
    return H.tocsr()


def _popcount(a):
    a = np.asarray(a, dtype=np.int64)
    out = np.zeros_like(a)
    while np.any(a):
        out += a & 1
        a = a >> 1
    return out


@lru_cache(maxsize=4)
def _translation_orbits(L):
    """For every configuration: orbit representative, orbit size and the
    shift j with conf = T^j rep, where T moves site s to s+1."""
    n = 2**L
    full = n - 1
    conf = np.arange(n, dtype=np.int64)
    rots = np.empty((L, n), dtype=np.int64)
    for m in range(L):
        # rotate right by m: site s -> s - m
        rots[m] = ((conf >> m) | (conf << (L - m))) & full if m else conf
    rep = rots.min(axis=0)
    m_star = rots.argmin(axis=0)
    size = np.full(n, L, dtype=np.int64)
    for m in range(L - 1, 0, -1):
        size[(L % m == 0) & (rots[m] == conf)] = m
    shift = m_star % size
    return rep, size, shift


def _momentum_basis(L, m, allowed):
    """Sparse columns |rep, k> for configurations flagged ``allowed``."""
    rep, size, shift = _translation_orbits(L)
    k = 2.0 * np.pi * m / L
    ok = allowed & ((m * size) % L == 0)
    reps = np.unique(rep[ok])
    col_of = {int(r): c for c, r in enumerate(reps)}
    idx = np.nonzero(ok)[0]
    cols = np.array([col_of[int(r)] for r in rep[idx]], dtype=np.int64)
    vals = np.exp(-1j * k * shift[idx]) / np.sqrt(size[idx])
    P = sparse.csr_matrix((vals, (idx, cols)), shape=(2**L, reps.size))
    return P, reps


def momentum_block(spec: GeneratorSpec, m, n_magnon=None, include_vacuum=False, H=None):
    """Dense Hermitian block of H in the magnon basis at k = 2 pi m / L.

    Returns (block, magnon number of each basis state). ``H`` may pass a
    prebuilt magnon-basis generator.
    """
    if not spec.periodic:
        raise DomainError("momentum blocks need a periodic chain")
    L = spec.L
    if H is None:
        H = build_generator(spec, basis="magnon")
    weight = _popcount(np.arange(2**L))
    allowed = np.ones(2**L, dtype=bool) if include_vacuum else weight > 0
    if n_magnon is not None:
        allowed &= weight == n_magnon
    P, reps = _momentum_basis(L, m, allowed)
    block = (P.conj().T @ (H @ P)).toarray()
    return 0.5 * (block + block.conj().T), weight[reps]


def leading_eigs_by_momentum(spec: GeneratorSpec, n_magnon=None, n_levels=1):
    """Slowest decay rate and its mean magnon number for k = 2 pi m / L,
    m = 0..L/2. The stationary (zero-magnon) state is excluded.

    With ``n_magnon`` the search is restricted to that magnon sector, which
    is exact only when the sectors decouple (delta = 0).
    """
    H = build_generator(spec, basis="magnon")
    ks, nm, lam = [], [], []
    for m in range(spec.L // 2 + 1):
        block, w = momentum_block(spec, m, n_magnon=n_magnon, H=H)
        if block.shape[0] == 0:
            continue
        try:
            vals, vecs = eigh(block, subset_by_index=[0, min(n_levels, block.shape[0]) - 1])
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure(f"eigensolver failed at m={m}: {exc}") from exc
        for v, vec in zip(vals, vecs.T):
            p = np.abs(vec) ** 2
            ks.append(2.0 * np.pi * m / spec.L)
            nm.append(float(p @ w / p.sum()))
            lam.append(float(v))
    return SpectrumTable(np.array(ks), np.array(nm), np.array(lam))


def one_magnon_band(spec: GeneratorSpec):
    """Eigenvalues of the one-magnon sector per momentum, m = 0..L-1."""
    H = build_generator(spec, basis="magnon")
    out = []
    for m in range(spec.L):
        block, _ = momentum_block(spec, m, n_magnon=1, H=H)
        out.append(np.linalg.eigvalsh(block))
    return np.array(out)


def magnon_mixing_norm(spec: GeneratorSpec):
    """Frobenius norm of the magnon-basis generator between different
    magnon numbers. Zero when magnon number is conserved."""
    H = build_generator(spec, basis="magnon").tocoo()
    w = _popcount(np.arange(2**spec.L))
    off = w[H.row] != w[H.col]
    return float(np.sqrt(np.sum(H.data[off] ** 2)))


def cascade_gap(k, gamma, D=None, n_max=50):
    """Cheapest way to carry momentum k with n equal-momentum magnons.

    Lattice form n sin^2(k/(2n)) + n gamma when ``D`` is None, otherwise the
    continuum form D k^2 / n + n gamma. Returns (n_star, rate).
    """
    if not 0 < k <= np.pi:
        raise DomainError("k must lie in (0, pi]")
    if gamma <= 0:
        raise DomainError("gamma must be positive")
    n = np.arange(1, n_max + 1)
    if D is None:
        cost = n * np.sin(k / (2 * n)) ** 2 + n * gamma
    else:
        cost = D * k * k / n + n * gamma
    i = int(np.argmin(cost))
    return int(n[i]), float(cost[i])


def _wedge_levels(half_width, h, n_levels):
    z = np.arange(-half_width, half_width + 0.5 * h, h)[1:-1]
    diag = 2.0 / h**2 + np.abs(z)
    off = np.full(z.size - 1, -1.0 / h**2)
    vals, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(0, n_levels - 1))
    return z, vals, vecs


def airy_levels(n_levels=2, half_width=AIRY_HALF_WIDTH, h=AIRY_STEP):
    """Lowest levels of -psi'' + |z| psi, Richardson-extrapolated in h."""
    _, coarse, _ = _wedge_levels(half_width, h, n_levels)
    z, fine, vecs = _wedge_levels(half_width, h / 2, n_levels)
    return (4.0 * fine - coarse) / 3.0, z, vecs


def airy_ground_state(half_width=AIRY_HALF_WIDTH, h=AIRY_STEP):
    """Ground energy of (-d^2/dz^2 + |z|) psi = eps psi and the normalized
    ground state on the fine grid, sign-fixed positive."""
    vals, z, vecs = airy_levels(1, half_width, h)
    psi = vecs[:, 0]
    psi = psi * np.sign(psi[np.argmax(np.abs(psi))])
    psi = psi / np.sqrt(np.sum(psi**2) * (z[1] - z[0]))
    return float(vals[0]), z, psi


def airy_second_moment(half_width=AIRY_HALF_WIDTH, h=AIRY_STEP):
    _, z, psi = airy_ground_state(half_width, h)
    return float(np.sum(z**2 * psi**2) * (z[1] - z[0]))


@dataclass(frozen=True)
class WedgeProblem:
    d_eff: float
    slope: float
    xi: float = np.inf

    def __post_init__(self):
        if self.d_eff <= 0 or self.slope <= 0 or self.xi <= 0:
            raise DomainError("wedge parameters must be positive")


def wedge_slope(varrho, gamma, xi):
    """Slope of the pinning potential near the slow bond."""
    return varrho * gamma / xi


def wedge_localization(p: WedgeProblem, h=AIRY_STEP):
    """Solve -D psi'' + slope |y| psi = E psi.

    Returns (ell_loc, <y^2>) with ell_loc = (D / slope)^(1/3). The problem is
    discretised directly in y on a grid scaled by ell_loc.
    """
    ell = (p.d_eff / p.slope) ** (1.0 / 3.0)
    hy = h * ell
    y = np.arange(-AIRY_HALF_WIDTH * ell, AIRY_HALF_WIDTH * ell + 0.5 * hy, hy)[1:-1]
    diag = 2.0 * p.d_eff / hy**2 + p.slope * np.abs(y)
    off = np.full(y.size - 1, -p.d_eff / hy**2)
    _, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(0, 0))
    psi2 = vecs[:, 0] ** 2
    return float(ell), float(np.sum(y**2 * psi2) / np.sum(psi2))
