"""Disordered XYZ spin-1/2 chain: parameters, coupling samplers and Hamiltonians.

Basis convention: site ``i`` is bit ``i`` of the basis index (site 0 is the
least significant bit); a set bit is spin up, so ``sigma^z = 2*bit - 1``.
The fully polarized state ``|up ... up>`` is index ``2**N - 1``.

The Hamiltonian is

    H = sum_b J_b/4 [(1+g) XX + (1-g) YY] + sum_b d_b/4 ZZ - h/2 sum_i Z_i

with energy unit 1. All matrix elements are real in this basis.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

MAX_SITES = 20

PLANAR = 0
AZIMUTHAL = 1


class Boundary(str, enum.Enum):
    PERIODIC = "periodic"
    OPEN = "open"


class Disorder(str, enum.Enum):
    ORDERED = "ordered"
    PLANAR = "planar"
    AZIMUTHAL = "azimuthal"
    BOTH = "both"

    @property
    def planar_random(self) -> bool:
        return self in (Disorder.PLANAR, Disorder.BOTH)

    @property
    def azimuthal_random(self) -> bool:
        return self in (Disorder.AZIMUTHAL, Disorder.BOTH)


@dataclass(frozen=True)
class ModelParams:
    N: int
    gamma: float
    h: float
    boundary: Boundary = Boundary.PERIODIC

    def __post_init__(self):
        if self.N < 2:
            raise ValueError(f"need at least 2 sites, got N={self.N}")
        object.__setattr__(self, "boundary", Boundary(self.boundary))

    @property
    def dim(self) -> int:
        return 1 << self.N

    @property
    def n_bonds(self) -> int:
        if self.boundary is Boundary.OPEN:
            return self.N - 1
        return self.N


@dataclass(frozen=True)
class DisorderCase:
    """Which couplings are quenched-random, and their distribution.

    ``lam`` and ``mu`` are the dimensionless means <J>/h and <delta>/h (for a
    non-random coupling they are its fixed value). ``sigma_J`` and
    ``sigma_delta`` are the standard deviations of the per-bond lam_b and
    mu_b, so the couplings J_b = lam_b * h spread by sigma_J * h.
    """

    variant: Disorder
    lam: float
    mu: float
    sigma_J: float = 1.0
    sigma_delta: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "variant", Disorder(self.variant))
        if self.sigma_J < 0 or self.sigma_delta < 0:
            raise ValueError("standard deviations must be non-negative")

    @property
    def planar_sigma(self) -> float:
        return self.sigma_J if self.variant.planar_random else 0.0

    @property
    def azimuthal_sigma(self) -> float:
        return self.sigma_delta if self.variant.azimuthal_random else 0.0

    @property
    def is_trivial(self) -> bool:
        return self.planar_sigma == 0.0 and self.azimuthal_sigma == 0.0

    @classmethod
    def ordered(cls, lam, mu):
        return cls(Disorder.ORDERED, lam, mu, 0.0, 0.0)


@dataclass(frozen=True)
class CouplingRealization:
    J: np.ndarray
    delta: np.ndarray
    realization_index: int = 0
    seed: int = 0


def bond_list(params: ModelParams) -> list[tuple[int, int]]:
    """Nearest-neighbour bonds in deterministic order; the ring adds (N-1, 0)."""
    bonds = [(i, i + 1) for i in range(params.N - 1)]
    if params.n_bonds == params.N:
        bonds.append((params.N - 1, 0))
    return bonds


# -- seeding -----------------------------------------------------------------

def realization_seed(master_seed: int, index: int) -> int:
    """64-bit seed of realization ``index``, independent of execution order."""
    ss = np.random.SeedSequence([int(master_seed) & (2**64 - 1), int(index)])
    return int(ss.generate_state(1, np.uint64)[0])


def _substream_normal(seed: int, bond: int, kind: int) -> float:
    # Philox is counter based: the (bond, kind) pair addresses its own block.
    bitgen = np.random.Philox(key=[seed, 0], counter=[bond, kind, 0, 0])
    raw = int(bitgen.random_raw())
    u = ((raw >> 11) + 0.5) / 2.0**53
    return float(ndtri(u))


def standard_deviates(seed: int, n_bonds: int) -> np.ndarray:
    """Unit normal deviates of one realization, shape (2, n_bonds).

    Row ``PLANAR`` feeds J, row ``AZIMUTHAL`` feeds delta.
    """
    z = np.empty((2, n_bonds))
    for kind in (PLANAR, AZIMUTHAL):
        for b in range(n_bonds):
            z[kind, b] = _substream_normal(seed, b, kind)
    return z


@functools.lru_cache(maxsize=32)
def _deviate_table(master_seed: int, start: int, stop: int, n_bonds: int) -> np.ndarray:
    z = np.empty((stop - start, 2, n_bonds))
    for r in range(start, stop):
        z[r - start] = standard_deviates(realization_seed(master_seed, r), n_bonds)
    z.setflags(write=False)
    return z


def deviate_table(master_seed: int, start: int, stop: int, n_bonds: int) -> np.ndarray:
    """Deviates for realizations ``start..stop-1``, shape (R, 2, n_bonds).

    Cached, so every grid point and disorder case of a scan reuses the same
    draws (common random numbers).
    """
    return _deviate_table(int(master_seed), int(start), int(stop), int(n_bonds))


def couplings_from_deviates(case: DisorderCase, h: float, z: np.ndarray):
    """Map unit deviates (..., 2, n_bonds) to couplings J, delta (..., n_bonds)."""
    J = (case.lam + case.planar_sigma * z[..., PLANAR, :]) * h
    delta = (case.mu + case.azimuthal_sigma * z[..., AZIMUTHAL, :]) * h
    if case.planar_sigma == 0.0:
        J = np.full(z[..., PLANAR, :].shape, case.lam * h)
    if case.azimuthal_sigma == 0.0:
        delta = np.full(z[..., AZIMUTHAL, :].shape, case.mu * h)
    return J, delta


def sample_couplings(case: DisorderCase, params: ModelParams, seed: int,
                     realization_index: int = 0) -> CouplingRealization:
    """Draw one frozen realization of the per-bond couplings.

    J_b = (<lam> + sigma_J * z_b) * h, and likewise for delta_b, with z_b a
    unit normal deviate addressed by (seed, bond, kind).
    """
    z = standard_deviates(seed, params.n_bonds)
    J, delta = couplings_from_deviates(case, params.h, z)
    return CouplingRealization(J, delta, realization_index, seed)


def ordered_realization(params: ModelParams, lam: float, mu: float) -> CouplingRealization:
    nb = params.n_bonds
    return CouplingRealization(np.full(nb, lam * params.h), np.full(nb, mu * params.h))


# -- Hamiltonian -------------------------------------------------------------

@functools.lru_cache(maxsize=64)
def _basis_tables(N: int):
    idx = np.arange(1 << N, dtype=np.int64)
    bits = ((idx[None, :] >> np.arange(N)[:, None]) & 1).astype(np.int8)
    return idx, bits


@dataclass(frozen=True, eq=False)
class HamiltonianOperator:
    """Matrix-free XYZ Hamiltonian for one coupling realization."""

    params: ModelParams
    realization: CouplingRealization
    bonds: tuple = field(init=False)
    _diag: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        p = self.params
        bonds = tuple(bond_list(p))
        object.__setattr__(self, "bonds", bonds)
        _, bits = _basis_tables(p.N)
        diag = -0.5 * p.h * (2.0 * bits.sum(axis=0, dtype=np.int64) - p.N)
        for d, (i, j) in zip(self.realization.delta, bonds):
            diag = diag + np.where(bits[i] == bits[j], 0.25 * d, -0.25 * d)
        diag.setflags(write=False)
        object.__setattr__(self, "_diag", diag)

    @property
    def dimension(self) -> int:
        return self.params.dim

    @property
    def shape(self):
        return (self.dimension, self.dimension)

    @property
    def dtype(self):
        return np.dtype(float)

    def matvec(self, v):
        return apply_hamiltonian(self, v)

    def __matmul__(self, v):
        return apply_hamiltonian(self, v)

    def to_dense(self) -> np.ndarray:
        """Explicit matrix, for small N only."""
        D = self.dimension
        H = np.diag(np.array(self._diag))
        idx, bits = _basis_tables(self.params.N)
        g = self.params.gamma
        for J, (i, j) in zip(self.realization.J, self.bonds):
            same = bits[i] == bits[j]
            amp = np.where(same, 0.5 * J * g, 0.5 * J)
            flipped = idx ^ ((1 << i) | (1 << j))
            H[flipped, idx] += amp
        assert H.shape == (D, D)
        return H


def build_hamiltonian(params: ModelParams, realization: CouplingRealization) -> HamiltonianOperator:
    if params.N > MAX_SITES:
        raise ValueError(f"N={params.N} exceeds the supported maximum {MAX_SITES}")
    nb = params.n_bonds
    if len(realization.J) != nb or len(realization.delta) != nb:
        raise ValueError(f"coupling vectors must have length {nb}")
    return HamiltonianOperator(params, realization)


def apply_hamiltonian(H: HamiltonianOperator, v: np.ndarray) -> np.ndarray:
    """H @ v for a vector (D,) or a block of column vectors (D, k), O(N 2^N)."""
    v = np.asarray(v)
    if v.shape[0] != H.dimension:
        raise ValueError(f"vector has length {v.shape[0]}, expected {H.dimension}")
    J = np.asarray(H.realization.J, dtype=float)[None, :]
    if v.ndim == 1:
        return apply_batch(H.params, H._diag[None, :], J, v[None, :])[0]
    return apply_batch(H.params, H._diag[None, :], J, v.T).T


def diagonal(params: ModelParams, delta: np.ndarray) -> np.ndarray:
    """Diagonal of H (zz bonds plus Zeeman) for couplings delta of shape (R, n_bonds)."""
    delta = np.atleast_2d(delta)
    _, bits = _basis_tables(params.N)
    out = np.empty((delta.shape[0], params.dim))
    out[:] = -0.5 * params.h * (2.0 * bits.sum(axis=0, dtype=np.int64) - params.N)
    for b, (i, j) in enumerate(bond_list(params)):
        sign = np.where(bits[i] == bits[j], 0.25, -0.25)
        out += delta[:, b, None] * sign
    return out


def apply_batch(params: ModelParams, diag: np.ndarray, J: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Apply a stack of Hamiltonians to a stack of vectors.

    ``diag`` (R or 1, D) and ``J`` (R or 1, n_bonds) describe the operators,
    ``V`` is (R, D). Flipping the spins of bond (i, j) is a reversal of two
    axes of the state viewed as a tensor, so no index arrays are needed.
    """
    N, g = params.N, params.gamma
    V = np.asarray(V)
    R = V.shape[0]
    out = diag * V
    # amplitude indexed by the (higher, lower) bits of the pair: same bits -> g/2
    table = 0.5 * np.array([[g, 1.0], [1.0, g]])
    for b, (i, j) in enumerate(bond_list(params)):
        Jb = J[:, b]
        if not np.any(Jb):
            continue
        lo, hi = min(i, j), max(i, j)
        shape = (R, 1 << (N - 1 - hi), 2, 1 << (hi - lo - 1), 2, 1 << lo)
        coef = Jb[:, None, None, None, None, None] * table[None, None, :, None, :, None]
        o5 = out.reshape(shape)
        o5 += coef * V.reshape(shape)[:, :, ::-1, :, ::-1, :]
    return out


# -- batched dense construction (small N) ------------------------------------

@functools.lru_cache(maxsize=32)
def bond_term_matrices(params: ModelParams):
    """Per-bond dense pieces: (flip terms for J, zz terms for delta, Zeeman diag).

    Returns arrays ``A`` (n_bonds, D, D), ``Z`` (n_bonds, D) and ``zeeman`` (D,)
    such that H = sum_b J_b A_b + diag(sum_b delta_b Z_b + zeeman).
    """
    N, D = params.N, params.dim
    idx, bits = _basis_tables(N)
    spins = 2.0 * bits - 1.0
    bonds = bond_list(params)
    A = np.zeros((len(bonds), D, D))
    Z = np.zeros((len(bonds), D))
    for b, (i, j) in enumerate(bonds):
        same = bits[i] == bits[j]
        A[b, idx ^ ((1 << i) | (1 << j)), idx] = np.where(same, 0.5 * params.gamma, 0.5)
        Z[b] = 0.25 * spins[i] * spins[j]
    zeeman = -0.5 * params.h * spins.sum(axis=0)
    for arr in (A, Z, zeeman):
        arr.setflags(write=False)
    return A, Z, zeeman


def parity_sectors(N: int):
    """Basis indices of the even and odd up-count sectors."""
    idx, bits = _basis_tables(N)
    parity = bits.sum(axis=0) % 2
    return idx[parity == 0], idx[parity == 1]


def dense_batch(params: ModelParams, J: np.ndarray, delta: np.ndarray,
                sector: np.ndarray | None = None) -> np.ndarray:
    """Stack of dense Hamiltonians for couplings J, delta of shape (R, n_bonds).

    With ``sector`` given, only that block of basis states is built.
    """
    A, Z, zeeman = bond_term_matrices(params)
    if sector is not None:
        A = A[:, sector][:, :, sector]
        Z = Z[:, sector]
        zeeman = zeeman[sector]
    D = A.shape[-1]
    R = J.shape[0]
    # elementwise accumulation keeps each row independent of the batch size
    H = np.zeros((R, D, D))
    diag = np.broadcast_to(zeeman, (R, D)).copy()
    for b in range(A.shape[0]):
        H += J[:, b, None, None] * A[b]
        diag += delta[:, b, None] * Z[b]
    H[:, np.arange(D), np.arange(D)] += diag
    return H
