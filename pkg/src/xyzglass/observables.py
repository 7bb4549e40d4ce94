"""Single-site, two-site and multipartite quantities of pure chain states.

Every function that takes a state also accepts a stack of states with shape
(R, 2**N); the result then gains a leading axis of length R. This is how the
quenched averages process thousands of small ground states at once.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np

from .model import ModelParams, bond_list

PSD_TOL = 1e-12
GGM_MAX_SITES = 14

PAULI = {
    # ordered as (down, up) = (bit 0, bit 1)
    "x": np.array([[0.0, 1.0], [1.0, 0.0]]),
    "y": np.array([[0.0, 1.0j], [-1.0j, 0.0]]),
    "z": np.array([[-1.0, 0.0], [0.0, 1.0]]),
}
_SYSY = np.kron(PAULI["y"], PAULI["y"]).real


@dataclass(frozen=True)
class ReducedDensityMatrix:
    """Density matrix of ``sites``; ``sites[0]`` is the least significant bit."""

    sites: tuple
    matrix: np.ndarray


def _n_sites(state) -> int:
    D = np.shape(state)[-1]
    N = D.bit_length() - 1
    if D != 1 << N or N < 1:
        raise ValueError(f"state length {D} is not a power of two")
    return N


def _tensor(state, N):
    # axis k of the tensor (after the batch axes) is site N-1-k
    return np.reshape(state, np.shape(state)[:-1] + (2,) * N)


def _split_matrix(state, sites):
    """Reshape a state into (..., 2**len(sites), rest) for the cut sites:rest."""
    state = np.asarray(state)
    N = _n_sites(state)
    sites = tuple(int(s) for s in sites)
    if len(set(sites)) != len(sites) or not sites:
        raise ValueError(f"sites must be distinct and nonempty: {sites}")
    if any(s < 0 or s >= N for s in sites):
        raise ValueError(f"site index out of range for N={N}: {sites}")
    nb = state.ndim - 1
    kept = [nb + N - 1 - s for s in reversed(sites)]
    rest = [nb + N - 1 - s for s in range(N - 1, -1, -1) if s not in sites]
    t = np.transpose(_tensor(state, N), tuple(range(nb)) + tuple(kept + rest))
    return t.reshape(state.shape[:-1] + (1 << len(sites), -1))


def reduced_density_matrix(state, sites) -> ReducedDensityMatrix:
    """Partial trace of |state><state| over every site not in ``sites``."""
    sites = tuple(int(s) for s in sites)
    N = _n_sites(state)
    if len(sites) > N - 1:
        raise ValueError("must trace out at least one site")
    M = _split_matrix(state, sites)
    rho = M @ np.conj(np.swapaxes(M, -1, -2))
    return ReducedDensityMatrix(sites, rho)


def expectation(state, op, sites):
    """<state| op |state> for an operator on ``sites`` (ordered as an RDM)."""
    rho = reduced_density_matrix(state, sites).matrix
    val = np.einsum("...ij,ji->...", rho, op)
    return np.real(val)


def magnetization(state, i, axis="z"):
    return expectation(state, PAULI[axis], (i,))


def magnetization_z(state, i):
    """<sigma^z_i>."""
    return magnetization(state, i, "z")


def correlator(state, i, j, axes=("z", "z")):
    """T_ab = <sigma^a_i sigma^b_j>."""
    a, b = axes
    if a not in PAULI or b not in PAULI:
        raise ValueError(f"axes must be in x, y, z: {axes}")
    if i == j:
        raise ValueError("correlator needs two distinct sites")
    # RDM index is bit_i + 2*bit_j, so site j is the left kron factor
    return expectation(state, np.kron(PAULI[b], PAULI[a]), (i, j))


def _check_psd(evals, tol=1e-10):
    if np.any(evals < -tol):
        raise ValueError(f"density matrix is not positive semidefinite (min eig {evals.min():.3g})")


def concurrence(rdm):
    """Wootters concurrence of a two-qubit density matrix (or a stack of them)."""
    rho = rdm.matrix if isinstance(rdm, ReducedDensityMatrix) else np.asarray(rdm)
    if rho.shape[-2:] != (4, 4):
        raise ValueError("concurrence needs a 4x4 density matrix")
    rho_tilde = _SYSY @ np.conj(rho) @ _SYSY
    # eig(rho rho~) = eig(s rho~ s) with s = sqrt(rho); the latter is Hermitian
    w, v = np.linalg.eigh(rho)
    _check_psd(w)
    s = (v * np.sqrt(np.clip(w, 0.0, None))[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))
    m = np.linalg.eigvalsh(s @ rho_tilde @ s)
    lam = np.sqrt(np.clip(m, 0.0, None))[..., ::-1]
    c = lam[..., 0] - lam[..., 1] - lam[..., 2] - lam[..., 3]
    return np.clip(c, 0.0, None)


def bipartition_count(N: int, deduplicate: bool = True) -> int:
    """Number of cuts ``bipartition_iterator`` yields.

    Without deduplication this is sum_{r=1}^{N//2} C(N, r), e.g. 162 at N=8.
    """
    n = sum(comb(N, r) for r in range(1, N // 2 + 1))
    if deduplicate and N % 2 == 0:
        n -= comb(N, N // 2) // 2
    return n


def bipartition_iterator(N: int, deduplicate: bool = True):
    """Yield the smaller side of every cut of N sites.

    Subsets have 1 <= |A| <= N//2. For even N the half-size subsets come in
    complementary pairs; with ``deduplicate`` only the one holding site 0 is
    yielded.
    """
    if N < 2:
        raise ValueError("need at least two sites")
    for r in range(1, N // 2 + 1):
        for A in itertools.combinations(range(N), r):
            if deduplicate and 2 * r == N and A[0] != 0:
                continue
            yield A


def max_schmidt_weight(state, sites):
    """Largest squared Schmidt coefficient of the cut ``sites`` : rest."""
    M = _split_matrix(state, sites)
    if M.shape[-2] > M.shape[-1]:
        M = np.swapaxes(M, -1, -2)
    rho = M @ np.conj(np.swapaxes(M, -1, -2))
    return np.linalg.eigvalsh(rho)[..., -1]


def _one_minus_max(state, subsets):
    best = None
    for A in subsets:
        w = max_schmidt_weight(state, A)
        best = w if best is None else np.maximum(best, w)
    return np.clip(1.0 - best, 0.0, None)


def ggm(state):
    """Generalized geometric measure: 1 - max over all cuts of the top Schmidt weight."""
    N = _n_sites(state)
    if N > GGM_MAX_SITES:
        raise ValueError(f"ggm over all cuts is capped at N={GGM_MAX_SITES}; use ggm_approx")
    if N == 1:
        return np.zeros(np.shape(state)[:-1]) if np.ndim(state) > 1 else 0.0
    return _one_minus_max(state, bipartition_iterator(N))


def ggm_approx(state, params: ModelParams):
    """GGM restricted to single sites and nearest-neighbour pairs of the bond list."""
    N = _n_sites(state)
    if N != params.N:
        raise ValueError(f"state has {N} sites, params say {params.N}")
    cuts = [(i,) for i in range(N)]
    if N > 2:
        cuts += [tuple(sorted(b)) for b in bond_list(params)]
    return _one_minus_max(state, cuts)


@dataclass
class ObservableSet:
    m_z: float
    t_xx: float
    t_yy: float
    t_zz: float
    concurrence: float
    ggm: float
    ggm2: float
    site: int = 0
    pair: tuple = (0, 1)

    FIELDS = ("m_z", "t_xx", "t_yy", "t_zz", "concurrence", "ggm", "ggm2")

    def as_dict(self):
        return {k: getattr(self, k) for k in self.FIELDS}


def default_site(N: int) -> int:
    return N // 2


def default_pair(N: int) -> tuple:
    return (N // 2 - 1, N // 2)


def observable_arrays(states, params: ModelParams, site=None, pair=None,
                      ggm_max_sites: int = GGM_MAX_SITES) -> dict:
    """All ObservableSet fields for a stack of states, as arrays of length R.

    ``ggm`` is NaN when N exceeds ``ggm_max_sites``.
    """
    states = np.asarray(states)
    site = default_site(params.N) if site is None else site
    i, j = default_pair(params.N) if pair is None else pair
    rho1 = reduced_density_matrix(states, (site,)).matrix
    rho2 = reduced_density_matrix(states, (i, j)).matrix

    def ev(rho, op):
        return np.real(np.einsum("...ij,ji->...", rho, op))

    out = {
        "m_z": ev(rho1, PAULI["z"]),
        "t_xx": ev(rho2, np.kron(PAULI["x"], PAULI["x"])),
        "t_yy": ev(rho2, np.kron(PAULI["y"], PAULI["y"])),
        "t_zz": ev(rho2, np.kron(PAULI["z"], PAULI["z"])),
        "concurrence": concurrence(rho2),
    }
    if params.N <= min(ggm_max_sites, GGM_MAX_SITES):
        out["ggm"] = ggm(states)
    else:
        out["ggm"] = np.full(states.shape[:-1], np.nan)
    out["ggm2"] = ggm_approx(states, params)
    return out


def observable_set(state, params: ModelParams, site=None, pair=None) -> ObservableSet:
    """Bundle every quantity for one state; ``pair`` must be a bond of the chain."""
    site = default_site(params.N) if site is None else site
    pair = default_pair(params.N) if pair is None else tuple(pair)
    if tuple(sorted(pair)) not in {tuple(sorted(b)) for b in bond_list(params)}:
        raise ValueError(f"pair {pair} is not a nearest-neighbour bond")
    vals = observable_arrays(np.asarray(state)[None, :], params, site, pair)
    return ObservableSet(**{k: float(v[0]) for k, v in vals.items()}, site=site, pair=pair)
