"""Ground states: dense diagonalization, restarted Lanczos, and a batched dense path."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import HamiltonianOperator, ModelParams, dense_batch, parity_sectors

DENSE_MAX_SITES = 12
DENSE_AUTO_MAX_SITES = 10
DEGENERACY_REL = 1e-8
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 1000


@dataclass
class GroundStateResult:
    energy: float
    state: np.ndarray
    residual: float
    gap: float
    degenerate: bool
    iterations: int = 0


class LanczosError(RuntimeError):
    """Lanczos did not reach the requested residual; ``best`` holds the last iterate."""

    def __init__(self, message, best: GroundStateResult):
        super().__init__(message)
        self.best = best
        self.residual = best.residual


def is_degenerate(e0, e1):
    return (e1 - e0) < DEGENERACY_REL * np.maximum(1.0, np.abs(e0))


def _finish(H, energy, state, gap, iterations=0):
    state = state / np.linalg.norm(state)
    residual = float(np.linalg.norm(H.matvec(state) - energy * state))
    gap = max(float(gap), 0.0)
    return GroundStateResult(float(energy), state, residual, gap,
                             bool(is_degenerate(energy, energy + gap)), iterations)


def _canonical_sign(v):
    # fix the arbitrary eigenvector sign: largest-magnitude amplitude positive
    k = np.argmax(np.abs(v), axis=-1)
    s = np.sign(np.take_along_axis(v, np.expand_dims(k, -1), axis=-1))
    s[s == 0] = 1.0
    return v * s


def dense_ground_state(H: HamiltonianOperator, max_sites: int = DENSE_MAX_SITES) -> GroundStateResult:
    N = H.params.N
    if N > max_sites:
        raise ValueError(f"dense diagonalization is capped at N={max_sites}, got N={N}")
    w, v = np.linalg.eigh(H.to_dense())
    gap = w[1] - w[0] if len(w) > 1 else 0.0
    return _finish(H, w[0], _canonical_sign(v[:, 0]), gap)


def start_vector(dim: int, seed: int) -> np.ndarray:
    v = np.random.default_rng(seed).standard_normal(dim)
    return v / np.linalg.norm(v)


def lanczos_ground_state(H: HamiltonianOperator, tol: float = DEFAULT_TOL,
                         max_iter: int = DEFAULT_MAX_ITER, v0=None,
                         krylov_dim: int = 100) -> GroundStateResult:
    """Lowest eigenpair by Lanczos with full reorthogonalization.

    The Krylov space is capped at ``krylov_dim`` vectors; when full the run
    restarts from the current Ritz vector. ``max_iter`` bounds the total
    number of matrix-vector products. The start vector defaults to a
    pseudo-random vector seeded from the realization seed.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    D = H.dimension
    if v0 is None:
        v0 = start_vector(D, H.realization.seed)
    x = np.array(v0, dtype=float)
    x /= np.linalg.norm(x)
    m_cap = max(2, min(krylov_dim, D))
    used = 0
    best = None
    while used < max_iter:
        m = min(m_cap, max_iter - used)
        V = np.zeros((m, D))
        alpha = np.zeros(m)
        beta = np.zeros(m)
        V[0] = x
        k = 0
        theta = s = None
        for k in range(m):
            w = H.matvec(V[k])
            used += 1
            alpha[k] = V[k] @ w
            # two passes of classical Gram-Schmidt against the whole basis
            w -= V[: k + 1].T @ (V[: k + 1] @ w)
            w -= V[: k + 1].T @ (V[: k + 1] @ w)
            b = np.linalg.norm(w)
            beta[k] = b
            if k % 10 == 9 or k == m - 1 or b < 1e-14 * max(1.0, abs(alpha[k])):
                theta, s = _tridiag_eig(alpha[: k + 1], beta[:k])
                if abs(b * s[-1, 0]) < 0.1 * tol or b < 1e-14 * max(1.0, abs(alpha[k])):
                    break
            if k + 1 < m:
                V[k + 1] = w / b
        n = k + 1
        theta, s = _tridiag_eig(alpha[:n], beta[: n - 1])
        x = s[:, 0] @ V[:n]
        gap = theta[1] - theta[0] if n > 1 else 0.0
        res = _finish(H, theta[0], x, gap, used)
        if best is None or res.residual < best.residual:
            best = res
        if res.residual <= tol:
            res.state = _canonical_sign(res.state)
            return res
        x = res.state
    raise LanczosError(
        f"Lanczos not converged after {used} matvecs (residual {best.residual:.3g} > {tol:.3g})",
        best)


def _tridiag_eig(alpha, beta):
    from scipy.linalg import eigh_tridiagonal

    if len(alpha) == 1:
        return alpha.copy(), np.ones((1, 1))
    return eigh_tridiagonal(alpha, beta)


def ground_state(H: HamiltonianOperator, method: str = "auto", tol: float = DEFAULT_TOL,
                 max_iter: int = DEFAULT_MAX_ITER) -> GroundStateResult:
    if method == "auto":
        method = "dense" if H.params.N <= DENSE_AUTO_MAX_SITES else "lanczos"
    if method == "dense":
        return dense_ground_state(H)
    if method == "lanczos":
        return lanczos_ground_state(H, tol, max_iter)
    raise ValueError(f"unknown method {method!r}")


SUBSET_MIN_DIM = 64


def _lowest_pairs(stack):
    """Lowest two eigenpairs of each matrix in a stack (all pairs if the block is small)."""
    n = stack.shape[-1]
    if n < SUBSET_MIN_DIM:
        return np.linalg.eigh(stack)
    from scipy.linalg import eigh

    w = np.empty((len(stack), 2))
    v = np.empty((len(stack), n, 2))
    for r, a in enumerate(stack):
        w[r], v[r] = eigh(a, subset_by_index=[0, 1], driver="evr", check_finite=False)
    return w, v


def batch_ground_states(params: ModelParams, J: np.ndarray, delta: np.ndarray,
                        max_bytes: float = 2e8):
    """Ground states of many small Hamiltonians at once.

    H conserves the parity of the up-spin count, so each parity block is
    diagonalized separately and the lower of the two ground states kept.
    Returns (energies, states, gaps) with states of shape (R, 2**N).
    """
    J = np.atleast_2d(J)
    delta = np.atleast_2d(delta)
    R, D = J.shape[0], params.dim
    sectors = parity_sectors(params.N)
    half = D // 2
    chunk = max(1, int(max_bytes // (8 * half * half * 2)))
    energies = np.empty(R)
    gaps = np.empty(R)
    states = np.zeros((R, D))
    for lo in range(0, R, chunk):
        hi = min(R, lo + chunk)
        evals, evecs = [], []
        for sec in sectors:
            w, v = _lowest_pairs(dense_batch(params, J[lo:hi], delta[lo:hi], sec))
            evals.append(w)
            evecs.append(v)
        both = np.sort(np.concatenate([evals[0][:, :2], evals[1][:, :2]], axis=1), axis=1)
        pick_odd = evals[1][:, 0] < evals[0][:, 0]
        energies[lo:hi] = both[:, 0]
        gaps[lo:hi] = both[:, 1] - both[:, 0]
        block = states[lo:hi]
        even = ~pick_odd
        block[np.ix_(even, sectors[0])] = evecs[0][even, :, 0]
        block[np.ix_(pick_odd, sectors[1])] = evecs[1][pick_odd, :, 0]
    return energies, _canonical_sign(states), gaps

