"""Quenched averages over coupling realizations and enhancement scores."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .eigen import (DEFAULT_MAX_ITER, DEFAULT_TOL, LanczosError, batch_ground_states,
                    is_degenerate, lanczos_ground_state, start_vector)
from .model import (CouplingRealization, DisorderCase, ModelParams, build_hamiltonian,
                    couplings_from_deviates, deviate_table, realization_seed)
from .observables import GGM_MAX_SITES, ObservableSet, default_pair, default_site, observable_arrays

log = logging.getLogger(__name__)

OBSERVABLES = ObservableSet.FIELDS
SUBSCRIPT = {"planar": "lambda", "azimuthal": "mu", "both": "lambda,mu", "ordered": "none"}
FAILED_FRACTION = 0.01


@dataclass(frozen=True)
class QuenchSettings:
    realizations: int = 5000
    master_seed: int = 0
    convergence_window: int = 500
    convergence_tol: float = 1e-3
    convergence_floor: float = 1e-4
    dense_max_sites: int = 10
    ggm_max_sites: int = GGM_MAX_SITES
    lanczos_tol: float = DEFAULT_TOL
    lanczos_max_iter: int = DEFAULT_MAX_ITER
    workers: int = 1

    def __post_init__(self):
        if self.realizations < 1:
            raise ValueError("need at least one realization")
        if self.convergence_window < 1:
            raise ValueError("convergence_window must be positive")


@dataclass
class QuenchedEstimate:
    mean: float
    stderr: float
    r_used: int
    converged: bool = True
    degenerate_count: int = 0
    failed_count: int = 0
    r_requested: int = 0

    @property
    def unreliable(self) -> bool:
        return self.failed_count > FAILED_FRACTION * max(self.r_requested, self.r_used)


@dataclass
class EnhancementRecord:
    """Enhancement scores of one grid point for one disorder variant."""

    disorder: str
    delta: dict = field(default_factory=dict)
    quenched: dict = field(default_factory=dict)
    ordered: dict = field(default_factory=dict)


def enhancement_score(q_av, q_ord: float) -> float:
    """|Q_av| - |Q_ordered|; positive means the disorder enhanced Q."""
    mean = q_av.mean if isinstance(q_av, QuenchedEstimate) else float(q_av)
    return abs(mean) - abs(q_ord)


def running_mean(values):
    values = np.asarray(values, dtype=float)
    return np.cumsum(values) / np.arange(1, len(values) + 1)


def convergence_monitor(values, settings: QuenchSettings) -> bool:
    """True when the running mean moved less than the tolerance over the last window.

    The tolerance is relative (``convergence_tol``) but never below the
    absolute ``convergence_floor``, so streams averaging to ~0 can converge.
    """
    values = np.asarray(values, dtype=float)
    values = values[np.isfinite(values)]
    W = settings.convergence_window
    if len(values) < W:
        return False
    m = running_mean(values)
    end = m[-1]
    start = m[-W - 1] if len(values) > W else values[0]
    return abs(end - start) <= max(settings.convergence_tol * abs(end), settings.convergence_floor)


def _stable_mean(x):
    # shift by the first sample so identical samples average to exactly that sample
    if len(x) == 0:
        return float("nan")
    x0 = x[0]
    return float(x0 + np.mean(x - x0))


def _estimate(values, settings, degenerate, failed, requested):
    values = np.asarray(values, dtype=float)
    ok = values[np.isfinite(values)]
    n = len(ok)
    stderr = float(np.std(ok - ok[0], ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return QuenchedEstimate(
        mean=_stable_mean(ok),
        stderr=stderr,
        r_used=n,
        converged=convergence_monitor(ok, settings) if n >= settings.convergence_window else False,
        degenerate_count=int(degenerate),
        failed_count=int(failed),
        r_requested=int(requested),
    )


def _dense_chunk(params, J, delta, site, pair, ggm_max_sites):
    energies, states, gaps = batch_ground_states(params, J, delta)
    vals = observable_arrays(states, params, site, pair, ggm_max_sites)
    degenerate = is_degenerate(energies, energies + gaps)
    return vals, degenerate, np.zeros(len(energies), dtype=bool)


def _solve_one(H, tol, max_iter):
    try:
        return lanczos_ground_state(H, tol, max_iter)
    except LanczosError:
        # one retry from an independent start vector
        v0 = start_vector(H.dimension, H.realization.seed ^ 0x5EED)
        return lanczos_ground_state(H, tol, max_iter, v0=v0)


def _lanczos_chunk(params, J, delta, seeds, site, pair, tol, max_iter, ggm_max_sites):
    R = len(seeds)
    vals = {k: np.full(R, np.nan) for k in OBSERVABLES}
    degenerate = np.zeros(R, dtype=bool)
    failed = np.zeros(R, dtype=bool)
    block = max(1, (1 << 22) // params.dim)
    rows, states = [], []

    def flush():
        if rows:
            out = observable_arrays(np.array(states), params, site, pair, ggm_max_sites)
            for k in OBSERVABLES:
                vals[k][rows] = out[k]
            rows.clear()
            states.clear()

    for r, seed in enumerate(seeds):
        H = build_hamiltonian(params, CouplingRealization(J[r], delta[r], r, int(seed)))
        try:
            gs = _solve_one(H, tol, max_iter)
        except LanczosError as err:
            log.warning("realization %d discarded: %s", r, err)
            failed[r] = True
            continue
        degenerate[r] = gs.degenerate
        rows.append(r)
        states.append(gs.state)
        if len(rows) >= block:
            flush()
    flush()
    return vals, degenerate, failed


def _solve_couplings(params, J, delta, seeds, settings, site, pair):
    if params.N <= settings.dense_max_sites:
        return _dense_chunk(params, J, delta, site, pair, settings.ggm_max_sites)
    return _lanczos_chunk(params, J, delta, seeds, site, pair, settings.lanczos_tol,
                          settings.lanczos_max_iter, settings.ggm_max_sites)


def _merge(parts):
    vals = {k: np.concatenate([p[0][k] for p in parts]) for k in parts[0][0]}
    return vals, np.concatenate([p[1] for p in parts]), np.concatenate([p[2] for p in parts])


def realization_values(params: ModelParams, case: DisorderCase, settings: QuenchSettings,
                       site=None, pair=None):
    """Per-realization observables, in realization-index order.

    Returns (values dict of arrays, degenerate flags, failed flags).
    """
    R = settings.realizations
    z = deviate_table(settings.master_seed, 0, R, params.n_bonds)
    J, delta = couplings_from_deviates(case, params.h, z)
    if params.N <= settings.dense_max_sites:
        seeds = np.zeros(R, dtype=np.uint64)
    else:
        seeds = np.array([realization_seed(settings.master_seed, r) for r in range(R)],
                         dtype=np.uint64)
    if settings.workers <= 1:
        return _solve_couplings(params, J, delta, seeds, settings, site, pair)
    bounds = np.linspace(0, R, settings.workers + 1).astype(int)
    with ProcessPoolExecutor(settings.workers) as pool:
        futures = [pool.submit(_solve_couplings, params, J[a:b], delta[a:b], seeds[a:b],
                               settings, site, pair)
                   for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
        # reduce in realization order regardless of completion order
        return _merge([f.result() for f in futures])


def quenched_average(params: ModelParams, case: DisorderCase, settings: QuenchSettings,
                     site=None, pair=None) -> dict:
    """Quenched mean and standard error of every observable over the realizations."""
    R = settings.realizations
    if case.is_trivial and params.N > settings.dense_max_sites:
        # every realization is the clean chain; the iterative solver would only
        # add start-vector noise
        ref = ordered_reference(params, case.lam, case.mu, settings, site, pair)
        return {k: QuenchedEstimate(getattr(ref, k), 0.0, R, True, 0, 0, R)
                for k in OBSERVABLES}
    vals, degenerate, failed = realization_values(params, case, settings, site, pair)
    n_deg = int(degenerate.sum())
    n_fail = int(failed.sum())
    out = {k: _estimate(v, settings, n_deg, n_fail, R) for k, v in vals.items()}
    if n_fail > FAILED_FRACTION * R:
        log.warning("%d of %d realizations failed; estimate unreliable", n_fail, R)
    return out


def ordered_reference(params: ModelParams, lam: float, mu: float,
                      settings: QuenchSettings | None = None, site=None, pair=None) -> ObservableSet:
    """Observables of the clean chain with J = lam*h and delta = mu*h on every bond."""
    settings = settings or QuenchSettings(realizations=1)
    nb = params.n_bonds
    J = np.full((1, nb), lam * params.h)
    delta = np.full((1, nb), mu * params.h)
    seeds = np.array([realization_seed(settings.master_seed, 0)], dtype=np.uint64)
    vals, degenerate, failed = _solve_couplings(params, J, delta, seeds, settings, site, pair)
    if failed[0]:
        raise RuntimeError("ordered reference ground state did not converge")
    site = default_site(params.N) if site is None else site
    pair = default_pair(params.N) if pair is None else tuple(pair)
    return ObservableSet(**{k: float(v[0]) for k, v in vals.items()}, site=site, pair=pair)


def enhancement_record(quenched: dict, ordered: ObservableSet, disorder: str) -> EnhancementRecord:
    rec = EnhancementRecord(SUBSCRIPT.get(disorder, disorder))
    for k, est in quenched.items():
        q_ord = getattr(ordered, k)
        rec.quenched[k] = est
        rec.ordered[k] = q_ord
        rec.delta[k] = enhancement_score(est, q_ord)
    return rec
