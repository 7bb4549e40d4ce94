import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from xyzglass.model import Boundary, CouplingRealization, ModelParams, build_hamiltonian
from xyzglass.eigen import dense_ground_state
from xyzglass.observables import (bipartition_count, bipartition_iterator, concurrence, correlator,
                                  ggm, ggm_approx, magnetization, magnetization_z,
                                  observable_arrays, observable_set, reduced_density_matrix)
from test_model import D6, J6

# oracle values for the frozen N=6 realization, site 3 and pair (2, 3)
FROZEN = {"m_z": 0.9942993948565725, "t_xx": -0.05952659809081518, "t_yy": 0.05718900919668393,
          "t_zz": 0.9814663632264109, "concurrence": 0.05078210996963024,
          "ggm": 0.0009249789398626529}


def _random_state(N, rng):
    v = rng.normal(size=2**N) + 1j * rng.normal(size=2**N)
    return v / np.linalg.norm(v)


def test_frozen_observables():
    p = ModelParams(6, 0.7, 0.8)
    gs = dense_ground_state(build_hamiltonian(p, CouplingRealization(np.array(J6), np.array(D6))))
    obs = observable_set(gs.state, p, 3, (2, 3)).as_dict()
    for k, v in FROZEN.items():
        assert obs[k] == pytest.approx(v, abs=1e-10), k


def test_rdm_matches_explicit_sum():
    rng = np.random.default_rng(0)
    psi = _random_state(5, rng)
    for keep in [(0,), (3,), (1, 4), (4, 1), (0, 2, 3)]:
        ours = reduced_density_matrix(psi, keep).matrix
        assert np.allclose(ours, oracles.partial_trace(psi, keep, 5), atol=1e-13)


def test_product_up_state():
    psi = oracles.ket("1111")
    assert magnetization_z(psi, 2) == pytest.approx(1.0)
    assert ggm(psi) == pytest.approx(0.0, abs=1e-12)
    assert concurrence(reduced_density_matrix(psi, (0, 1))) == pytest.approx(0.0, abs=1e-12)


def test_site_ordering():
    psi = oracles.ket("1000")
    assert magnetization_z(psi, 0) == 1.0
    assert magnetization_z(psi, 1) == -1.0
    assert correlator(psi, 0, 1) == -1.0


def test_two_qubit_measures():
    assert concurrence(np.outer(oracles.bell(), oracles.bell())) == pytest.approx(1.0, abs=1e-10)
    assert concurrence(oracles.werner(0.9)) == pytest.approx(0.85, abs=1e-10)
    assert concurrence(oracles.werner(0.2)) == 0.0


def test_concurrence_rejects_non_psd():
    with pytest.raises(ValueError):
        concurrence(np.diag([1.2, -0.2, 0.0, 0.0]))


def test_concurrence_matches_nonhermitian_formula():
    rng = np.random.default_rng(1)
    for _ in range(20):
        psi = _random_state(4, rng)
        rho = reduced_density_matrix(psi, (1, 2)).matrix
        assert concurrence(rho) == pytest.approx(oracles.concurrence(rho), abs=1e-9)


def test_multipartite_values():
    assert ggm(oracles.ghz(3)) == pytest.approx(0.5, abs=1e-10)
    assert ggm(oracles.w_state(3)) == pytest.approx(1 / 3, abs=1e-10)
    assert ggm(oracles.ket("010")) == pytest.approx(0.0, abs=1e-10)


def test_ggm_matches_all_subsets():
    rng = np.random.default_rng(2)
    for N in (3, 4, 5):
        psi = _random_state(N, rng)
        assert ggm(psi) == pytest.approx(oracles.ggm(psi, N), abs=1e-12)


def test_bipartitions():
    assert bipartition_count(8, deduplicate=False) == 162
    assert bipartition_count(8) == 127
    assert len(list(bipartition_iterator(8))) == 127
    assert len(list(bipartition_iterator(8, deduplicate=False))) == 162
    assert bipartition_count(5) == 15


def test_ggm_cap():
    with pytest.raises(ValueError):
        ggm(np.ones(2**15) / 2**7.5)


def test_ggm_approx_upper_bound():
    rng = np.random.default_rng(3)
    p = ModelParams(8, 0.7, 0.8)
    states = np.array([_random_state(8, rng).real for _ in range(10)])
    states /= np.linalg.norm(states, axis=1, keepdims=True)
    assert np.all(ggm_approx(states, p) >= ggm(states) - 1e-12)


def test_batched_equals_looped():
    rng = np.random.default_rng(4)
    p = ModelParams(5, 0.7, 0.8)
    states = np.array([_random_state(5, rng) for _ in range(4)])
    batched = observable_arrays(states, p, 2, (1, 2))
    for r in range(4):
        single = observable_set(states[r], p, 2, (1, 2)).as_dict()
        for k, v in single.items():
            assert batched[k][r] == pytest.approx(v, abs=1e-13)


def test_observable_set_needs_bond():
    with pytest.raises(ValueError):
        observable_set(oracles.ket("0000"), ModelParams(4, 0.7, 0.8, Boundary.OPEN), 0, (0, 2))


@settings(max_examples=30, deadline=None)
@given(N=st.integers(2, 6), seed=st.integers(0, 2**32 - 1))
def test_rdm_is_a_state(N, seed):
    psi = _random_state(N, np.random.default_rng(seed))
    for sites in [(0,), (N - 1, 0)] if N > 2 else [(0,), (1,)]:
        rho = reduced_density_matrix(psi, sites).matrix
        assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(rho, rho.conj().T)
        assert np.linalg.eigvalsh(rho).min() > -1e-12
    assert 0.0 <= ggm(psi) <= 0.5 + 1e-12
    assert -1 - 1e-12 <= magnetization(psi, 0, "x") <= 1 + 1e-12
