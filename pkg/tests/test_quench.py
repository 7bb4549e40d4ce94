import numpy as np
import pytest

from xyzglass.model import Boundary, Disorder, DisorderCase, ModelParams
from xyzglass.quench import (OBSERVABLES, QuenchSettings, QuenchedEstimate, convergence_monitor,
                             enhancement_record, enhancement_score, ordered_reference,
                             quenched_average, realization_values)

P6 = ModelParams(6, 0.7, 0.8)


def test_enhancement_score_sign():
    assert enhancement_score(QuenchedEstimate(-0.3, 0.0, 1), 0.2) == pytest.approx(0.1)
    assert enhancement_score(0.1, -0.2) == pytest.approx(-0.1)


def test_convergence_monitor():
    s = QuenchSettings(realizations=100, convergence_window=50, convergence_tol=1e-3)
    assert convergence_monitor(np.full(100, 0.3), s)
    assert not convergence_monitor(np.arange(100.0), s)
    assert not convergence_monitor(np.ones(10), s)
    # a zero-mean stream converges through the absolute floor
    alt = np.tile([1e-5, -1e-5], 50)
    assert convergence_monitor(alt, s)


def test_zero_variance_collapse():
    s = QuenchSettings(realizations=200, convergence_window=50)
    case = DisorderCase(Disorder.PLANAR, 0.7, -1.1, sigma_J=0.0)
    q = quenched_average(P6, case, s)
    ref = ordered_reference(P6, 0.7, -1.1, s)
    rec = enhancement_record(q, ref, "planar")
    for k in OBSERVABLES:
        assert q[k].mean == getattr(ref, k)
        assert q[k].stderr == 0.0
        assert rec.delta[k] == 0.0


def test_lanczos_path_matches_dense_path():
    p = ModelParams(6, 0.7, 0.8, Boundary.OPEN)
    case = DisorderCase(Disorder.BOTH, 0.5, -1.0)
    dense = quenched_average(p, case, QuenchSettings(realizations=30, convergence_window=10))
    iterative = quenched_average(p, case, QuenchSettings(realizations=30, convergence_window=10,
                                                         dense_max_sites=4))
    for k in OBSERVABLES:
        assert iterative[k].mean == pytest.approx(dense[k].mean, abs=1e-9)


def test_workers_do_not_change_results():
    case = DisorderCase(Disorder.BOTH, 0.5, -1.0)
    a = realization_values(P6, case, QuenchSettings(realizations=40, convergence_window=10))
    b = realization_values(P6, case, QuenchSettings(realizations=40, convergence_window=10,
                                                    workers=3))
    for k in OBSERVABLES:
        assert np.array_equal(a[0][k], b[0][k])


def test_mirror_symmetry_of_mz():
    s = QuenchSettings(realizations=2000, convergence_window=500, master_seed=5)
    plus = quenched_average(P6, DisorderCase(Disorder.PLANAR, 0.6, -1.1), s)["m_z"]
    minus = quenched_average(P6, DisorderCase(Disorder.PLANAR, -0.6, -1.1), s)["m_z"]
    assert abs(plus.mean - minus.mean) <= 2 * np.hypot(plus.stderr, minus.stderr)


def test_stderr_scaling():
    case = DisorderCase(Disorder.BOTH, 0.7, -1.1)
    small = quenched_average(P6, case, QuenchSettings(realizations=1000, convergence_window=100,
                                                      master_seed=9))
    big = quenched_average(P6, case, QuenchSettings(realizations=2000, convergence_window=100,
                                                    master_seed=9))
    ratio = small["ggm"].stderr / big["ggm"].stderr
    assert 1.25 <= ratio <= 1.60


def test_more_realizations_agree():
    case = DisorderCase(Disorder.BOTH, 0.7, -1.1)
    a = quenched_average(P6, case, QuenchSettings(realizations=5000, master_seed=1))["ggm"]
    b = quenched_average(P6, case, QuenchSettings(realizations=8000, master_seed=1))["ggm"]
    assert abs(a.mean - b.mean) <= 3 * np.hypot(a.stderr, b.stderr)
    assert a.r_used == 5000 and a.converged


def test_ggm_disabled_above_cap():
    s = QuenchSettings(realizations=5, convergence_window=5, ggm_max_sites=5)
    q = quenched_average(P6, DisorderCase(Disorder.BOTH, 0.5, -1.0), s)
    assert np.isnan(q["ggm"].mean)
    assert np.isfinite(q["ggm2"].mean)
