import numpy as np
import pytest
from scipy import stats

from artifact import ballistic_gas as bg
from artifact.cloning import run_population
from artifact.errors import DomainError


def test_free_particle_is_exact():
    rng = np.random.default_rng(0)
    s = bg.GasState(10.0, [1.0], [0.3])
    for _ in range(100):
        s = bg.evolve_gas(s, 0.05, rng)
    assert s.x[0] == pytest.approx((1.0 + 0.3 * 5.0) % 10.0, abs=1e-12)
    assert s.time == pytest.approx(5.0)


def test_wraps_around_ring():
    rng = np.random.default_rng(0)
    s = bg.GasState(10.0, [9.9], [1.0])
    s = bg.evolve_gas(s, 0.2, rng)
    assert s.x[0] == pytest.approx(0.1)


def test_two_particles_collide_once():
    rng = np.random.default_rng(3)
    s = bg.GasState(10.0, [1.0, 2.0], [0.5, -0.5])
    for _ in range(40):
        s = bg.evolve_gas(s, 0.05, rng)
    assert s.n_collisions == 1
    assert not np.allclose(np.sort(s.v), [-0.5, 0.5])
    assert np.all(np.abs(s.v) <= 1)


def test_particle_number_conserved_without_bath():
    rng = np.random.default_rng(4)
    x = np.sort(rng.uniform(0, 30, 15))
    s = bg.GasState(30.0, x, rng.uniform(-1, 1, 15))
    for _ in range(400):
        s = bg.evolve_gas(s, 0.05, rng)
        assert s.n == 15
        assert np.all(np.diff(s.x) >= 0)
        assert np.all((s.x >= 0) & (s.x < 30))


def test_state_validation():
    with pytest.raises(DomainError):
        bg.GasState(5.0, [6.0], [0.0])
    with pytest.raises(DomainError):
        bg.GasState(5.0, [1.0], [1.5])
    with pytest.raises(DomainError):
        bg.TiltParams(-1.0)


def test_tilt_weight():
    p = bg.TiltParams(0.5, 1.0)
    assert bg.tilt_weight(bg.GasState(10.0, [], []), 0.1, p) == 0.0
    assert bg.tilt_weight(bg.GasState(10.0, [0.2], [0.0]), 0.1, bg.TiltParams(0.0)) == 0.0
    assert bg.tilt_weight(bg.GasState(10.0, [0.2], [0.0]), 0.1, p) == pytest.approx(-0.05)
    # periodic wrap, open window
    assert bg.tilt_weight(bg.GasState(10.0, [9.7], [0.0]), 0.1, p) == pytest.approx(-0.05)
    assert bg.tilt_weight(bg.GasState(10.0, [0.5], [0.0]), 0.1, p) == 0.0


def test_bath_fixed_point_and_poisson_counts():
    proc = bg.GasProcess(40.0, bg.TiltParams(0.0, 1.0, 0.2))
    state = proc.initial(400, 1)
    for step in range(100):
        proc.advance(state, step, 1)
    n = state["n"]
    assert n.mean() == pytest.approx(20.0, abs=3 * np.sqrt(20.0 / 400))
    # occupation of a subinterval of length 6 is Poisson with mean 3
    X = state["x"]
    counts = np.array([np.count_nonzero(X[c, : n[c]] < 6.0) for c in range(400)])
    k = np.arange(0, 8)
    observed = np.array([np.count_nonzero(counts == v) for v in k[:-1]] + [np.count_nonzero(counts >= 7)])
    pmf = stats.poisson.pmf(k[:-1], 3.0)
    expected = 400 * np.append(pmf, 1 - pmf.sum())
    assert stats.chisquare(observed, expected).pvalue > 0.01


def test_zero_tilt_has_zero_rate():
    est = bg.qss_rate_gas(bg.TiltParams(0.0, 1.0, 0.01), 30.0, 50, 20.0, seed=0)
    assert np.all(est.lambda_t == 0.0)
    assert est.lambda_qss == 0.0


def test_seed_determinism():
    p = bg.TiltParams(0.5, 1.0, 0.01)
    a = bg.qss_rate_gas(p, 30.0, 100, 20.0, seed=2).lambda_t
    b = bg.qss_rate_gas(p, 30.0, 100, 20.0, seed=2).lambda_t
    assert np.array_equal(a, b)


def test_noiseless_rate_decays():
    est = bg.qss_rate_gas(bg.TiltParams(0.5, 1.0, 0.0), 60.0, 500, 300.0, seed=1)
    lam = est.lambda_t
    early = lam[20:40].mean()
    late = lam[200:300].mean()
    assert late < 0.7 * early


@pytest.mark.slow
def test_time_step_invariance():
    p = bg.TiltParams(0.5, 1.0, 0.016)
    a = bg.qss_rate_gas(p, 60.0, 1000, 800.0, seed=1, dt=0.05, burn_in=400.0)
    b = bg.qss_rate_gas(p, 60.0, 1000, 800.0, seed=1, dt=0.025, burn_in=400.0)
    assert abs(a.lambda_qss - b.lambda_qss) < 3 * np.hypot(a.stderr, b.stderr)


def test_barrier_must_hold_whole_substeps():
    with pytest.raises(DomainError):
        bg.GasProcess(10.0, bg.TiltParams(0.5), dt=0.3, barrier=1.0)


def test_process_selects_copies():
    proc = bg.GasProcess(20.0, bg.TiltParams(0.5, 1.0, 0.05))
    out = run_population(proc, 50, 10.0, seed=0, burn_in=0.0)
    assert out.state["x"].shape == (50, proc.capacity)
