import numpy as np
import pytest

from artifact import kernels_volterra as kv
from artifact import mft_stationary as mft
from artifact.errors import DomainError
from artifact.grids import GridSpec


@pytest.fixture(scope="module")
def sol():
    return mft.solve_stationary_void(0.5)


def test_rejects_zero_tilt():
    with pytest.raises(DomainError):
        mft.solve_stationary_void(0.0)


def test_rejects_short_grid():
    with pytest.raises(DomainError):
        mft.solve_stationary_void(0.5, GridSpec(8.0, 800))


def test_boundary_data_and_residual(sol):
    assert sol.rho_hat[0] == 0.0
    assert sol.pi_hat[0] == -0.5
    assert abs(sol.rho_hat[-1] - 0.5) < 1e-6
    assert abs(sol.pi_hat[-1]) < 1e-6
    assert sol.residual_norm < 1e-9
    h = sol.z[1] - sol.z[0]
    inner = mft._pack(sol)
    res = mft.saddle_residual(inner, 0.5, 0.0, h, sol.z.size)
    assert np.max(np.abs(res)) < 1e-9


def test_profile_monotone(sol):
    assert np.all(np.diff(sol.rho_hat) >= 0)


def test_far_field_decay(sol):
    k_rho, k_pi = mft.far_field_decay(sol)
    assert k_rho == pytest.approx(1.0, abs=0.05)
    assert k_pi == pytest.approx(1.0, abs=0.05)


def test_hat_lambda_value_and_grid_convergence(sol):
    hl = mft.rate_hat_lambda(sol)
    assert hl == pytest.approx(0.2075, abs=5e-4)
    fine = mft.solve_stationary_void(0.5, mft.DEFAULT_GRID.refined())
    assert abs(mft.rate_hat_lambda(fine) - hl) < 1e-6


def test_hat_lambda_vanishes_continuously():
    vals = [mft.rate_hat_lambda(mft.solve_stationary_void(s)) for s in (0.05, 0.02)]
    assert vals[1] < vals[0] < 0.05
    assert vals[1] > 0


def test_hat_lambda_increasing_in_s():
    vals = [mft.rate_hat_lambda(mft.solve_stationary_void(s)) for s in np.linspace(0.1, 1.0, 5)]
    assert np.all(np.diff(vals) > 0)


def test_comoving_zero_drift_matches_static(sol):
    com = mft.solve_comoving_void(0.5, 0.0, start=sol)
    assert np.max(np.abs(com.rho_hat - sol.rho_hat)) < 1e-8
    assert np.max(np.abs(com.pi_hat - sol.pi_hat)) < 1e-8
    assert mft.rate_phi(com) == pytest.approx(mft.rate_hat_lambda(sol), abs=1e-12)


def test_comoving_excess_even_and_nonnegative(sol):
    ex = mft.phi_symmetric_excess(0.5, [0.2, 0.5, 1.0], base=sol)
    assert np.all(ex >= 0)
    assert np.all(np.diff(ex) > 0)


@pytest.fixture(scope="module")
def phi_path(sol):
    vals = [mft.rate_phi(sol)]
    cur = sol
    for u in np.arange(0.1, 1.01, 0.1):
        cur = mft.solve_comoving_void(0.5, u, start=cur)
        vals.append(mft.rate_phi(cur))
    return np.array(vals)


def test_comoving_path_has_no_jumps(phi_path):
    assert np.all(np.isfinite(phi_path))
    steps = np.diff(phi_path)
    # smooth branch: consecutive increments agree to within 10%
    assert np.all(np.abs(steps[1:] / steps[:-1] - 1) < 0.1)


@pytest.mark.xfail(strict=True, reason="linear drift term makes each 0.1 step about 5.4%")
def test_comoving_step_below_five_percent(phi_path):
    assert np.all(np.abs(np.diff(phi_path)) < 0.05 * np.abs(phi_path[:-1]))


def test_comoving_rejects_large_drift():
    with pytest.raises(DomainError):
        mft.solve_comoving_void(0.5, 2.5)


def test_comoving_deff_cross_method(sol):
    a = mft.curvature_a(0.5, base=sol)
    d = mft.deff_comoving(a, 1.0, 0.04)
    closed = kv.deff_weak_noise(kv.KernelParams(1.0, 0.04, 0.5))
    assert abs(d / closed - 1) < 0.15


def test_physical_profile_scaling(sol):
    x = np.array([0.0, 5.0, 100.0])
    out = mft.physical_profile(sol, x, D=1.0, gamma=0.04)
    assert out[0] == 0.0
    assert out[1] == pytest.approx(np.interp(1.0, sol.z, sol.rho_hat))
    assert out[2] == 0.5
