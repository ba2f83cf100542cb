import warnings

import mpmath
import numpy as np
import pytest

from artifact import aging_saddle as ag
from artifact.errors import DomainError
from artifact.grids import GridSpec


@pytest.fixture(scope="module")
def sol():
    return ag.solve_omega(0.5)


def test_untilted_solution_vanishes():
    s0 = ag.solve_omega(0.0)
    assert np.max(np.abs(s0.omega)) == 0.0
    with pytest.raises(DomainError):
        ag.phi_profile(s0)


def test_residual_and_sign(sol):
    assert sol.residual_norm < 1e-10
    assert sol.omega[0] < 0
    assert np.max(np.abs(ag.omega_residual(sol.omega, sol.u, 0.5))) < 1e-10
    assert sol.omega[0] == pytest.approx(-0.242588, abs=1e-5)


def test_tail_is_gaussian(sol):
    half = sol.u >= sol.u[-1] / 2
    bound = np.exp(-0.25 * sol.u[half] ** 2)
    assert np.all(np.abs(sol.omega[half]) <= bound)


def test_residual_converges_second_order(sol):
    # residual of the coarse solution evaluated against a refined quadrature
    fine_grid = GridSpec(12.0, 2 * (ag.DEFAULT_GRID.n_points - 1) + 1)
    fine = ag.solve_omega(0.5, fine_grid)
    coarse_on_fine = np.interp(fine.u, sol.u, sol.omega)
    coarser = ag.solve_omega(0.5, GridSpec(12.0, (ag.DEFAULT_GRID.n_points - 1) // 2 + 1))
    coarser_on_fine = np.interp(fine.u, coarser.u, coarser.omega)
    e1 = np.max(np.abs(ag.omega_residual(coarser_on_fine, fine.u, 0.5)))
    e2 = np.max(np.abs(ag.omega_residual(coarse_on_fine, fine.u, 0.5)))
    assert e1 / e2 >= 4.0 * 0.9


def test_rejects_bad_inputs():
    with pytest.raises(DomainError):
        ag.solve_omega(-0.1)
    with pytest.raises(DomainError):
        ag.solve_omega(0.5, GridSpec(8.0, 800))


def test_phi_endpoints_and_monotone(sol):
    prof = ag.phi_profile(sol)
    assert prof.phi[0] == 0.0
    assert prof.phi[-1] == pytest.approx(0.5, abs=1e-6)
    assert np.all(np.diff(prof.phi) >= 0)


def test_phi_invariant_under_domain_extension(sol):
    prof = ag.phi_profile(sol)
    h = sol.u[1] - sol.u[0]
    n_wide = int(round(16.0 / h)) + 1
    wide = ag.phi_profile(ag.solve_omega(0.5, GridSpec((n_wide - 1) * h, n_wide)))
    assert np.max(np.abs(np.interp(prof.u, wide.u, wide.phi) - prof.phi)) < 1e-8


def test_cgf_values():
    assert ag.cgf_hat_lambda0(0.0) == 0.0
    z = 1 - np.exp(-1.0)
    expected = float(mpmath.polylog(1.5, z)) / (2 * np.sqrt(np.pi))
    assert ag.cgf_hat_lambda0(0.5) == pytest.approx(expected, abs=1e-12)
    assert ag.cgf_hat_lambda0(0.5) == pytest.approx(0.2426, abs=1e-4)
    assert ag.cgf_hat_lambda0(np.inf) == pytest.approx(0.73694, abs=1e-5)


def test_cgf_monotone_bounded():
    ss = np.linspace(0.0, 2.2, 10)
    vals = np.array([ag.cgf_hat_lambda0(s) for s in ss])
    assert np.all(np.diff(vals) > 0)
    assert np.all(np.diff(vals, 2) < 0)
    assert vals[-1] < ag.cgf_hat_lambda0(np.inf)


def test_cgf_warns_near_one_and_rejects_negative():
    with pytest.warns(RuntimeWarning):
        ag.cgf_hat_lambda0(2.5)
    with pytest.raises(DomainError):
        ag.cgf_hat_lambda0(-1.0)


def test_polylog_series_against_mpmath():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        for z in (0.1, 0.5, 0.9):
            assert ag.polylog_series(1.5, z) == pytest.approx(float(mpmath.polylog(1.5, z)), abs=1e-12)
