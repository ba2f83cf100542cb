import numpy as np
import pytest
from scipy import special

from artifact import spectral as sp
from artifact.errors import CapacityError, DomainError


def test_two_site_ring_spectrum():
    vals = np.linalg.eigvalsh(sp.build_generator(sp.GeneratorSpec(2)).toarray())
    assert np.allclose(vals, [0, 0, 0, 1], atol=1e-12)


@pytest.mark.parametrize("delta,gamma", [(0.0, 0.0), (0.4, 0.1), (-0.6, 0.3)])
def test_probability_conserved(delta, gamma):
    H = sp.build_generator(sp.GeneratorSpec(6, delta, gamma)).toarray()
    assert np.max(np.abs(H.sum(axis=0))) < 1e-12
    assert np.all(np.diag(H) >= 0)
    off = H - np.diag(np.diag(H))
    assert np.all(off <= 1e-15)


def test_kls_rates():
    # hop 10 -> 01 between neighbours, with left/right environment
    L = 4
    for left, right, factor in [(0, 0, 1.4), (1, 1, 0.6), (1, 0, 1.0), (0, 1, 1.0)]:
        H = sp.build_generator(sp.GeneratorSpec(L, 0.4, periodic=False)).toarray()
        # sites 0..3, hop between 1 and 2
        src = (left << 3) | (1 << 2) | (0 << 1) | right
        dst = (left << 3) | (0 << 2) | (1 << 1) | right
        assert -H[dst, src] == pytest.approx(sp.HOP_RATE * factor)


def test_diffusivity():
    assert sp.diffusivity(0.5, 0.4) == pytest.approx(0.25)
    assert sp.diffusivity(0.0, 0.4) == pytest.approx(0.35)
    assert sp.diffusivity(0.3, 0.0) == pytest.approx(0.25)


def test_one_magnon_band():
    spec = sp.GeneratorSpec(12, 0.0, 0.05)
    band = sp.one_magnon_band(spec)
    k = 2 * np.pi * np.arange(12) / 12
    assert np.max(np.abs(band[:, 0] - (np.sin(k / 2) ** 2 + 0.05))) < 1e-10


def test_magnon_number_conserved_without_interaction():
    assert sp.magnon_mixing_norm(sp.GeneratorSpec(8, 0.0, 0.2)) < 1e-12
    assert sp.magnon_mixing_norm(sp.GeneratorSpec(8, 0.4, 0.2)) > 1e-3


def test_interacting_leading_mode_is_multi_magnon():
    tab = sp.leading_eigs_by_momentum(sp.GeneratorSpec(12, 0.4, 0.05))
    big_k = tab.k >= np.pi / 2
    assert np.all(tab.n_magnon[big_k] > 1.0)
    assert len(tab.rows()) == tab.k.size


def test_cascade_examples():
    assert sp.cascade_gap(np.pi, 0.25) == (1, pytest.approx(1.25))
    n, rate = sp.cascade_gap(0.5, 1e-4, D=1.0)
    assert n == 50
    n, rate = sp.cascade_gap(0.1, 1e-4, D=1.0, n_max=1000)
    assert n == 10
    assert rate == pytest.approx(2 * 0.1 * np.sqrt(1e-4))
    with pytest.raises(DomainError):
        sp.cascade_gap(0.0, 0.1)


def test_airy_levels():
    vals, _, _ = sp.airy_levels(2)
    assert vals[0] == pytest.approx(-special.ai_zeros(1)[1][0], abs=1e-6)
    assert vals[1] == pytest.approx(-special.ai_zeros(1)[0][0], abs=1e-6)


def test_airy_ground_state_parity_and_domain():
    eps, z, psi = sp.airy_ground_state()
    assert np.max(np.abs(psi - psi[::-1])) < 1e-8
    assert np.all(psi > 0)
    wide, _, _ = sp.airy_ground_state(half_width=30.0)
    assert abs(wide - eps) < 1e-6


def test_wedge_scaling():
    l1, m1 = sp.wedge_localization(sp.WedgeProblem(1.0, 1.0))
    assert l1 == pytest.approx(1.0)
    assert m1 == pytest.approx(sp.airy_second_moment(), rel=1e-4)
    l2, m2 = sp.wedge_localization(sp.WedgeProblem(2.0, 1.0 / 4))
    assert l2 == pytest.approx(2.0)
    assert m2 == pytest.approx(4.0 * m1, rel=1e-4)
    assert sp.wedge_slope(0.5, 0.02, 4.0) == pytest.approx(0.0025)


def test_spec_validation():
    with pytest.raises(CapacityError):
        sp.GeneratorSpec(17)
    with pytest.raises(DomainError):
        sp.GeneratorSpec(6, 1.0)
    with pytest.raises(DomainError):
        sp.WedgeProblem(0.0, 1.0)


def test_cascade_reference_point():
    n, rate = sp.cascade_gap(0.5, 0.01)
    assert n == 3
    assert rate == pytest.approx(0.05079, abs=1e-5)
    n1, rate1 = sp.cascade_gap(0.5, 0.01, n_max=1)
    assert (n1, rate1) == (1, pytest.approx(np.sin(0.25) ** 2 + 0.01))
    assert sp.cascade_gap(0.3, 0.03)[0] == 1


def test_cascade_first_split_threshold():
    # n = 2 beats n = 1 exactly when 2 sin^2(k/4) cos(k/2) > gamma
    g = 1e-3
    k_star = 2 * np.sqrt(2 * g)
    assert sp.cascade_gap(0.98 * k_star, g)[0] == 1
    assert sp.cascade_gap(1.02 * k_star, g)[0] == 2
