import math

import numpy as np
import pytest

from tiltspec.model import (
    SystemConfig,
    analytic_field_free_level,
    au_to_tesla,
    exciton_gaas,
    hartree_to_mev,
    hydrogen_2d,
    mev_to_hartree,
    preset_system,
    scalar_potential,
    tesla_to_au,
    zeeman_coefficient,
)


def test_mass_fractions_sum_to_one():
    cfg = hydrogen_2d()
    assert cfg.mu1 + cfg.mu2 == pytest.approx(1.0, abs=1e-15)
    assert cfg.m_r == pytest.approx(cfg.m1 * cfg.m2 / (cfg.m1 + cfg.m2), rel=1e-15)


def test_presets():
    h = hydrogen_2d()
    assert h.m1 == pytest.approx(1836.15267)
    assert h.m2 == 1.0
    assert h.epsilon == 1.0
    x = exciton_gaas()
    assert (x.m1, x.m2, x.epsilon) == (0.18, 0.067, 12.1)
    assert preset_system("hydrogen2d").m1 == h.m1
    with pytest.raises(ValueError):
        preset_system("positronium")


@pytest.mark.parametrize("kwargs", [
    dict(m1=-1.0, m2=1.0),
    dict(m1=1.0, m2=0.0),
    dict(m1=1.0, m2=1.0, epsilon=0.5),
    dict(m1=1.0, m2=1.0, B=-0.1),
    dict(m1=1.0, m2=1.0, alpha=2.0),
])
def test_invalid_configs_rejected(kwargs):
    with pytest.raises(ValueError):
        SystemConfig(**kwargs)


def test_field_free_coulomb_value():
    cfg = hydrogen_2d(B=0.0)
    assert scalar_potential(1.0, 0.123, cfg) == pytest.approx(-1.0, abs=1e-15)


def test_inplane_field_along_x_is_pure_coulomb():
    # at alpha=pi/2 the oscillator term vanishes along phi=0
    cfg = hydrogen_2d(B=0.5, alpha=math.pi / 2)
    for rho in (0.3, 1.0, 7.5):
        assert scalar_potential(rho, 0.0, cfg) == pytest.approx(-1.0 / rho, abs=1e-14)


def test_scalar_potential_hand_value():
    # independent evaluation: 0.0625/(2 m_r) - 1 at rho=1, B=0.5, alpha=0
    cfg = hydrogen_2d(B=0.5, alpha=0.0)
    assert scalar_potential(1.0, math.pi / 2, cfg) == pytest.approx(-0.96873298, abs=1e-8)


def test_scalar_potential_rejects_origin():
    cfg = hydrogen_2d()
    with pytest.raises(ValueError):
        scalar_potential(0.0, 0.0, cfg)
    with pytest.raises(ValueError):
        scalar_potential(-1.0, 0.0, cfg)


def test_scalar_potential_symmetries():
    cfg = hydrogen_2d(B=1.3, alpha=0.7)
    rho = np.array([0.5, 2.0, 11.0])
    phi = np.linspace(-3.0, 3.0, 17)
    v = scalar_potential(rho[:, None], phi[None, :], cfg)
    v_per = scalar_potential(rho[:, None], phi[None, :] + 2 * math.pi, cfg)
    v_neg = scalar_potential(rho[:, None], -phi[None, :], cfg)
    v_mir = scalar_potential(rho[:, None], math.pi - phi[None, :], cfg)
    assert np.allclose(v, v_per, atol=1e-13)
    assert np.allclose(v, v_neg, atol=1e-13)
    assert np.allclose(v, v_mir, atol=1e-13)


def test_scalar_potential_axial_at_zero_tilt():
    cfg = hydrogen_2d(B=0.5, alpha=0.0)
    phis = np.linspace(0, 2 * math.pi, 13)
    v = scalar_potential(2.0, phis, cfg)
    assert np.ptp(v) < 1e-15


def test_oscillator_decreases_with_tilt_along_x():
    cfg = [hydrogen_2d(B=0.5, alpha=a) for a in (0.0, 0.4, 0.8, 1.2)]
    vals = [scalar_potential(3.0, 0.0, c) for c in cfg]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    # and no alpha dependence at phi = pi/2
    vals_perp = [scalar_potential(3.0, math.pi / 2, c) for c in cfg]
    assert np.ptp(vals_perp) < 1e-14


def test_zeeman_coefficient_values():
    assert zeeman_coefficient(hydrogen_2d(B=0.0, alpha=0.3)) == 0.0
    assert zeeman_coefficient(SystemConfig(m1=1.0, m2=1.0, B=2.0)) == 0.0
    assert zeeman_coefficient(hydrogen_2d(B=0.5, alpha=math.pi / 2)) == pytest.approx(0.0, abs=1e-16)
    # hand evaluation: (mu1-mu2) * 0.5 / (2 m_r)
    assert zeeman_coefficient(hydrogen_2d(B=0.5, alpha=0.0)) == pytest.approx(0.2498638, abs=1e-7)


def test_zeeman_antisymmetric_under_mass_swap():
    a = SystemConfig(m1=3.0, m2=1.0, B=1.0)
    b = SystemConfig(m1=1.0, m2=3.0, B=1.0)
    assert zeeman_coefficient(a) == pytest.approx(-zeeman_coefficient(b), rel=1e-14)


def test_unit_conversions():
    assert tesla_to_au(0.0) == 0.0
    assert tesla_to_au(2.0) == pytest.approx(8.50876e-6, rel=1e-5)
    assert au_to_tesla(tesla_to_au(3.7)) == pytest.approx(3.7, rel=1e-14)
    assert hartree_to_mev(1.0) == pytest.approx(27211.386, rel=1e-12)
    assert mev_to_hartree(hartree_to_mev(0.25)) == pytest.approx(0.25, rel=1e-14)


def test_analytic_field_free_levels():
    cfg = hydrogen_2d()
    # E_n = -m_r / (2 (n-1/2)^2): frozen from the closed form
    assert analytic_field_free_level(1, cfg) == pytest.approx(-1.9989114, abs=1e-7)
    assert analytic_field_free_level(2, cfg) == pytest.approx(-cfg.m_r / 4.5, rel=1e-15)
    assert analytic_field_free_level(3, cfg) == pytest.approx(-0.0799560, abs=1e-6)
    assert analytic_field_free_level(3, cfg) == pytest.approx(-cfg.m_r / 12.5, rel=1e-15)
    exc = exciton_gaas()
    e1 = analytic_field_free_level(1, exc)
    assert e1 == pytest.approx(-2.0 * exc.m_r / exc.epsilon**2, rel=1e-15)
    assert hartree_to_mev(e1) == pytest.approx(-18.150, abs=2e-3)


def test_analytic_levels_increasing_and_negative():
    cfg = exciton_gaas()
    levels = [analytic_field_free_level(n, cfg) for n in range(1, 30)]
    assert all(e < 0 for e in levels)
    assert all(a < b for a, b in zip(levels, levels[1:]))
    assert levels[-1] > -1e-3


def test_analytic_level_domain_error():
    with pytest.raises(ValueError):
        analytic_field_free_level(0, hydrogen_2d())
