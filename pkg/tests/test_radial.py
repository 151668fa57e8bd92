import numpy as np
import pytest

from tiltspec.radial import (
    apply_second_derivative,
    build_radial_scheme,
    coulomb_quadrature_correction,
    fornberg_weights,
    kinetic_band,
    mass_weights,
    radial_scheme_from_nodes,
)


def test_node_mapping():
    s = build_radial_scheme(8, 16.0)
    # early nodes of rho_max (k/N)^2
    assert s.nodes[0] == pytest.approx(16.0 / 64.0)
    assert s.nodes[-1] == pytest.approx(16.0)
    s4 = radial_scheme_from_nodes(np.array([1.0, 4.0, 9.0, 16.0, 25.0, 36.0, 49.0]))
    assert np.allclose(s4.nodes[:4], [1.0, 4.0, 9.0, 16.0])


def test_mapping_definition_matches_quadratic():
    N, rmax = 24, 16.0
    s = build_radial_scheme(N, rmax)
    k = np.arange(1, N + 1)
    assert np.allclose(s.nodes, rmax * (k / N) ** 2, rtol=1e-15)
    assert s.nodes[0] / s.rho_max == pytest.approx(1.0 / N**2, rel=1e-14)
    assert np.all(np.diff(s.nodes) > 0)


def test_build_rejects_bad_arguments():
    with pytest.raises(ValueError):
        build_radial_scheme(7, 10.0)
    with pytest.raises(ValueError):
        build_radial_scheme(100, 0.0)


def test_uniform_grid_recovers_classical_weights():
    # forced-equispaced nodes: the interior stencil is the classical 7-point
    # sixth-order central second-derivative formula
    h = 0.37
    nodes = h * np.arange(1, 30)
    s = radial_scheme_from_nodes(nodes)
    classical = np.array([1 / 90, -3 / 20, 3 / 2, -49 / 18, 3 / 2, -3 / 20, 1 / 90]) / h**2
    mid = 14
    assert np.allclose(s.stencils[mid], classical, rtol=1e-10)


def test_stencils_annihilate_constants():
    s = build_radial_scheme(40, 20.0)
    assert np.abs(s.stencils.sum(axis=1)).max() < 1e-7  # absolute scale ~1/h^2


def test_polynomial_exactness_degree6():
    s = build_radial_scheme(60, 20.0)
    f = s.nodes**6
    d2 = apply_second_derivative(s, f)
    assert np.abs((d2 - 30.0 * s.nodes**4) / (30.0 * s.nodes**4)).max() < 1e-10


def test_quadratic_with_boundary_zeros_is_exact():
    s = build_radial_scheme(50, 12.0)
    f = s.nodes * (s.rho_max - s.nodes)
    d2 = apply_second_derivative(s, f)
    assert np.abs(d2 + 2.0).max() < 1e-9


def test_zero_maps_to_zero_and_linearity():
    s = build_radial_scheme(30, 10.0)
    assert np.abs(apply_second_derivative(s, np.zeros(30))).max() == 0.0
    rng = np.random.default_rng(1)
    f, g = rng.standard_normal((2, 30))
    lhs = apply_second_derivative(s, 2.0 * f - 3.0 * g)
    rhs = 2.0 * apply_second_derivative(s, f) - 3.0 * apply_second_derivative(s, g)
    assert np.abs(lhs - rhs).max() < 1e-10


def test_length_mismatch_rejected():
    s = build_radial_scheme(30, 10.0)
    with pytest.raises(ValueError):
        apply_second_derivative(s, np.zeros(29))


def test_sine_example_error_decays_fast():
    # spec example profile: interior error falls roughly like N^-6 until the
    # rounding floor; the boundary-adjacent shifted stencils converge one
    # order slower, so the interior is measured with centered stencils only
    rho_max = 20.0
    errs = []
    for N in (50, 100, 200):
        s = build_radial_scheme(N, rho_max)
        f = np.sin(np.pi * s.nodes / rho_max)
        d2 = apply_second_derivative(s, f)
        exact = -((np.pi / rho_max) ** 2) * f
        interior = slice(3, N - 3)
        errs.append(np.abs(d2[interior] - exact[interior]).max() / (np.pi / rho_max) ** 2)
    assert errs[0] < 1e-7
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all(ratios > 20.0), (errs, ratios)


def test_smooth_compact_function_order():
    # measured convergence order on a smooth function that vanishes (to
    # machine level) at both boundaries, per the Dirichlet contract
    rho_max = 20.0
    errs = []
    for N in (100, 200, 400):
        s = build_radial_scheme(N, rho_max)
        u = s.nodes - 10.0
        f = np.exp(-u * u)
        fpp = np.exp(-u * u) * (4.0 * u * u - 2.0)
        d2 = apply_second_derivative(s, f)
        errs.append(np.abs(d2 - fpp).max())
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert all(5.5 <= o <= 6.5 for o in orders), (errs, orders)


def test_fornberg_first_derivative_weights():
    # 3-point central first derivative on a uniform grid: (-1/2, 0, 1/2)/h
    w = fornberg_weights(np.array([-1.0, 0.0, 1.0]), 0.0, 1)
    assert np.allclose(w[:, 1], [-0.5, 0.0, 0.5], atol=1e-14)


def test_mass_weights_quadrature():
    # int_0^rho_max rho^3 * rho drho with the t-grid weights (trapezoid-level
    # accuracy for functions that do not vanish at rho_max)
    s = build_radial_scheme(400, 5.0)
    val = np.sum(mass_weights(s) * s.nodes**3)
    assert val == pytest.approx(5.0**5 / 5.0, rel=1e-4)
    # and much better for a decayed integrand: int exp(-rho) rho drho = 1
    val2 = np.sum(mass_weights(s) * np.exp(-s.nodes))
    assert val2 == pytest.approx(1.0, rel=1e-8)


def test_kinetic_band_is_symmetric_form():
    s = build_radial_scheme(50, 10.0)
    band = kinetic_band(s)
    assert band.shape == (4, 50)
    # trailing entries of the off-diagonals are zeroed
    for d in (1, 2, 3):
        assert np.all(band[d, 50 - d:] == 0.0)
    # positive definite quadratic form (kinetic energy)
    mat = np.diag(band[0])
    for d in (1, 2, 3):
        mat += np.diag(band[d, :50 - d], k=d) + np.diag(band[d, :50 - d], k=-d)
    ev = np.linalg.eigvalsh(mat)
    assert ev.min() > 0


def test_coulomb_correction_scales():
    s1 = build_radial_scheme(100, 10.0)
    s2 = build_radial_scheme(200, 10.0)
    c1 = coulomb_quadrature_correction(s1)
    c2 = coulomb_quadrature_correction(s2)
    assert c1.shape == (3,)
    assert np.all(np.isfinite(c1)) and np.all(np.isfinite(c2))
