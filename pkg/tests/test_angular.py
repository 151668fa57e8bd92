import math

import numpy as np
import pytest

from tiltspec.angular import build_angular_scheme, potential_matrix
from tiltspec.model import hydrogen_2d, zeeman_coefficient


def test_minimal_scheme():
    s = build_angular_scheme(0)
    assert s.size == 1
    assert s.nodes[0] == 0.0
    assert s.h0[0, 0] == 0.0
    assert s.h1[0, 0] == 0.0


def test_negative_truncation_rejected():
    with pytest.raises(ValueError):
        build_angular_scheme(-1)


@pytest.mark.parametrize("M", [1, 3, 8])
def test_transform_inverse(M):
    s = build_angular_scheme(M)
    eye = s.xi @ s.xi_inv
    assert np.abs(eye - np.eye(s.size)).max() < 1e-14


@pytest.mark.parametrize("M", [1, 2, 5, 16, 64])
def test_operator_spectra_exact(M):
    # eigvalsh itself carries eps*||h|| backward error, so the tolerance
    # scales with the largest eigenvalue magnitude M^2
    s = build_angular_scheme(M)
    m = np.arange(-M, M + 1)
    tol = 1e-12 * max(1.0, M * M / 4.0)
    ev0 = np.sort(np.linalg.eigvalsh(s.h0))
    assert np.abs(ev0 - np.sort(-m.astype(float) ** 2)).max() < tol
    ev1 = np.sort(np.linalg.eigvalsh(s.h1))
    assert np.abs(ev1 - np.sort(m.astype(float))).max() < tol


def test_operator_structure():
    s = build_angular_scheme(6)
    assert np.abs(s.h0 - s.h0.T).max() == 0.0
    assert not np.iscomplexobj(s.h0)
    # h1 purely imaginary antisymmetric
    assert np.abs(s.h1.real).max() < 1e-14
    assert np.abs(s.h1 + s.h1.T).max() < 1e-13
    assert np.abs(s.h1 - s.h1.conj().T).max() == 0.0
    # rows sum to zero (m-sums of m^2 and m against constant vector)
    assert np.abs(s.h0.sum(axis=1)).max() < 1e-12
    assert np.abs(s.h1.sum(axis=1)).max() < 1e-12
    # circulant: first row shifted
    for j in range(1, s.size):
        assert np.allclose(np.roll(s.h0[0], j), s.h0[j], atol=1e-13)


def test_h1_adjacent_element_value():
    # direct summation of the defining m-sum for M=1; the element with node
    # separation Delta = +2pi/3 is (i 2/3) sin(2pi/3) ~ 0.57735i
    s = build_angular_scheme(1)
    direct = sum(m * np.exp(1j * m * (s.nodes[1] - s.nodes[0])) for m in (-1, 0, 1)) / 3.0
    assert s.h1[1, 0] == pytest.approx(direct, abs=1e-15)
    assert s.h1[1, 0] == pytest.approx(1j * (2.0 / 3.0) * math.sin(2 * math.pi / 3), abs=1e-12)
    assert abs(s.h1[1, 0] - 0.57735j) < 1e-5


def test_potential_matrix_coulomb_only():
    cfg = hydrogen_2d(B=0.0)
    s = build_angular_scheme(3)
    for rho in (0.5, 4.0):
        v = potential_matrix(rho, cfg, s)
        assert np.allclose(v, (-2.0 * cfg.m_r / rho) * np.eye(s.size), atol=1e-13)


def test_potential_matrix_axial_symmetry():
    cfg = hydrogen_2d(B=0.5, alpha=0.0)
    s = build_angular_scheme(4)
    v = potential_matrix(2.0, cfg, s)
    d = np.diag(v).real
    assert np.ptp(d) < 1e-13
    off = v - np.diag(np.diag(v))
    assert np.allclose(off, 2.0 * cfg.m_r * zeeman_coefficient(cfg) * s.h1, atol=1e-13)


def test_potential_matrix_hermitian_and_domain():
    cfg = hydrogen_2d(B=1.0, alpha=0.6)
    s = build_angular_scheme(5)
    v = potential_matrix(1.7, cfg, s)
    assert np.abs(v - v.conj().T).max() < 1e-13
    with pytest.raises(ValueError):
        potential_matrix(0.0, cfg, s)


def test_grid_vs_fourier_representation_of_cos2():
    # xi^-1 diag(cos^2 phi_j) xi must reproduce the analytic Fourier coupling
    # <m|cos^2|m'> = delta/2 + (delta_{m,m'+2}+delta_{m,m'-2})/4 away from the
    # truncation edges (the outermost m alias on the finite grid)
    M = 8
    s = build_angular_scheme(M)
    f_grid = s.xi_inv @ np.diag(np.cos(s.nodes) ** 2) @ s.xi
    m = np.arange(-M, M + 1)
    analytic = 0.5 * np.eye(2 * M + 1)
    for i, mi in enumerate(m):
        for j, mj in enumerate(m):
            if abs(mi - mj) == 2:
                analytic[i, j] += 0.25
    inner = slice(2, 2 * M - 1)
    assert np.abs(f_grid[inner, inner] - analytic[inner, inner]).max() < 1e-12


def test_potential_matrix_matches_fourier_construction():
    # build the full potential in the Fourier basis, including the harmonics
    # folded back by the finite grid, and transform to the grid basis
    M = 1
    cfg = hydrogen_2d(B=0.5, alpha=math.pi / 4)
    s = build_angular_scheme(M)
    n = s.size
    m = np.arange(-M, M + 1)
    sin2 = math.sin(cfg.alpha) ** 2
    rho = 1.0
    f = np.zeros((n, n), dtype=complex)
    pref = cfg.B**2 * rho**2 / 4.0
    coul = -2.0 * cfg.m_r / rho
    zc = 2.0 * cfg.m_r * zeeman_coefficient(cfg)
    for i, mi in enumerate(m):
        for j, mj in enumerate(m):
            # cos^2 phi = 1/2 + (e^{2i phi}+e^{-2i phi})/4 with exponents
            # taken modulo the grid periodicity 2M+1 (phase convention of
            # xi cancels in the folded difference)
            diff = (mi - mj) % n
            w = 0.0
            if diff == 0:
                w += 0.5
            if diff == 2 % n or diff == (-2) % n:
                w += 0.25
            if (mi - mj) % n == 0 and mi == mj:
                f[i, j] += coul + pref + zc * mi
            f[i, j] += -pref * sin2 * w * (-1.0) ** ((mi - mj) % 2)
    expected = s.xi @ f @ s.xi_inv
    got = potential_matrix(rho, cfg, s)
    assert np.abs(got - expected).max() < 1e-12
