"""Angular grid representation on the uniform phi grid.

The wave function is represented by its values on the 2M+1 nodes
phi_j = 2 pi j / (2M+1) and expanded in the Fourier functions

    xi_m(phi) = (-1)^m exp(i m phi) / sqrt(2 pi),   m = -M..M.

The square transform matrix xi_{jm} = xi_m(phi_j) and its exact inverse
xi^-1_{mj} = 2 pi/(2M+1) xi*_{jm} carry functions between grid values and
Fourier coefficients.  Operator matrices on the grid follow by conjugation:

    h0_{jj'} = - sum_m m^2 xi_{jm} xi^-1_{mj'}        (d^2/dphi^2)
    h1_{jj'} =   sum_m m   xi_{jm} xi^-1_{mj'}        (L_z)

h0 is real symmetric circulant with eigenvalues {-m^2}; h1 is purely
imaginary antisymmetric (Hermitian) with eigenvalues {m}.  A multiplicative
potential is diagonal in the grid representation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import SystemConfig, zeeman_coefficient


@dataclass(frozen=True)
class AngularScheme:
    """Grid nodes, transform matrices and operator matrices for fixed M."""

    M: int
    nodes: np.ndarray = field(repr=False)     # phi_j, shape (2M+1,)
    xi: np.ndarray = field(repr=False)        # (2M+1, 2M+1), rows j, cols m
    xi_inv: np.ndarray = field(repr=False)    # (2M+1, 2M+1), rows m, cols j
    h0: np.ndarray = field(repr=False)        # real symmetric
    h1: np.ndarray = field(repr=False)        # imaginary antisymmetric

    @property
    def size(self) -> int:
        return 2 * self.M + 1

    @property
    def m_values(self) -> np.ndarray:
        return np.arange(-self.M, self.M + 1)


def build_angular_scheme(M: int) -> AngularScheme:
    """Construct the angular scheme for truncation M >= 0."""
    if M < 0:
        raise ValueError(f"angular truncation must be >= 0, got {M}")
    n = 2 * M + 1
    j = np.arange(n)
    phi = 2.0 * math.pi * j / n
    m = np.arange(-M, M + 1)
    # xi_{jm} = (-1)^m exp(i m phi_j) / sqrt(2 pi)
    xi = ((-1.0) ** m)[None, :] * np.exp(1j * np.outer(phi, m)) / math.sqrt(2.0 * math.pi)
    xi_inv = (2.0 * math.pi / n) * xi.conj().T
    h0_c = -(xi * (m.astype(float) ** 2)[None, :]) @ xi_inv
    h1 = (xi * m[None, :].astype(float)) @ xi_inv
    # both are Hermitian and h0 real by symmetry of the m-sum; enforce the
    # structure exactly so assembled operators are Hermitian to the last bit
    h0 = h0_c.real.copy()
    h0 = 0.5 * (h0 + h0.T)
    h1 = 0.5 * (h1 + h1.conj().T)
    np.fill_diagonal(h1, h1.diagonal().real)
    return AngularScheme(M=M, nodes=phi, xi=xi, xi_inv=xi_inv, h0=h0, h1=h1)


def potential_matrix(rho: float, cfg: SystemConfig, scheme: AngularScheme) -> np.ndarray:
    """Potential matrix at radius rho in the scaled form (2 m_r * potential).

    Diagonal screened Coulomb and anisotropic oscillator evaluated at the
    grid nodes, plus the field-linear angular momentum coupling through h1:

        V_{jj'} = -2 m_r/(eps rho) d_{jj'}
                  + 2 m_r * zc * h1_{jj'}
                  + (B^2 rho^2/4)(1 - sin^2(alpha) cos^2(phi_j)) d_{jj'}

    with zc = (mu1-mu2) B cos(alpha)/(2 m_r).  Hermitian by construction.
    """
    if rho <= 0:
        raise ValueError("rho must be positive (Coulomb singularity at rho=0)")
    aniso = 1.0 - math.sin(cfg.alpha) ** 2 * np.cos(scheme.nodes) ** 2
    diag = -2.0 * cfg.m_r / (cfg.epsilon * rho) + (cfg.B**2 * rho**2 / 4.0) * aniso
    v = np.diag(diag.astype(complex))
    zc = zeeman_coefficient(cfg)
    if zc != 0.0:
        v = v + (2.0 * cfg.m_r * zc) * scheme.h1
    return v
