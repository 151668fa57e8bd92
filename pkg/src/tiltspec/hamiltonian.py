"""Assembly of the block-banded Hamiltonian and small dense references.

The discrete Hamiltonian acts on channel values Psi_j(rho_k) arranged as
vectors of shape (N, 2M+1): N radial blocks of size 2M+1, block bandwidth 3
from the radial stencil, Hermitian to machine precision.  Blocks are stored
implicitly: every diagonal block is

    D_k = diag(d_k) + ang_coeff_k * (-h0) + zc * h1

with a per-node scalar profile d_k (kinetic diagonal plus scalar potential)
and the shared angular matrices, and every off-diagonal block is a scalar
multiple of the identity.  This keeps memory at O(N * (2M+1)) and makes the
matrix-vector product a pair of dense (N,S)x(S,S) products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eig_banded, eigh

from .angular import AngularScheme
from .model import SystemConfig, zeeman_coefficient
from .radial import RadialScheme, coulomb_quadrature_correction, kinetic_band, mass_weights

#: size guard for dense reference diagonalization
DENSE_LIMIT = 2000


@dataclass
class BlockBandedHamiltonian:
    """Hermitian block-banded operator; see module docstring for layout."""

    cfg: SystemConfig
    angular: AngularScheme = field(repr=False)
    radial: RadialScheme = field(repr=False)
    diag_scalar: np.ndarray = field(repr=False)   # (N, S) real
    ang_coeff: np.ndarray = field(repr=False)     # (N,) real, multiplies -h0
    zc: float = 0.0                               # multiplies h1
    off_scalars: np.ndarray = field(repr=False, default=None)  # (3, N) real
    sigma: float = 0.0                            # last shift used by a solver

    @property
    def N(self) -> int:
        return self.radial.N

    @property
    def block_size(self) -> int:
        return self.angular.size

    @property
    def dim(self) -> int:
        return self.N * self.block_size

    @property
    def weights(self) -> np.ndarray:
        """Radial quadrature weights for int |Psi|^2 rho drho."""
        return mass_weights(self.radial)

    def norm_estimate(self) -> float:
        """Gershgorin upper bound on ||H||_2 (sets the attainable residual floor).

        The mapped grid makes the near-origin diagonal grow like N^4, so
        absolute residuals cannot drop below machine epsilon times this scale.
        """
        row = np.abs(self.diag_scalar).max(axis=1)
        row += np.abs(self.ang_coeff) * np.abs(self.angular.h0).sum(axis=1).max()
        row += abs(self.zc) * np.abs(self.angular.h1).sum(axis=1).max()
        off = np.abs(self.off_scalars).sum(axis=0)
        row += 2.0 * off.max() if off.size else 0.0
        return float(row.max())

    # -- quadrature-form (pencil) view ----------------------------------------
    #
    # H = W^{-1/2} A W^{-1/2} with diagonal positive W (the radial quadrature
    # weights) and a bounded Hermitian form matrix A.  Solvers work on the
    # pencil (A, W): the W^{-1/2} scaling blows the near-origin entries of H
    # up like N^4, while A and W are benign, so pencil arithmetic keeps
    # rounding at eps*||A|| instead of eps*||H||.

    def form_off(self, d: int) -> np.ndarray:
        """Off-diagonal scalars of A at block distance d (length N-d)."""
        w = self.weights
        n = self.N - d
        return self.off_scalars[d - 1, :n] * np.sqrt(w[:n] * w[d:])

    def form_diag_block(self, k: int) -> np.ndarray:
        """Dense (S, S) diagonal block of A at radial node k."""
        return self.weights[k] * self.diag_block(k)

    def form_matvec(self, psi: np.ndarray) -> np.ndarray:
        """A @ psi for psi of shape (N, S) or batched (..., N, S)."""
        x = psi.reshape((-1,) + psi.shape[-2:]) if psi.ndim > 2 else psi[None]
        w = self.weights
        y = (w[:, None] * self.diag_scalar)[None] * x
        y = y - (w * self.ang_coeff)[None, :, None] * (x @ self.angular.h0.T)
        if self.zc:
            y = y + (self.zc * w)[None, :, None] * (x @ self.angular.h1.T)
        for d in (1, 2, 3):
            c = self.form_off(d)
            y[:, :-d] += c[None, :, None] * x[:, d:]
            y[:, d:] += c[None, :, None] * x[:, :-d]
        return y.reshape(psi.shape)

    def form_matvec_abs(self, abspsi: np.ndarray) -> np.ndarray:
        """|A| @ |psi| elementwise-absolute product (rounding-floor estimate)."""
        x = abspsi.reshape((-1,) + abspsi.shape[-2:]) if abspsi.ndim > 2 else abspsi[None]
        w = self.weights
        y = np.abs(w[:, None] * self.diag_scalar)[None] * x
        y = y + (w * np.abs(self.ang_coeff))[None, :, None] * (x @ np.abs(self.angular.h0).T)
        if self.zc:
            y = y + (abs(self.zc) * w)[None, :, None] * (x @ np.abs(self.angular.h1).T)
        for d in (1, 2, 3):
            c = np.abs(self.form_off(d))
            y[:, :-d] += c[None, :, None] * x[:, d:]
            y[:, d:] += c[None, :, None] * x[:, :-d]
        return y.reshape(abspsi.shape)

    def form_norm_estimate(self) -> float:
        """Gershgorin upper bound on ||A||_2 (bounded, O(N))."""
        w = self.weights
        row = w * np.abs(self.diag_scalar).max(axis=1)
        row += w * np.abs(self.ang_coeff) * np.abs(self.angular.h0).sum(axis=1).max()
        row += w * abs(self.zc) * np.abs(self.angular.h1).sum(axis=1).max()
        for d in (1, 2, 3):
            c = np.abs(self.form_off(d))
            row[: self.N - d] += c
            row[d:] += c
        return float(row.max())

    def diag_block(self, k: int) -> np.ndarray:
        """Dense (S, S) diagonal block for radial node index k (0-based)."""
        S = self.block_size
        blk = np.zeros((S, S), dtype=complex)
        blk -= self.ang_coeff[k] * self.angular.h0
        if self.zc:
            blk += self.zc * self.angular.h1
        blk[np.diag_indices(S)] += self.diag_scalar[k]
        return blk

    def matvec(self, v: np.ndarray) -> np.ndarray:
        """H @ v for v of shape (N, S) or (N*S,) (also batched (..., N, S))."""
        flat = v.ndim == 1
        x = v.reshape(-1, self.N, self.block_size) if not flat else v.reshape(1, self.N, self.block_size)
        y = self.diag_scalar[None] * x
        y = y - self.ang_coeff[None, :, None] * (x @ self.angular.h0.T)
        if self.zc:
            y = y + self.zc * (x @ self.angular.h1.T)
        for d in (1, 2, 3):
            c = self.off_scalars[d - 1, : self.N - d]
            y[:, :-d] += c[None, :, None] * x[:, d:]
            y[:, d:] += c[None, :, None] * x[:, :-d]
        if flat:
            return y.reshape(-1)
        return y.reshape(v.shape)

    def to_dense(self) -> np.ndarray:
        """Dense Hermitian matrix; intended for small oracle grids."""
        S, N = self.block_size, self.N
        h = np.zeros((N * S, N * S), dtype=complex)
        for k in range(N):
            h[k * S:(k + 1) * S, k * S:(k + 1) * S] = self.diag_block(k)
            for d in (1, 2, 3):
                if k + d < N:
                    c = self.off_scalars[d - 1, k]
                    idx = np.arange(S)
                    h[k * S + idx, (k + d) * S + idx] = c
                    h[(k + d) * S + idx, k * S + idx] = c
        return h


def assemble(cfg: SystemConfig, ang: AngularScheme, rad: RadialScheme) -> BlockBandedHamiltonian:
    """Assemble the Hamiltonian for the given system on the given grids."""
    if ang.size < 1 or rad.N < 8:
        raise ValueError("schemes must be built before assembly")
    inv2mr = 1.0 / (2.0 * cfg.m_r)
    band = kinetic_band(rad) * inv2mr
    rho = rad.nodes
    aniso = 1.0 - math.sin(cfg.alpha) ** 2 * np.cos(ang.nodes) ** 2
    # scalar potential sampled on the grid: oscillator (per channel) + Coulomb
    diag = band[0][:, None] + (cfg.B**2 / 4.0 * rho**2 * inv2mr)[:, None] * aniso[None, :]
    diag = diag - (1.0 / (cfg.epsilon * rho))[:, None]
    # Euler-Maclaurin endpoint correction of the Coulomb quadrature
    diag[:3] += (coulomb_quadrature_correction(rad) / cfg.epsilon)[:, None]
    ang_coeff = inv2mr / rho**2
    return BlockBandedHamiltonian(
        cfg=cfg,
        angular=ang,
        radial=rad,
        diag_scalar=diag,
        ang_coeff=ang_coeff,
        zc=zeeman_coefficient(cfg),
        off_scalars=band[1:4],
    )


def radial_mode_hamiltonian(cfg: SystemConfig, rad: RadialScheme, m: int) -> np.ndarray:
    """Lower-banded real matrix (4, N) of the decoupled m-channel at alpha=0.

    Valid whenever the potential is axially symmetric; the full Hamiltonian
    block-diagonalizes into these 1D operators under the Fourier transform.
    """
    inv2mr = 1.0 / (2.0 * cfg.m_r)
    band = kinetic_band(rad) * inv2mr
    rho = rad.nodes
    ab = band.copy()
    ab[0] += (m * m) * inv2mr / rho**2
    ab[0] += cfg.B**2 / 4.0 * rho**2 * inv2mr - 1.0 / (cfg.epsilon * rho)
    ab[0] += zeeman_coefficient(cfg) * m
    ab[0, :3] += coulomb_quadrature_correction(rad) / cfg.epsilon
    return ab

def solve_radial_modes(
    cfg: SystemConfig,
    rad: RadialScheme,
    m: int,
    n_lowest: int | None = None,
    window: tuple[float, float] | None = None,
) -> np.ndarray:
    """Eigenvalues of one decoupled m-channel (alpha=0 oracle path)."""
    ab = radial_mode_hamiltonian(cfg, rad, m)
    if window is not None:
        return eig_banded(ab, lower=True, eigvals_only=True,
                          select="v", select_range=window)
    if n_lowest is not None:
        n_lowest = min(n_lowest, rad.N)
        return eig_banded(ab, lower=True, eigvals_only=True,
                          select="i", select_range=(0, n_lowest - 1))
    return eig_banded(ab, lower=True, eigvals_only=True)


def dense_reference_diagonalization(h) -> np.ndarray:
    """All eigenvalues of a Hermitian operator by dense diagonalization.

    Accepts a `BlockBandedHamiltonian` or a dense Hermitian array.  Refuses
    problems larger than `DENSE_LIMIT` (cubic cost oracle, test use only).
    """
    if isinstance(h, BlockBandedHamiltonian):
        if h.dim > DENSE_LIMIT:
            raise ValueError(f"dense oracle refuses dim {h.dim} > {DENSE_LIMIT}")
        return eigh(h.to_dense(), eigvals_only=True)
    mat = np.asarray(h)
    if mat.shape[0] > DENSE_LIMIT:
        raise ValueError(f"dense oracle refuses dim {mat.shape[0]} > {DENSE_LIMIT}")
    return eigh(mat, eigvals_only=True)
