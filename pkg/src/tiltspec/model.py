"""Physical system definition: masses, field geometry, effective potential.

The relative motion of two oppositely charged particles confined to a plane,
in a homogeneous magnetic field B tilted by an angle alpha against the plane
normal, is governed (total momentum zero, symmetric gauge) by the effective
potential

    V(rho, phi) = (1/(2 m_r)) * (B^2 rho^2 / 4) * (1 - sin^2(alpha) cos^2(phi))
                  - 1/(epsilon rho)

plus a term linear in the angular momentum projection,
(mu1 - mu2) B cos(alpha) / (2 m_r) * L_z.  Everything here is a pure function
of a `SystemConfig`; no state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import (
    GAAS_DIELECTRIC_CONSTANT,
    GAAS_ELECTRON_MASS,
    GAAS_HEAVY_HOLE_MASS,
    MEV_PER_HARTREE,
    PROTON_ELECTRON_MASS_RATIO,
    TESLA_PER_AU,
)


@dataclass(frozen=True)
class SystemConfig:
    """Two-particle planar Coulomb system in a tilted homogeneous field.

    Parameters
    ----------
    m1, m2 : float
        Particle masses in electron masses; particle 1 is the heavy one by
        convention (proton or heavy hole).
    epsilon : float
        Dielectric constant screening the Coulomb attraction (1 in vacuum).
    B : float
        Field strength in atomic units.
    alpha : float
        Tilt angle in radians between the field and the plane normal,
        0 <= alpha <= pi/2.
    """

    m1: float
    m2: float
    epsilon: float = 1.0
    B: float = 0.0
    alpha: float = 0.0

    def __post_init__(self):
        if self.m1 <= 0 or self.m2 <= 0:
            raise ValueError(f"masses must be positive, got m1={self.m1}, m2={self.m2}")
        if self.epsilon < 1.0:
            raise ValueError(f"dielectric constant must be >= 1, got {self.epsilon}")
        if self.B < 0:
            raise ValueError(f"field strength must be >= 0, got {self.B}")
        if not 0.0 <= self.alpha <= math.pi / 2 + 1e-12:
            raise ValueError(f"tilt angle must lie in [0, pi/2], got {self.alpha}")

    @property
    def mu1(self) -> float:
        return self.m1 / (self.m1 + self.m2)

    @property
    def mu2(self) -> float:
        return self.m2 / (self.m1 + self.m2)

    @property
    def m_r(self) -> float:
        """Reduced mass m1*m2/(m1+m2)."""
        return self.m1 * self.m2 / (self.m1 + self.m2)

    @property
    def bohr_radius(self) -> float:
        """Effective Bohr radius epsilon/m_r in a.u."""
        return self.epsilon / self.m_r


def hydrogen_2d(B: float = 0.0, alpha: float = 0.0) -> SystemConfig:
    """2D hydrogen atom: physical proton/electron masses, no screening."""
    return SystemConfig(m1=PROTON_ELECTRON_MASS_RATIO, m2=1.0, epsilon=1.0, B=B, alpha=alpha)


def exciton_gaas(B: float = 0.0, alpha: float = 0.0) -> SystemConfig:
    """Heavy-hole exciton in a GaAs/AlGaAs quantum well (effective masses)."""
    return SystemConfig(
        m1=GAAS_HEAVY_HOLE_MASS,
        m2=GAAS_ELECTRON_MASS,
        epsilon=GAAS_DIELECTRIC_CONSTANT,
        B=B,
        alpha=alpha,
    )


#: Named presets resolvable from run configurations.
PRESETS = {
    "hydrogen2d": hydrogen_2d,
    "exciton_gaas": exciton_gaas,
}


def preset_system(name: str, B: float = 0.0, alpha: float = 0.0) -> SystemConfig:
    """Build a `SystemConfig` from a preset name ('hydrogen2d' | 'exciton_gaas')."""
    try:
        factory = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown system preset {name!r}; choose from {sorted(PRESETS)}") from None
    return factory(B=B, alpha=alpha)


def scalar_potential(rho, phi, cfg: SystemConfig):
    """Scalar part of the effective potential at (rho, phi), in Hartree.

    Anisotropic oscillator plus screened Coulomb; the L_z term is not
    included here (see `zeeman_coefficient`).  Accepts scalars or arrays.
    """
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0):
        raise ValueError("rho must be positive (Coulomb singularity at rho=0)")
    aniso = 1.0 - math.sin(cfg.alpha) ** 2 * np.cos(phi) ** 2
    osc = (cfg.B**2 * rho**2 / 4.0) * aniso / (2.0 * cfg.m_r)
    out = osc - 1.0 / (cfg.epsilon * rho)
    return out if out.ndim else float(out)


def zeeman_coefficient(cfg: SystemConfig) -> float:
    """Coefficient of the angular-momentum projection m in the energy.

    Equals (mu1 - mu2) B cos(alpha) / (2 m_r); vanishes for B=0, for
    alpha=pi/2 and for equal masses.
    """
    return (cfg.mu1 - cfg.mu2) * cfg.B * math.cos(cfg.alpha) / (2.0 * cfg.m_r)


def tesla_to_au(b_tesla: float) -> float:
    """Magnetic field strength, Tesla -> atomic units."""
    return b_tesla / TESLA_PER_AU


def au_to_tesla(b_au: float) -> float:
    """Magnetic field strength, atomic units -> Tesla."""
    return b_au * TESLA_PER_AU


def hartree_to_mev(energy_au: float) -> float:
    """Energy, Hartree -> meV."""
    return energy_au * MEV_PER_HARTREE


def mev_to_hartree(energy_mev: float) -> float:
    """Energy, meV -> Hartree."""
    return energy_mev / MEV_PER_HARTREE


def analytic_field_free_level(n: int, cfg: SystemConfig) -> float:
    """Closed-form 2D Coulomb level E_n = -m_r / (2 epsilon^2 (n - 1/2)^2).

    Reference oracle for the B=0 limit; n = 1, 2, ... counts the principal
    quantum number.
    """
    if n < 1:
        raise ValueError(f"principal quantum number must be >= 1, got {n}")
    return -cfg.m_r / (2.0 * cfg.epsilon**2 * (n - 0.5) ** 2)
