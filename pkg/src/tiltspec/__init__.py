"""Bound states, densities and level statistics of a planar Coulomb pair
in a tilted homogeneous magnetic field."""

__version__ = "0.1.0"

from .model import (  # noqa: F401
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
from .angular import AngularScheme, build_angular_scheme, potential_matrix  # noqa: F401
from .radial import (  # noqa: F401
    RadialScheme,
    apply_second_derivative,
    build_radial_scheme,
    fornberg_weights,
)
from .hamiltonian import (  # noqa: F401
    BlockBandedHamiltonian,
    assemble,
    dense_reference_diagonalization,
    solve_radial_modes,
)
from .eigensolver import (  # noqa: F401
    Eigenpair,
    Spectrum,
    block_sweep_solve,
    count_levels_below,
    shifted_inverse_iteration,
    spectrum_scan,
)
from .observables import (  # noqa: F401
    DensityField,
    EnergyTable,
    density_field,
    energy_sweep,
    lowest_levels,
    reconstruct_wavefunction,
)
from .stats import (  # noqa: F401
    SpacingHistogram,
    SpacingSeries,
    cluster_detection,
    nnsd,
    poisson_pdf,
    wigner_pdf,
)
