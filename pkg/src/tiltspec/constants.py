"""Declared physical constants.

All internal computation runs in Hartree atomic units (hbar = m_e = e = 1);
these constants are the only unit-conversion data in the package and are
applied at I/O boundaries only.
"""

# proton mass in electron masses
PROTON_ELECTRON_MASS_RATIO = 1836.15267

# magnetic field: 1 a.u. of field corresponds to this many Tesla
TESLA_PER_AU = 2.350517567e5

# energy: 1 Hartree in meV
MEV_PER_HARTREE = 27211.386

# GaAs quantum-well effective parameters
GAAS_HEAVY_HOLE_MASS = 0.18
GAAS_ELECTRON_MASS = 0.067
GAAS_DIELECTRIC_CONSTANT = 12.1
