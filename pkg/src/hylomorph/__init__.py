"""Hylomorphic vortices and solitons of the nonlinear Klein-Gordon equation.

Charge-constrained construction of radial profiles, leap-frog evolution on
periodic and polar grids, and orbital-stability diagnostics.
"""

from hylomorph.potential import (
    AssumptionReport,
    PotentialError,
    PotentialSpec,
    check_assumptions,
    make_log_potential,
    make_quadratic_potential,
    get_potential,
)
from hylomorph.functionals import (
    DegenerateProfileError,
    RadialGrid,
    RadialProfile,
    charge_integral,
    energy,
    hylomorphy_probe,
    hylomorphy_ratio,
    j_functional,
    omega_from_charge,
    read_profile,
    write_profile,
)

__all__ = [
    "AssumptionReport",
    "DegenerateProfileError",
    "PotentialError",
    "PotentialSpec",
    "RadialGrid",
    "RadialProfile",
    "charge_integral",
    "check_assumptions",
    "energy",
    "get_potential",
    "hylomorphy_probe",
    "hylomorphy_ratio",
    "j_functional",
    "make_log_potential",
    "make_quadratic_potential",
    "omega_from_charge",
    "read_profile",
    "write_profile",
]

__version__ = "0.1.0"
