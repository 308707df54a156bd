"""Spectral Galerkin simulation and verification of a Cahn-Hilliard tumour
growth model coupled to a nutrient with chemotaxis and active transport."""

from .assembly import AssembledOperators, BoundaryData, assemble
from .basis import Basis, boundary_mass_matrix, build_basis
from .dynamics import (
    GalerkinState,
    Problem,
    StepControl,
    Trajectory,
    integrate,
    mu_coeffs,
    rhs_parabolic,
)
from .model import (
    CoefficientFunction,
    Coefficients,
    ModelParams,
    Potential,
    ValidatedConfig,
    active_transport_map,
    default_h,
    default_potential,
    validate,
)
from .quasistatic import integrate_quasistatic, rhs_quasistatic, solve_nutrient

__version__ = "0.1.0"
