"""Radial pseudospectral toolkit for Klein-Gordon-Maxwell standing waves with a mixed local-nonlocal operator."""

from .errors import (
    AdmissibilityError,
    DomainError,
    GeometryError,
    GridMismatchError,
    InfeasibleError,
    NumericalError,
)
from .params import (
    AdmissibilityReport,
    CoercivityConstants,
    ModelParams,
    PotentialSpec,
    alpha0,
    check_admissible,
    feasible_epsilon,
    normalization_constant,
    omega_gap,
)
from .radial import OperatorSymbol, RadialField, RadialGrid, make_grid
from .electrostatic import solve_phi
from .functional import EnergyBreakdown, energy_J, full_F, gradient_J
from .mountain_pass import SolveOptions, SolveResult, mountain_pass_solve, pde_residuals
from .spectrum import SpectrumResult, compute_gamma, eigen_decomposition, rayleigh_min_check

__version__ = "0.1.0"
