"""Renyi entropies along radial nonlinear diffusion, with verifiable certificates."""

__version__ = "0.1.0"

from .barenblatt import (
    BarenblattSpec, barenblatt_mixture, barenblatt_profile, barenblatt_spec, gamma_constant,
    gamma_constant_by_quadrature, gamma_constant_printed, gaussian_profile, reference_grid,
    self_similar_snapshot, sobolev_constant, two_shell, uniform_ball,
)
from .core import (
    DensityField, GridMismatchError, RadialGrid, build_radial_grid, dilate, integrate_power,
    l1_distance, second_moment,
)
from .functionals import (
    FunctionalReport, entropy_power, evaluate, fisher_information, lambda_invariant,
    renyi_entropy, tsallis_entropy,
)
from .gamma import gamma
from .solver import SolverConfig, SolverError, Trajectory, evolve
from .verify import (
    Certificate, CheckError, check_barenblatt_attraction, check_concavity, check_debruijn,
    check_isoperimetric, check_lambda_monotone, check_moment_law, check_power_linearity,
    check_refinement, check_sobolev,
)

__all__ = [
    "BarenblattSpec", "Certificate", "CheckError", "DensityField", "FunctionalReport",
    "GridMismatchError", "RadialGrid", "SolverConfig", "SolverError", "Trajectory",
    "barenblatt_mixture", "barenblatt_profile", "barenblatt_spec", "build_radial_grid",
    "check_barenblatt_attraction", "check_concavity", "check_debruijn", "check_isoperimetric",
    "check_lambda_monotone", "check_moment_law", "check_power_linearity", "check_refinement",
    "check_sobolev", "dilate", "entropy_power", "evaluate", "evolve", "fisher_information",
    "gamma", "gamma_constant", "gamma_constant_by_quadrature", "gamma_constant_printed",
    "gaussian_profile", "integrate_power", "l1_distance", "lambda_invariant", "reference_grid",
    "renyi_entropy", "second_moment", "self_similar_snapshot", "sobolev_constant",
    "tsallis_entropy", "two_shell", "uniform_ball",
]
