"""Contour-integral and root-vector-series solvers for evolution equations
with sectorial (possibly non-selfadjoint) operators."""

from . import contour, operators, solver, spectral
from .contour import Contour, QuadratureRule, build_contour, contour_for_spectrum, contour_nodes, validate_contour
from .errors import LidskiiError, NumericalError, ParameterError
from .operators import DiscretizedOperator, GridSpec, make_grid
from .solver import (
    EvolutionProblem,
    SolutionResult,
    compare_methods,
    solve_contour,
    solve_oracle,
    solve_series,
)
from .spectral import Bracketing, SpectralData, bracket_eigenvalues, eigendecompose

__version__ = "0.1.0"

__all__ = [
    "contour", "operators", "solver", "spectral",
    "Contour", "QuadratureRule", "build_contour", "contour_for_spectrum", "contour_nodes", "validate_contour",
    "LidskiiError", "NumericalError", "ParameterError",
    "DiscretizedOperator", "GridSpec", "make_grid",
    "EvolutionProblem", "SolutionResult", "compare_methods", "solve_contour", "solve_oracle", "solve_series",
    "Bracketing", "SpectralData", "bracket_eigenvalues", "eigendecompose",
]
