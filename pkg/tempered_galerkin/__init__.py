"""Riesz-basis wavelet-Galerkin solver for the 1-D tempered fractional Laplacian."""

from .analysis import condition_sweep, convergence_sweep, error_norms, successive_errors
from .assembly import assemble_first_row, lifting_load, load_vector
from .errors import GalerkinError
from .linsolve import cg_solve, condition_number, pcg_solve
from .models.operator import BasisSpec, OperatorParams
from .models.problem import ProblemSpec
from .problems import get_problem, solve_problem

__version__ = "0.1.0"

__all__ = [
    "BasisSpec",
    "GalerkinError",
    "OperatorParams",
    "ProblemSpec",
    "assemble_first_row",
    "cg_solve",
    "condition_number",
    "condition_sweep",
    "convergence_sweep",
    "error_norms",
    "get_problem",
    "lifting_load",
    "load_vector",
    "pcg_solve",
    "solve_problem",
    "successive_errors",
]
