"""Koopman spectral and Carleman linearisation of autonomous ODEs."""

from .carleman import CarlemanSystem, PolynomialODE, build_carleman_matrix, carleman_initial, taylor_polynomialize
from .chebdiff import differentiation_matrix
from .evolve import Trajectory, evolve_dense, evolve_stepped, koopman_mode_solution
from .exceptions import CarlemanSizeError, DefectiveMatrixError, NonFiniteValueError, NumericalError
from .grid import AxisSpec, CollocationGrid, gauss_lobatto_points, make_grid, middle_index, tensor_grid
from .koopman import LiftedOperator, build_koopman_matrix, coordinate_initial_vectors, initial_vector
from .models import ModelSpec, catalog, get_model, linear_model
from .reference import IntegratorConfig, integrate

__version__ = "0.1.0"

__all__ = [
    "AxisSpec",
    "CarlemanSizeError",
    "CarlemanSystem",
    "CollocationGrid",
    "DefectiveMatrixError",
    "IntegratorConfig",
    "LiftedOperator",
    "ModelSpec",
    "NonFiniteValueError",
    "NumericalError",
    "PolynomialODE",
    "Trajectory",
    "build_carleman_matrix",
    "build_koopman_matrix",
    "carleman_initial",
    "catalog",
    "coordinate_initial_vectors",
    "differentiation_matrix",
    "evolve_dense",
    "evolve_stepped",
    "gauss_lobatto_points",
    "get_model",
    "initial_vector",
    "integrate",
    "koopman_mode_solution",
    "linear_model",
    "make_grid",
    "middle_index",
    "taylor_polynomialize",
    "tensor_grid",
]
