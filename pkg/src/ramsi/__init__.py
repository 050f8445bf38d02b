"""Sparse recovery from Gaussian measurements aided by several side information signals."""

from .bounds import (
    BoundReport, SupportDecomposition, bound_l1, bound_l1l1, bound_loose_l1l1, bound_loose_nl1,
    bound_nl1, bound_simple, decompose, feasibility_gamma,
)
from .core import (
    SensingMatrix, SolverConfig, apply, apply_adjoint, generate_sensing_matrix, lipschitz_constant,
)
from .errors import (
    ArgumentError, ConvergenceError, DecompositionError, DimensionError, ParseError, RamsiError,
)
from .prox import prox_element, prox_vector
from .solver import SolveTrace, WeightPolicy, objective, ramsi
from .synth import ScenarioSpec, generate_scenario, generate_side_info, generate_source
from .weights import update_weights

__version__ = "0.1.0"
