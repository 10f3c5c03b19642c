"""Space-time Petrov-Galerkin spectral method for distributed-order diffusion problems.

The public surface is re-exported here; see the individual modules for details.
"""

__version__ = "0.1.0"

from dopg.assembly import OperatorSet, assemble_operators
from dopg.basis import Side, SpatialBasisConfig, TemporalBasisConfig
from dopg.distribution import OrderDistribution, distributed_integral, order_nodes
from dopg.errors import (
    AssemblyError,
    ConditioningWarning,
    DecompositionError,
    DomainError,
    DopgError,
    EvaluationError,
    ParameterError,
    QuadratureWarning,
    ResonanceError,
    SizeGuardError,
)
from dopg.manufactured import (
    LoadTensor,
    SeparableFunction,
    SpatialFactor,
    assemble_load_quadrature,
    case1,
    case2,
    case3,
    fabricate_load,
    project_spatial,
)
from dopg.orthopoly import gauss_jacobi_rule, gauss_legendre_rule, jacobi_eval
from dopg.postproc import ErrorReport, convergence_rate, eval_solution, linf_error
from dopg.problem import DiscretizationConfig, ProblemSpec
from dopg.solver import SolutionTensor, direct_solve, fast_solve

__all__ = [
    "__version__",
    "OperatorSet",
    "assemble_operators",
    "Side",
    "SpatialBasisConfig",
    "TemporalBasisConfig",
    "OrderDistribution",
    "distributed_integral",
    "order_nodes",
    "AssemblyError",
    "ConditioningWarning",
    "DecompositionError",
    "DomainError",
    "DopgError",
    "EvaluationError",
    "ParameterError",
    "QuadratureWarning",
    "ResonanceError",
    "SizeGuardError",
    "LoadTensor",
    "SeparableFunction",
    "SpatialFactor",
    "assemble_load_quadrature",
    "case1",
    "case2",
    "case3",
    "fabricate_load",
    "project_spatial",
    "gauss_jacobi_rule",
    "gauss_legendre_rule",
    "jacobi_eval",
    "ErrorReport",
    "convergence_rate",
    "eval_solution",
    "linf_error",
    "DiscretizationConfig",
    "ProblemSpec",
    "SolutionTensor",
    "direct_solve",
    "fast_solve",
]
