"""hp-version Jacobi-Gauss collocation for nonlinear weakly singular
Volterra integral equations of the first kind (Abel type).

Typical use::

    from abelhp import ProblemSpec, uniform_mesh, solve, evaluate

    problem = ProblemSpec(alpha=0.5, T=1.0, kappa=..., psi=..., dpsi_du=..., f=...)
    solution = solve(problem, uniform_mesh(N=8, T=1.0, M=4))
    values = evaluate(solution, points)

The :mod:`abelhp.bench` module registers the standard benchmark problems and
produces convergence reports; ``abel-hp`` is the command-line entry point.
"""

from .adaptive import (
    AdaptiveOptions,
    AdaptiveTrace,
    BudgetExceededError,
    adaptive_solve,
)
from .bench import (
    BenchmarkProblem,
    BenchReport,
    convergence_order,
    error_E1,
    error_E2,
    make_benchmark,
    perturb_rhs,
    run_sweep,
)
from .discretization import (
    ElementSolution,
    ElementSystem,
    ProblemAssumptionWarning,
    ProblemSpec,
    assemble_linear,
    history_coeffs,
    local_jacobian,
    local_residual,
    rhs_coeffs,
    validate_problem,
)
from .mesh import Mesh, locate, sigma, uniform_mesh
from .orthopoly import (
    Element,
    JacobiParams,
    jacobi_eval,
    jacobi_norm_gamma,
    shifted_eval,
)
from .quadrature import (
    HistoryWeights,
    QuadRule,
    RuleKind,
    gauss_rule,
    history_weights,
    modified_moments,
    shift_nodes,
    singular_element_integral,
)
from .solver import (
    NewtonDivergedError,
    PiecewiseSolution,
    QuadratureConvergenceError,
    SingularJacobianError,
    SolverError,
    SolverOptions,
    evaluate,
    forward_apply,
    newton,
    solve,
    steepest_descent_init,
)

__version__ = "0.1.0"

__all__ = [
    "AdaptiveOptions",
    "AdaptiveTrace",
    "BudgetExceededError",
    "adaptive_solve",
    "BenchmarkProblem",
    "BenchReport",
    "convergence_order",
    "error_E1",
    "error_E2",
    "make_benchmark",
    "perturb_rhs",
    "run_sweep",
    "ElementSolution",
    "ElementSystem",
    "ProblemAssumptionWarning",
    "ProblemSpec",
    "assemble_linear",
    "history_coeffs",
    "local_jacobian",
    "local_residual",
    "rhs_coeffs",
    "validate_problem",
    "Mesh",
    "locate",
    "sigma",
    "uniform_mesh",
    "Element",
    "JacobiParams",
    "jacobi_eval",
    "jacobi_norm_gamma",
    "shifted_eval",
    "HistoryWeights",
    "QuadRule",
    "RuleKind",
    "gauss_rule",
    "history_weights",
    "modified_moments",
    "shift_nodes",
    "singular_element_integral",
    "NewtonDivergedError",
    "PiecewiseSolution",
    "QuadratureConvergenceError",
    "SingularJacobianError",
    "SolverError",
    "SolverOptions",
    "evaluate",
    "forward_apply",
    "newton",
    "solve",
    "steepest_descent_init",
    "__version__",
]
