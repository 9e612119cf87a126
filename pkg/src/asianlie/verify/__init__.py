"""Numerical and symbolic verification: finite differences, flows, the
numerical symmetry oracle, the financial transform and reductions."""

from .check import (
    DEFAULT_K,
    DEFAULT_SWEEP,
    FAIL,
    INCONCLUSIVE,
    PASS,
    EpsilonResult,
    Region,
    SymmetryCheck,
    check_symmetry_numerically,
    default_grid,
    default_region,
    discretization_estimate,
    numeric_solution,
    transformed_field,
)
from .fd import (
    ConvergenceStudy,
    Grid,
    NumericalSolution,
    StabilityError,
    convergence_x,
    convergence_y,
    interior_residual,
    load_dump,
    manufactured,
    solve_fd,
    solve_fd_richardson,
)
from .financial import FinancialModel, TransformReport, from_canonical, pricing_operator, to_canonical, verify_transform
from .flow import Flow, flow
from .kernels import BACKEND
from .reduce import Reduction, ReductionNotAutomated, characteristic_system, reduce
