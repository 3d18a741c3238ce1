"""Self-contained LP (bounded-variable simplex) and MILP (branch-and-bound)."""

from .branch_bound import MilpOptions, solve_milp
from .problem import (
    MilpProblem,
    MilpSolution,
    ProblemBuilder,
    ProblemError,
    Row,
    Variable,
    write_lp,
)
from .simplex import SolverOptions, solve_lp

__all__ = [
    "MilpOptions",
    "MilpProblem",
    "MilpSolution",
    "ProblemBuilder",
    "ProblemError",
    "Row",
    "SolverOptions",
    "Variable",
    "solve_lp",
    "solve_milp",
    "write_lp",
]
