"""milpheur: desk-scale MILP primal heuristics, kernels, and benchmarking."""

from .core import (
    BINARY,
    CONTINUOUS,
    EQ,
    FEASIBLE,
    GE,
    INF,
    INFEASIBLE,
    INTEGER,
    LE,
    UNCHECKED,
    FeasibilityReport,
    LinearConstraint,
    MilpError,
    MilpInstance,
    Solution,
    VariableDef,
    check_feasibility,
    evaluate_objective,
    make_solution,
)
from .lpio import parse_lp_file, read_lp_file, write_lp_file

__version__ = "0.1.0"

__all__ = [
    "BINARY",
    "CONTINUOUS",
    "EQ",
    "FEASIBLE",
    "GE",
    "INF",
    "INFEASIBLE",
    "INTEGER",
    "LE",
    "UNCHECKED",
    "FeasibilityReport",
    "LinearConstraint",
    "MilpError",
    "MilpInstance",
    "Solution",
    "VariableDef",
    "check_feasibility",
    "evaluate_objective",
    "make_solution",
    "parse_lp_file",
    "read_lp_file",
    "write_lp_file",
    "__version__",
]
