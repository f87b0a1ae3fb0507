"""Generic MILP layer: problem model, reference solver, backend registry."""

from .backends import (
    DEFAULT_BACKEND,
    available_backends,
    register_backend,
    solve,
    solve_with,
)
from .bnb import solve_branch_and_bound, solve_lp_relaxation
from .model import (
    BINARY,
    CONTINUOUS,
    SENSE_EQ,
    SENSE_GE,
    SENSE_LE,
    STATUS_FEASIBLE,
    STATUS_INFEASIBLE,
    STATUS_LIMIT,
    STATUS_NUMERIC,
    STATUS_OPTIMAL,
    STATUS_UNBOUNDED,
    MilpError,
    MilpProblem,
    MilpSolution,
    SolveOptions,
    SolveStats,
    constraint_violations,
    dump_lp,
    integrality_violations,
)

__all__ = [
    "BINARY",
    "CONTINUOUS",
    "DEFAULT_BACKEND",
    "MilpError",
    "MilpProblem",
    "MilpSolution",
    "SENSE_EQ",
    "SENSE_GE",
    "SENSE_LE",
    "STATUS_FEASIBLE",
    "STATUS_INFEASIBLE",
    "STATUS_LIMIT",
    "STATUS_NUMERIC",
    "STATUS_OPTIMAL",
    "STATUS_UNBOUNDED",
    "SolveOptions",
    "SolveStats",
    "available_backends",
    "constraint_violations",
    "dump_lp",
    "integrality_violations",
    "register_backend",
    "solve",
    "solve_branch_and_bound",
    "solve_lp_relaxation",
    "solve_with",
]
