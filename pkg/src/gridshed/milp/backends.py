"""Solver backend registry.

Two built-in backends share one contract: "reference" is the in-tree
branch-and-bound (deterministic, desk scale) and "highs" wraps
scipy.optimize.milp for large instances. All returned solutions are
re-checked by the independent evaluator before being handed back;
a backend claiming feasibility for an infeasible point is downgraded
to a numeric failure.
"""

from __future__ import annotations

import time
from typing import Callable, Protocol

import numpy as np

from .bnb import solve_branch_and_bound, solve_lp_relaxation
from .model import (
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
    integrality_violations,
)


class Backend(Protocol):
    def __call__(self, problem: MilpProblem, options: SolveOptions) -> MilpSolution: ...


_REGISTRY: dict[str, Backend] = {}

DEFAULT_BACKEND = "reference"


def register_backend(name: str, backend: Backend) -> None:
    _REGISTRY[name] = backend


def available_backends() -> list[str]:
    return sorted(_REGISTRY)


def solve_with(name: str, problem: MilpProblem, options: SolveOptions | None = None) -> MilpSolution:
    """Solve through a named backend, then audit the result independently."""
    backend = _REGISTRY.get(name)
    if backend is None:
        raise MilpError(f"unknown backend {name!r}; registered: {', '.join(available_backends())}")
    options = options or SolveOptions()
    solution = backend(problem, options)
    solution.stats.backend = name
    if solution.ok:
        bad = constraint_violations(problem, solution.values, max(options.absolute_feasibility_tol, 1e-9) * 10)
        bad += integrality_violations(problem, solution.values, options.integrality_tol * 10)
        if bad:
            worst = max(bad, key=lambda kv: kv[1])
            return MilpSolution(
                STATUS_NUMERIC,
                None,
                {},
                SolveStats(backend=name, message=f"backend solution violates {worst[0]} by {worst[1]:.3e}"),
            )
    return solution


def solve(problem: MilpProblem, options: SolveOptions | None = None, backend: str = DEFAULT_BACKEND) -> MilpSolution:
    return solve_with(backend, problem, options)


# ---------------------------------------------------------------------------
# Built-in backends
# ---------------------------------------------------------------------------


def _reference_backend(problem: MilpProblem, options: SolveOptions) -> MilpSolution:
    return solve_branch_and_bound(problem, options)


def _highs_backend(problem: MilpProblem, options: SolveOptions) -> MilpSolution:
    from scipy.optimize import Bounds, LinearConstraint, milp

    c, A, senses, b, lb, ub, is_binary, names = problem.to_arrays()
    sign = -1.0 if problem.objective_sense == "max" else 1.0
    lo = np.where([s == "<=" for s in senses], -np.inf, b)
    hi = np.where([s == ">=" for s in senses], np.inf, b)

    opts: dict = {"presolve": True, "mip_rel_gap": options.relative_gap}
    if options.time_limit_s is not None:
        opts["time_limit"] = options.time_limit_s
    if options.node_limit is not None:
        opts["node_limit"] = options.node_limit

    t0 = time.perf_counter()
    constraints = [LinearConstraint(A, lo, hi)] if len(b) else []
    res = milp(
        sign * c,
        constraints=constraints,
        integrality=is_binary.astype(int),
        bounds=Bounds(lb, ub),
        options=opts,
    )
    wall = time.perf_counter() - t0

    # scipy status codes: 0 optimal, 1 iteration/time limit, 2 infeasible,
    # 3 unbounded, 4 numerical trouble.
    stats = SolveStats(
        backend="highs",
        nodes=int(getattr(res, "mip_node_count", 0) or 0),
        wall_time_s=wall,
        gap=float(res.mip_gap) if getattr(res, "mip_gap", None) is not None else None,
        message=str(res.message),
    )
    if res.status == 2:
        return MilpSolution(STATUS_INFEASIBLE, None, {}, stats)
    if res.status == 3:
        return MilpSolution(STATUS_UNBOUNDED, None, {}, stats)
    if res.x is None:
        return MilpSolution(STATUS_LIMIT if res.status == 1 else STATUS_NUMERIC, None, {}, stats)

    x = np.asarray(res.x, dtype=float)
    x[is_binary] = np.round(x[is_binary])
    np.clip(x, lb, ub, out=x)
    values = {name: float(x[j]) for j, name in enumerate(names)}
    objective = problem.objective_value(values)
    status = STATUS_OPTIMAL if res.status == 0 else STATUS_LIMIT
    return MilpSolution(status, objective, values, stats)


register_backend("reference", _reference_backend)
register_backend("highs", _highs_backend)

__all__ = [
    "available_backends",
    "register_backend",
    "solve",
    "solve_lp_relaxation",
    "solve_with",
    "DEFAULT_BACKEND",
]
