"""Mixed-integer linear program representation.

A MilpProblem holds named variables with finite bounds, linear
constraints, and a linear objective. Problems are built incrementally and
treated as immutable once handed to a solver. The independent feasibility
evaluator here is what tests and callers trust, never the solver's own
claim.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

CONTINUOUS = "continuous"
BINARY = "binary"

SENSE_LE = "<="
SENSE_GE = ">="
SENSE_EQ = "="

STATUS_OPTIMAL = "optimal"
STATUS_FEASIBLE = "feasible"
STATUS_INFEASIBLE = "infeasible"
STATUS_UNBOUNDED = "unbounded"
STATUS_LIMIT = "limit_hit"
STATUS_NUMERIC = "numeric_failure"


class MilpError(ValueError):
    """Raised on malformed problems or solver misuse."""


@dataclass(frozen=True)
class Variable:
    name: str
    lb: float
    ub: float
    kind: str = CONTINUOUS


@dataclass(frozen=True)
class Constraint:
    name: str
    terms: tuple[tuple[str, float], ...]
    sense: str
    rhs: float


@dataclass
class SolveStats:
    backend: str = ""
    nodes: int = 0
    lp_solves: int = 0
    wall_time_s: float = 0.0
    gap: float | None = None
    message: str = ""


@dataclass
class MilpSolution:
    status: str
    objective: float | None
    values: dict[str, float]
    stats: SolveStats = field(default_factory=SolveStats)

    @property
    def ok(self) -> bool:
        return self.status in (STATUS_OPTIMAL, STATUS_FEASIBLE)


@dataclass
class SolveOptions:
    relative_gap: float = 1e-6
    absolute_feasibility_tol: float = 1e-7
    integrality_tol: float = 1e-6
    time_limit_s: float | None = None
    node_limit: int | None = None

    def __post_init__(self) -> None:
        for name in ("relative_gap", "absolute_feasibility_tol", "integrality_tol"):
            if getattr(self, name) < 0:
                raise MilpError(f"{name} must be >= 0")
        if self.time_limit_s is not None and self.time_limit_s <= 0:
            raise MilpError("time_limit_s must be positive")
        if self.node_limit is not None and self.node_limit <= 0:
            raise MilpError("node_limit must be positive")


class MilpProblem:
    """Named-variable MILP with finite bounds on every variable."""

    def __init__(self, objective_sense: str = "max") -> None:
        if objective_sense not in ("max", "min"):
            raise MilpError(f"objective sense must be max or min, got {objective_sense!r}")
        self.objective_sense = objective_sense
        self.variables: list[Variable] = []
        self.constraints: list[Constraint] = []
        self.objective_terms: dict[str, float] = {}
        self.objective_constant: float = 0.0
        self._index: dict[str, int] = {}

    # -- construction ----------------------------------------------------

    def add_variable(self, name: str, lb: float, ub: float, kind: str = CONTINUOUS) -> None:
        if name in self._index:
            raise MilpError(f"variable {name!r} declared twice")
        if not (math.isfinite(lb) and math.isfinite(ub)):
            raise MilpError(f"variable {name!r}: bounds must be finite")
        if lb > ub:
            raise MilpError(f"variable {name!r}: lb {lb} > ub {ub}")
        if kind == BINARY and (lb < 0 or ub > 1):
            raise MilpError(f"binary variable {name!r}: bounds must lie in [0, 1]")
        if kind not in (CONTINUOUS, BINARY):
            raise MilpError(f"variable {name!r}: unknown kind {kind!r}")
        self._index[name] = len(self.variables)
        self.variables.append(Variable(name, float(lb), float(ub), kind))

    def add_constraint(
        self,
        terms: list[tuple[str, float]],
        sense: str,
        rhs: float,
        name: str | None = None,
    ) -> None:
        if sense not in (SENSE_LE, SENSE_GE, SENSE_EQ):
            raise MilpError(f"unknown constraint sense {sense!r}")
        for var, _ in terms:
            if var not in self._index:
                raise MilpError(f"constraint references undeclared variable {var!r}")
        if name is None:
            name = f"c{len(self.constraints)}"
        self.constraints.append(Constraint(name, tuple(terms), sense, float(rhs)))

    def set_objective(self, terms: list[tuple[str, float]], constant: float = 0.0) -> None:
        for var, _ in terms:
            if var not in self._index:
                raise MilpError(f"objective references undeclared variable {var!r}")
        self.objective_terms = {var: float(coef) for var, coef in terms}
        self.objective_constant = float(constant)

    # -- views -------------------------------------------------------------

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)

    def var_index(self, name: str) -> int:
        return self._index[name]

    def binary_names(self) -> list[str]:
        return [v.name for v in self.variables if v.kind == BINARY]

    def to_arrays(self):
        """Dense numpy view: (c, A, senses, b, lb, ub, is_binary, names).

        The objective vector c is in the problem's own sense (not negated).
        """
        n = len(self.variables)
        m = len(self.constraints)
        c = np.zeros(n)
        for var, coef in self.objective_terms.items():
            c[self._index[var]] = coef
        A = np.zeros((m, n))
        b = np.zeros(m)
        senses: list[str] = []
        for i, con in enumerate(self.constraints):
            for var, coef in con.terms:
                A[i, self._index[var]] += coef
            b[i] = con.rhs
            senses.append(con.sense)
        lb = np.array([v.lb for v in self.variables])
        ub = np.array([v.ub for v in self.variables])
        is_binary = np.array([v.kind == BINARY for v in self.variables])
        names = [v.name for v in self.variables]
        return c, A, senses, b, lb, ub, is_binary, names

    def objective_value(self, values: dict[str, float]) -> float:
        total = self.objective_constant
        for var, coef in self.objective_terms.items():
            total += coef * values[var]
        return total


# ---------------------------------------------------------------------------
# Independent feasibility evaluation
# ---------------------------------------------------------------------------


def constraint_violations(
    problem: MilpProblem, values: dict[str, float], feas_tol: float = 1e-7
) -> list[tuple[str, float]]:
    """All constraint and bound violations above tolerance.

    Tolerance is applied with mild relative scaling so large right-hand
    sides do not spuriously fail. Returns (name, violation amount) pairs.
    """
    out: list[tuple[str, float]] = []
    for v in problem.variables:
        x = values[v.name]
        scale = 1.0 + max(abs(v.lb), abs(v.ub))
        if x < v.lb - feas_tol * scale:
            out.append((f"bound:{v.name}", v.lb - x))
        if x > v.ub + feas_tol * scale:
            out.append((f"bound:{v.name}", x - v.ub))
    for con in problem.constraints:
        lhs = sum(coef * values[var] for var, coef in con.terms)
        scale = 1.0 + abs(con.rhs)
        if con.sense == SENSE_LE:
            excess = lhs - con.rhs
        elif con.sense == SENSE_GE:
            excess = con.rhs - lhs
        else:
            excess = abs(lhs - con.rhs)
        if excess > feas_tol * scale:
            out.append((con.name, excess))
    return out


def integrality_violations(
    problem: MilpProblem, values: dict[str, float], int_tol: float = 1e-6
) -> list[tuple[str, float]]:
    out = []
    for v in problem.variables:
        if v.kind == BINARY:
            x = values[v.name]
            frac = abs(x - round(x))
            if frac > int_tol:
                out.append((v.name, frac))
    return out


# ---------------------------------------------------------------------------
# Debug dump
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return format(x, ".17g")


def dump_lp(problem: MilpProblem) -> str:
    """LP-style text serialization, bit-exact across runs."""
    lines = [f"\\ gridshed problem dump, {problem.num_variables} vars, {problem.num_constraints} rows"]
    lines.append("Maximize" if problem.objective_sense == "max" else "Minimize")
    terms = " + ".join(
        f"{_fmt(coef)} {var}" for var, coef in sorted(problem.objective_terms.items())
    )
    obj = f" obj: {terms}" if terms else " obj: 0"
    if problem.objective_constant:
        obj += f" + {_fmt(problem.objective_constant)}"
    lines.append(obj)
    lines.append("Subject To")
    sense_txt = {SENSE_LE: "<=", SENSE_GE: ">=", SENSE_EQ: "="}
    for con in problem.constraints:
        body = " + ".join(f"{_fmt(coef)} {var}" for var, coef in con.terms)
        lines.append(f" {con.name}: {body or '0'} {sense_txt[con.sense]} {_fmt(con.rhs)}")
    lines.append("Bounds")
    for v in problem.variables:
        lines.append(f" {_fmt(v.lb)} <= {v.name} <= {_fmt(v.ub)}")
    binaries = problem.binary_names()
    if binaries:
        lines.append("Binary")
        for name in binaries:
            lines.append(f" {name}")
    lines.append("End")
    return "\n".join(lines) + "\n"
