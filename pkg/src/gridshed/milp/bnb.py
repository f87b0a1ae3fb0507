"""Reference branch-and-bound over the bounded-variable simplex.

Best-bound node selection with lazy bound re-insertion (a child inherits
its parent's bound until its own LP is solved), most-fractional binary
branching with lowest-index tie breaks, interval bound tightening at
every node, and a rounding-repair heuristic that seeds the incumbent
from the root relaxation. Deterministic throughout; large instances
belong on an external backend.
"""

from __future__ import annotations

import heapq
import time

import numpy as np

from .model import (
    STATUS_INFEASIBLE,
    STATUS_LIMIT,
    STATUS_NUMERIC,
    STATUS_OPTIMAL,
    MilpProblem,
    MilpSolution,
    SolveOptions,
    SolveStats,
)
from .simplex import LP_INFEASIBLE, LP_OPTIMAL, solve_lp

_TIGHTEN_PASSES = 4


def solve_lp_relaxation(problem: MilpProblem, options: SolveOptions | None = None) -> MilpSolution:
    """Solve the problem with integrality dropped to variable bounds."""
    options = options or SolveOptions()
    c, A, senses, b, lb, ub, _, names = problem.to_arrays()
    t0 = time.perf_counter()
    res = solve_lp(c, A, senses, b, lb, ub, problem.objective_sense == "max", options.absolute_feasibility_tol)
    stats = SolveStats(backend="reference", lp_solves=1, wall_time_s=time.perf_counter() - t0, message=res.message)
    if res.status == LP_OPTIMAL:
        values = {name: float(res.x[j]) for j, name in enumerate(names)}
        return MilpSolution(STATUS_OPTIMAL, res.objective + problem.objective_constant, values, stats)
    if res.status == LP_INFEASIBLE:
        return MilpSolution(STATUS_INFEASIBLE, None, {}, stats)
    return MilpSolution(STATUS_NUMERIC, None, {}, stats)


def _tighten_bounds(A, senses, b, lb, ub, is_binary, feas_tol) -> bool:
    """Interval propagation plus integer rounding. Returns False on a
    provably empty box. Preserves every mixed-integer feasible point."""
    m, _ = A.shape
    rows = [(i, np.flatnonzero(A[i])) for i in range(m)]
    for _ in range(_TIGHTEN_PASSES):
        changed = False
        for i, nz in rows:
            if len(nz) == 0:
                continue
            coefs = A[i, nz]
            lo_terms = np.where(coefs > 0, coefs * lb[nz], coefs * ub[nz])
            hi_terms = np.where(coefs > 0, coefs * ub[nz], coefs * lb[nz])
            lo_sum = lo_terms.sum()
            hi_sum = hi_terms.sum()
            sense = senses[i]
            for pos, j in enumerate(nz):
                a = coefs[pos]
                rest_lo = lo_sum - lo_terms[pos]
                rest_hi = hi_sum - hi_terms[pos]
                if sense in ("<=", "="):
                    cap = b[i] - rest_lo  # a * x_j <= cap
                    if a > 0 and cap / a < ub[j] - 1e-12:
                        ub[j] = cap / a
                        changed = True
                    elif a < 0 and cap / a > lb[j] + 1e-12:
                        lb[j] = cap / a
                        changed = True
                if sense in (">=", "="):
                    floor_ = b[i] - rest_hi  # a * x_j >= floor_
                    if a > 0 and floor_ / a > lb[j] + 1e-12:
                        lb[j] = floor_ / a
                        changed = True
                    elif a < 0 and floor_ / a < ub[j] - 1e-12:
                        ub[j] = floor_ / a
                        changed = True
            if changed:
                lo_terms = np.where(coefs > 0, coefs * lb[nz], coefs * ub[nz])
                hi_terms = np.where(coefs > 0, coefs * ub[nz], coefs * lb[nz])
                lo_sum = lo_terms.sum()
                hi_sum = hi_terms.sum()
        bin_idx = np.flatnonzero(is_binary)
        snap_ub = bin_idx[(ub[bin_idx] < 1 - 1e-9) & (ub[bin_idx] > 1e-9)]
        snap_lb = bin_idx[(lb[bin_idx] > 1e-9) & (lb[bin_idx] < 1 - 1e-9)]
        if len(snap_ub):
            ub[snap_ub] = 0.0
            changed = True
        if len(snap_lb):
            lb[snap_lb] = 1.0
            changed = True
        if np.any(lb > ub + feas_tol):
            return False
        np.minimum(lb, ub, out=lb)
        if not changed:
            break
    return True


class _Tree:
    """Shared state for one branch-and-bound run."""

    def __init__(self, problem: MilpProblem, options: SolveOptions):
        self.options = options
        c, A, senses, b, lb, ub, is_binary, names = problem.to_arrays()
        self.c, self.A, self.senses, self.b = c, A, senses, b
        self.root_lb, self.root_ub = lb.copy(), ub.copy()
        self.is_binary = is_binary
        self.bin_idx = np.flatnonzero(is_binary)
        self.names = names
        self.maximize = problem.objective_sense == "max"
        self.sign = 1.0 if self.maximize else -1.0
        self.feas_tol = options.absolute_feasibility_tol
        self.int_tol = options.integrality_tol
        self.stats = SolveStats(backend="reference")
        self.incumbent_x: np.ndarray | None = None
        self.incumbent_obj: float | None = None  # problem sense
        # Coupling structure for incumbent repair: rows z_a >= z_b become
        # (a, b) index pairs meaning "b on requires a on".
        self.requires: list[tuple[int, int]] = []
        for i in range(len(b)):
            nz = np.flatnonzero(A[i])
            if len(nz) == 2 and senses[i] == ">=" and b[i] == 0.0:
                ja, jb = nz
                ca, cb = A[i, ja], A[i, jb]
                if is_binary[ja] and is_binary[jb]:
                    if ca == 1.0 and cb == -1.0:
                        self.requires.append((ja, jb))
                    elif ca == -1.0 and cb == 1.0:
                        self.requires.append((jb, ja))

    def lp(self, lo, hi):
        self.stats.lp_solves += 1
        return solve_lp(self.c, self.A, self.senses, self.b, lo, hi, self.maximize, self.feas_tol)

    def fractionality(self, x) -> np.ndarray:
        return np.abs(x[self.bin_idx] - np.round(x[self.bin_idx]))

    def offer_incumbent(self, x: np.ndarray, objective: float) -> None:
        if self.incumbent_obj is None or self.sign * objective > self.sign * self.incumbent_obj + 1e-12:
            snapped = x.copy()
            snapped[self.bin_idx] = np.round(snapped[self.bin_idx])
            self.incumbent_x = snapped
            self.incumbent_obj = objective

    def dive_for_incumbent(self, x0: np.ndarray, obj0: float, lo: np.ndarray, hi: np.ndarray) -> None:
        """Bulk-fix fractional binaries and re-solve until integral.

        Fractional on/off variables almost always mean "partially used"
        (a line carrying a share of its limit), so anything clearly above
        zero rounds up; switching a component on can never lose
        feasibility, only a little objective.
        """
        lo = lo.copy()
        hi = hi.copy()
        x, obj = x0, obj0
        for final in (False, False, True):
            frac = self.fractionality(x)
            if frac.max(initial=0.0) <= self.int_tol:
                self.offer_incumbent(x, obj)
                return
            vals = np.where(x[self.bin_idx] > 0.01, 1.0, 0.0)
            # Zero-cost binaries can sit basic at fractional values forever,
            # so the last pass pins every binary, not just the fractional.
            chosen = np.ones(len(self.bin_idx), bool) if final else frac > self.int_tol
            trial_lo = lo.copy()
            trial_hi = hi.copy()
            idx = self.bin_idx[chosen]
            trial_lo[idx] = np.maximum(vals[chosen], lo[idx])
            trial_hi[idx] = np.minimum(np.maximum(vals[chosen], lo[idx]), hi[idx])
            if np.any(trial_lo > trial_hi):
                return
            if not _tighten_bounds(
                self.A, self.senses, self.b, trial_lo, trial_hi, self.is_binary, self.feas_tol
            ):
                return
            res = self.lp(trial_lo, trial_hi)
            if res.status != LP_OPTIMAL:
                return
            lo, hi = trial_lo, trial_hi
            x, obj = res.x, res.objective
        frac = self.fractionality(x)
        if frac.max(initial=0.0) <= self.int_tol:
            self.offer_incumbent(x, obj)


def solve_branch_and_bound(problem: MilpProblem, options: SolveOptions | None = None) -> MilpSolution:
    """Exact MILP solve; status optimal means proven within relative_gap."""
    options = options or SolveOptions()
    t0 = time.perf_counter()

    if not problem.binary_names():
        relaxed = solve_lp_relaxation(problem, options)
        relaxed.stats.backend = "reference"
        return relaxed

    tree = _Tree(problem, options)
    stats = tree.stats

    def finish(status, obj, values_arr, gap=None, message=""):
        stats.wall_time_s = time.perf_counter() - t0
        stats.gap = gap
        stats.message = message
        values = {} if values_arr is None else {
            name: float(values_arr[j]) for j, name in enumerate(tree.names)
        }
        objective = None if obj is None else obj + problem.objective_constant
        return MilpSolution(status, objective, values, stats)

    lb = tree.root_lb.copy()
    ub = tree.root_ub.copy()
    if not _tighten_bounds(tree.A, tree.senses, tree.b, lb, ub, tree.is_binary, tree.feas_tol):
        return finish(STATUS_INFEASIBLE, None, None, message="tightening proved infeasible")

    root = tree.lp(lb, ub)
    if root.status == LP_INFEASIBLE:
        return finish(STATUS_INFEASIBLE, None, None)
    if root.status != LP_OPTIMAL:
        return finish(STATUS_NUMERIC, None, None, message=root.message)

    sign = tree.sign
    if tree.fractionality(root.x).max(initial=0.0) <= tree.int_tol:
        tree.offer_incumbent(root.x, root.objective)
        return finish(STATUS_OPTIMAL, tree.incumbent_obj, tree.incumbent_x, gap=0.0)

    tree.dive_for_incumbent(root.x, root.objective, lb, ub)

    # Heap keyed by negated max-form bound; children reuse the parent's
    # bound until their own LP is solved (res is None until then).
    counter = 0
    heap: list = [(-sign * root.objective, 0, lb, ub, root)]
    limit_reason = ""

    while heap:
        if options.node_limit is not None and stats.nodes >= options.node_limit:
            limit_reason = "node limit"
            break
        if options.time_limit_s is not None and time.perf_counter() - t0 > options.time_limit_s:
            limit_reason = "time limit"
            break

        neg_bound, _, lo, hi, res = heapq.heappop(heap)
        bound = -neg_bound
        if tree.incumbent_obj is not None:
            gap = (bound - sign * tree.incumbent_obj) / max(1.0, abs(tree.incumbent_obj))
            if gap <= options.relative_gap:
                return finish(STATUS_OPTIMAL, tree.incumbent_obj, tree.incumbent_x, gap=max(gap, 0.0))

        if res is None:
            lp_res = tree.lp(lo, hi)
            if lp_res.status == LP_INFEASIBLE:
                continue
            if lp_res.status != LP_OPTIMAL:
                return finish(STATUS_NUMERIC, None, None, message=lp_res.message)
            true_bound = sign * lp_res.objective
            if tree.incumbent_obj is not None and true_bound <= sign * tree.incumbent_obj + 1e-12:
                continue
            if tree.fractionality(lp_res.x).max(initial=0.0) <= tree.int_tol:
                tree.offer_incumbent(lp_res.x, lp_res.objective)
                continue
            if heap and true_bound < -heap[0][0] - 1e-12:
                counter += 1
                heapq.heappush(heap, (-true_bound, counter, lo, hi, lp_res))
                continue
            res = lp_res
            bound = true_bound

        stats.nodes += 1
        if stats.nodes % 25 == 0:
            tree.dive_for_incumbent(res.x, res.objective, lo, hi)

        frac = tree.fractionality(res.x)
        fractional = np.flatnonzero(frac > tree.int_tol)
        # Branch on binaries that actually move the objective; fractional
        # zero-cost binaries stall the bound, so try to close such a
        # subtree with a dive instead of enumerating them.
        costed = fractional[np.abs(tree.c[tree.bin_idx[fractional]]) > 1e-12]
        if len(costed) == 0:
            tree.dive_for_incumbent(res.x, res.objective, lo, hi)
            if tree.incumbent_obj is not None:
                node_gap = (bound - sign * tree.incumbent_obj) / max(1.0, abs(tree.incumbent_obj))
                if node_gap <= options.relative_gap:
                    continue
            candidates = fractional
        else:
            candidates = costed
        scores = np.minimum(frac[candidates], 1.0 - frac[candidates])
        j = tree.bin_idx[candidates[int(np.argmax(scores))]]

        for val in (0.0, 1.0):
            clo = lo.copy()
            chi = hi.copy()
            if val == 0.0:
                chi[j] = 0.0
            else:
                clo[j] = 1.0
            if not _tighten_bounds(tree.A, tree.senses, tree.b, clo, chi, tree.is_binary, tree.feas_tol):
                continue
            counter += 1
            heapq.heappush(heap, (-bound, counter, clo, chi, None))

    if limit_reason:
        gap = None
        if tree.incumbent_obj is not None and heap:
            gap = (-heap[0][0] - sign * tree.incumbent_obj) / max(1.0, abs(tree.incumbent_obj))
        return finish(
            STATUS_LIMIT, tree.incumbent_obj, tree.incumbent_x, gap=gap, message=limit_reason
        )

    if tree.incumbent_obj is None:
        return finish(STATUS_INFEASIBLE, None, None)
    return finish(STATUS_OPTIMAL, tree.incumbent_obj, tree.incumbent_x, gap=0.0)
