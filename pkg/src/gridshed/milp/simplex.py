"""Bounded-variable primal simplex over dense numpy arrays.

Every variable carries finite bounds, so the feasible region is a box
intersection and the LP can never be unbounded. Inequalities get slack
columns whose implied bounds are derived from the row's activity range;
equalities are handled by a phase-1 pass over per-row artificials.

Determinism: Dantzig pricing with lowest-index tie breaks, a Harris-style
two-pass ratio test that prefers large pivots (lowest basic index on
ties), and a switch to Bland's rule after a run of degenerate pivots.
Identical inputs produce identical pivot sequences and solutions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import SENSE_EQ, SENSE_GE, SENSE_LE

LP_OPTIMAL = "optimal"
LP_INFEASIBLE = "infeasible"
LP_NUMERIC = "numeric_failure"

_PIVOT_TOL = 1e-9      # |column entry| below this never blocks or pivots
_COST_TOL = 1e-9
_HARRIS_PAD = 1e-9     # bound stretch allowed while hunting a big pivot
_REFACTOR_EVERY = 40
_BLAND_AFTER = 100     # consecutive degenerate pivots before Bland's rule

_AT_LOWER = 0
_AT_UPPER = 1
_BASIC = 2


@dataclass
class LpResult:
    status: str
    x: np.ndarray | None  # structural variable values
    objective: float | None
    iterations: int
    message: str = ""


def _row_activity_range(row: np.ndarray, lb: np.ndarray, ub: np.ndarray) -> tuple[float, float]:
    pos = row > 0
    neg = row < 0
    lo = float(row[pos] @ lb[pos] + row[neg] @ ub[neg])
    hi = float(row[pos] @ ub[pos] + row[neg] @ lb[neg])
    return lo, hi


def solve_lp(
    c: np.ndarray,
    A: np.ndarray,
    senses: list[str],
    b: np.ndarray,
    lb: np.ndarray,
    ub: np.ndarray,
    maximize: bool,
    feas_tol: float = 1e-7,
) -> LpResult:
    """Solve min/max c'x s.t. A x {<=,>=,=} b, lb <= x <= ub.

    Returns structural values only (slacks and artificials stripped).
    """
    n = len(c)
    m = len(b)
    c = np.asarray(c, dtype=float)
    if maximize:
        c = -c

    if np.any(lb > ub + 1e-12):
        return LpResult(LP_INFEASIBLE, None, None, 0, "empty variable box")

    # Quick infeasibility screen: any row whose full activity range misses
    # its right-hand side can never be satisfied inside the box.
    for i in range(m):
        lo, hi = _row_activity_range(A[i], lb, ub)
        pad = feas_tol * (1 + abs(b[i]))
        if senses[i] == SENSE_LE and lo > b[i] + pad:
            return LpResult(LP_INFEASIBLE, None, None, 0, f"row {i} below-range")
        if senses[i] == SENSE_GE and hi < b[i] - pad:
            return LpResult(LP_INFEASIBLE, None, None, 0, f"row {i} above-range")
        if senses[i] == SENSE_EQ and (lo > b[i] + pad or hi < b[i] - pad):
            return LpResult(LP_INFEASIBLE, None, None, 0, f"row {i} out of range")

    # Equality-form system: convert >= rows to <= by negation, then attach
    # one slack per inequality with implied finite bounds.
    A_eq = A.astype(float).copy()
    b_eq = np.asarray(b, dtype=float).copy()
    slack_rows = []
    slack_hi = []
    for i in range(m):
        if senses[i] == SENSE_GE:
            A_eq[i] = -A_eq[i]
            b_eq[i] = -b_eq[i]
        if senses[i] != SENSE_EQ:
            lo, _ = _row_activity_range(A_eq[i], lb, ub)
            slack_rows.append(i)
            slack_hi.append(max(0.0, b_eq[i] - lo))
    n_slack = len(slack_rows)
    if n_slack:
        S = np.zeros((m, n_slack))
        for k, i in enumerate(slack_rows):
            S[i, k] = 1.0
        A_full = np.hstack([A_eq, S])
    else:
        A_full = A_eq
    lb_full = np.concatenate([lb, np.zeros(n_slack)])
    ub_full = np.concatenate([ub, np.array(slack_hi)])

    # Initial point: every structural column at the bound nearer zero.
    start_at_upper = np.abs(ub_full) < np.abs(lb_full)
    x0 = np.where(start_at_upper, ub_full, lb_full)
    x0[n:] = 0.0
    residual = b_eq - A_full @ x0

    # Crash basis: a slack whose implied value already sits inside its
    # bounds covers its own row; every other row gets an artificial.
    slack_col_of_row = {i: n + k for k, i in enumerate(slack_rows)}
    art_rows = []
    for i in range(m):
        k = slack_col_of_row.get(i)
        if k is None or residual[i] < -1e-12 or residual[i] > ub_full[k] + 1e-12:
            art_rows.append(i)
    n_art = len(art_rows)
    sigma = np.array([1.0 if residual[i] >= 0 else -1.0 for i in art_rows])
    art_cols = np.zeros((m, n_art))
    for k, i in enumerate(art_rows):
        art_cols[i, k] = sigma[k]
    A_ph1 = np.hstack([A_full, art_cols]) if n_art else A_full
    lb_ph1 = np.concatenate([lb_full, np.zeros(n_art)])
    ub_ph1 = np.concatenate([ub_full, np.abs(residual[art_rows])])
    c_ph1 = np.concatenate([np.zeros(A_full.shape[1]), np.ones(n_art)])

    status = np.concatenate(
        [np.where(start_at_upper, _AT_UPPER, _AT_LOWER).astype(np.int8), np.zeros(n_art, dtype=np.int8)]
    )
    basis = np.empty(m, dtype=int)
    art_base = A_full.shape[1]
    next_art = 0
    for i in range(m):
        if next_art < n_art and art_rows[next_art] == i:
            basis[i] = art_base + next_art
            next_art += 1
        else:
            basis[i] = slack_col_of_row[i]
    status[basis] = _BASIC

    kern = _Kernel(A_ph1, b_eq, lb_ph1, ub_ph1)
    if n_art:
        phase1 = kern.run(c_ph1, basis, status)
        if phase1.status != LP_OPTIMAL:
            return LpResult(LP_NUMERIC, None, None, phase1.iterations, f"phase 1: {phase1.message}")
        art_sum = float(np.sum(np.abs(kern.x[art_base:])))
        if art_sum > feas_tol * (1 + float(np.abs(b_eq).sum())):
            return LpResult(LP_INFEASIBLE, None, None, phase1.iterations, "phase 1 residual")
        # Freeze artificials at zero for phase 2.
        kern.lb[art_base:] = 0.0
        kern.ub[art_base:] = 0.0
        basis = kern.basis
        status = kern.status
    else:
        phase1 = _KernelResult(LP_OPTIMAL, 0)

    c_ph2 = np.concatenate([c, np.zeros(n_slack + n_art)])
    phase2 = kern.run(c_ph2, basis, status)
    if phase2.status != LP_OPTIMAL:
        return LpResult(
            LP_NUMERIC, None, None, phase1.iterations + phase2.iterations, f"phase 2: {phase2.message}"
        )

    x = kern.x[:n].copy()
    np.clip(x, lb, ub, out=x)
    obj = float(c @ x)
    if maximize:
        obj = -obj
    return LpResult(LP_OPTIMAL, x, obj, phase1.iterations + phase2.iterations)


@dataclass
class _KernelResult:
    status: str
    iterations: int
    message: str = ""


class _Kernel:
    """One bounded-simplex workspace shared across both phases."""

    def __init__(self, A: np.ndarray, b: np.ndarray, lb: np.ndarray, ub: np.ndarray):
        self.A = A
        self.b = b
        self.lb = lb.astype(float).copy()
        self.ub = ub.astype(float).copy()
        self.m, self.n = A.shape
        self.basis: np.ndarray | None = None
        self.status: np.ndarray | None = None
        self.x: np.ndarray | None = None
        self._binv: np.ndarray | None = None

    def _refactor(self) -> bool:
        try:
            binv = np.linalg.inv(self.A[:, self.basis])
        except np.linalg.LinAlgError:
            return False
        if not np.isfinite(binv).all():
            return False
        self._binv = binv
        return True

    def _recompute_x(self) -> None:
        x = np.where(self.status == _AT_UPPER, self.ub, self.lb)
        x[self.basis] = 0.0
        x[self.basis] = self._binv @ (self.b - self.A @ x)
        self.x = x

    def run(self, c: np.ndarray, basis: np.ndarray, status: np.ndarray) -> _KernelResult:
        self.basis = basis.copy()
        self.status = status.copy()
        if not self._refactor():
            return _KernelResult(LP_NUMERIC, 0, "singular basis")
        self._recompute_x()

        max_iter = 2000 + 40 * (self.m + self.n)
        bland = False
        degenerate_run = 0
        enterable = self.ub - self.lb > 1e-14

        for iteration in range(max_iter):
            if iteration and iteration % _REFACTOR_EVERY == 0:
                if not self._refactor():
                    return _KernelResult(LP_NUMERIC, iteration, "singular basis on refactor")
                self._recompute_x()

            y = c[self.basis] @ self._binv
            d = c - y @ self.A
            improving = (self.status != _BASIC) & enterable & (
                ((self.status == _AT_LOWER) & (d < -_COST_TOL))
                | ((self.status == _AT_UPPER) & (d > _COST_TOL))
            )
            if not improving.any():
                self._recompute_x()
                return _KernelResult(LP_OPTIMAL, iteration)

            if bland:
                e = int(np.argmax(improving))
            else:
                e = int(np.argmax(np.where(improving, np.abs(d), -1.0)))

            delta = 1.0 if self.status[e] == _AT_LOWER else -1.0
            w = self._binv @ self.A[:, e]
            dw = delta * w
            xb = self.x[self.basis]
            lbb = self.lb[self.basis]
            ubb = self.ub[self.basis]

            down = dw > _PIVOT_TOL    # basic variable moves toward its lower bound
            up = dw < -_PIVOT_TOL     # basic variable moves toward its upper bound
            blocking = down | up
            dist = np.where(down, xb - lbb, np.where(up, ubb - xb, np.inf))
            dist = np.maximum(dist, 0.0)
            absdw = np.abs(dw)
            with np.errstate(divide="ignore", invalid="ignore"):
                t_strict = np.where(blocking, dist / absdw, np.inf)
                t_harris = np.where(blocking, (dist + _HARRIS_PAD) / absdw, np.inf)

            t_flip = self.ub[e] - self.lb[e]
            t_limit = min(float(t_harris.min(initial=np.inf)), t_flip)

            if not np.isfinite(t_limit):
                return _KernelResult(LP_NUMERIC, iteration, "no blocking bound (unexpected)")

            if t_flip <= t_limit:
                # Entering variable runs to its opposite bound: no pivot.
                step = t_flip
                self.x[self.basis] = xb - step * dw
                self.x[e] = self.ub[e] if self.status[e] == _AT_LOWER else self.lb[e]
                self.status[e] = _AT_UPPER if self.status[e] == _AT_LOWER else _AT_LOWER
                degenerate_run = 0
                continue

            eligible = blocking & (t_strict <= t_limit)
            if not eligible.any():
                # Numerical corner: fall back to the strict minimum ratio.
                eligible = blocking & (t_strict <= float(t_strict.min(initial=np.inf)) + _HARRIS_PAD)
            if bland:
                rows = np.flatnonzero(eligible)
                r = int(rows[np.argmin(self.basis[rows])])
            else:
                piv_size = np.where(eligible, absdw, -1.0)
                best = piv_size.max()
                rows = np.flatnonzero(eligible & (piv_size >= best - 1e-12))
                r = int(rows[np.argmin(self.basis[rows])])

            step = max(float(t_strict[r]), 0.0)
            if step <= 1e-12:
                degenerate_run += 1
                if degenerate_run > _BLAND_AFTER:
                    bland = True
            else:
                degenerate_run = 0
                bland = False

            leaving = int(self.basis[r])
            new_xb = xb - step * dw
            self.x[self.basis] = new_xb
            self.x[e] = (self.lb[e] if delta > 0 else self.ub[e]) + delta * step
            self.x[leaving] = self.lb[leaving] if down[r] else self.ub[leaving]
            self.status[leaving] = _AT_LOWER if down[r] else _AT_UPPER
            self.status[e] = _BASIC
            self.basis[r] = e

            # Product-form update of the basis inverse.
            piv = w[r]
            if abs(piv) < _PIVOT_TOL:
                if not self._refactor():
                    return _KernelResult(LP_NUMERIC, iteration, "tiny pivot and singular refactor")
                self._recompute_x()
            else:
                self._binv[r, :] /= piv
                other = np.arange(self.m) != r
                self._binv[other, :] -= np.outer(w[other], self._binv[r, :])

        return _KernelResult(LP_NUMERIC, max_iter, "iteration limit")
