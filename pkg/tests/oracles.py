"""Independent oracles used to check the real implementations.

Everything here deliberately avoids the library's own solver and graph
code: LPs go to scipy, MILPs to exhaustive binary enumeration over scipy
LPs, islands to a from-scratch BFS, and Pareto fronts to a quadratic
dominance scan.
"""

from __future__ import annotations

import itertools
import math
from collections import deque

import numpy as np
from scipy.optimize import linprog


def scipy_lp(c, A, senses, b, lb, ub, maximize):
    """Reference LP solve. Returns (status, objective) with status in
    {"optimal", "infeasible"}."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for i, s in enumerate(senses):
        if s == "<=":
            A_ub.append(A[i])
            b_ub.append(b[i])
        elif s == ">=":
            A_ub.append(-A[i])
            b_ub.append(-b[i])
        else:
            A_eq.append(A[i])
            b_eq.append(b[i])
    obj = -np.asarray(c, dtype=float) if maximize else np.asarray(c, dtype=float)
    res = linprog(
        obj,
        A_ub=np.array(A_ub) if A_ub else None,
        b_ub=np.array(b_ub) if b_ub else None,
        A_eq=np.array(A_eq) if A_eq else None,
        b_eq=np.array(b_eq) if b_eq else None,
        bounds=list(zip(lb, ub)),
        method="highs",
    )
    if res.status == 2:
        return "infeasible", None
    if res.status != 0:
        return f"scipy-{res.status}", None
    value = -res.fun if maximize else res.fun
    return "optimal", value


def enumerate_milp(problem):
    """Exhaustive MILP oracle: fix every binary pattern, solve the inner
    LP with scipy, take the best. Patterns violating binary-only
    constraints are skipped without an LP call."""
    c, A, senses, b, lb, ub, is_binary, names = problem.to_arrays()
    maximize = problem.objective_sense == "max"
    bin_idx = np.flatnonzero(is_binary)
    free_bins = [j for j in bin_idx if lb[j] < ub[j] - 1e-12]
    fixed_vals = {j: lb[j] for j in bin_idx if lb[j] >= ub[j] - 1e-12}

    # Constraints touching only binaries can reject a pattern outright.
    bin_set = set(int(j) for j in bin_idx)
    binary_rows = [
        i for i in range(len(b)) if set(np.flatnonzero(A[i]).tolist()) <= bin_set
    ]

    best = None
    for pattern in itertools.product((0.0, 1.0), repeat=len(free_bins)):
        z = dict(zip(free_bins, pattern))
        z.update(fixed_vals)
        ok = True
        for i in binary_rows:
            lhs = sum(A[i, j] * z[j] for j in np.flatnonzero(A[i]))
            if senses[i] == "<=" and lhs > b[i] + 1e-9:
                ok = False
            elif senses[i] == ">=" and lhs < b[i] - 1e-9:
                ok = False
            elif senses[i] == "=" and abs(lhs - b[i]) > 1e-9:
                ok = False
            if not ok:
                break
        if not ok:
            continue
        lo = lb.copy()
        hi = ub.copy()
        for j, val in z.items():
            lo[j] = hi[j] = val
        status, value = scipy_lp(c, A, senses, b, lo, hi, maximize)
        if status != "optimal":
            continue
        if best is None or (maximize and value > best) or (not maximize and value < best):
            best = value
    if best is None:
        return "infeasible", None
    return "optimal", best + problem.objective_constant


def bfs_islands(network, state):
    """Island partition by plain BFS over an adjacency dict."""
    on_bus = {b.id for b in network.buses if state[("bus", b.id)] > 0.5}
    adj = {b: set() for b in on_bus}
    for line in network.lines:
        if (
            state[("line", line.id)] > 0.5
            and line.from_bus in on_bus
            and line.to_bus in on_bus
        ):
            adj[line.from_bus].add(line.to_bus)
            adj[line.to_bus].add(line.from_bus)
    seen = set()
    islands = []
    for start in sorted(on_bus):
        if start in seen:
            continue
        comp = set()
        queue = deque([start])
        seen.add(start)
        while queue:
            cur = queue.popleft()
            comp.add(cur)
            for nxt in adj[cur]:
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        islands.append(frozenset(comp))
    return set(islands)


def pareto_scan(points):
    """Quadratic dominance scan over (r_fire, d_tot) pairs.

    Mirrors the production dedupe rule: equal outcomes keep the smallest
    parameter.
    """
    ok = [p for p in points if not math.isnan(p.r_fire)]
    dedup = {}
    for p in sorted(ok, key=lambda p: p.parameter):
        dedup.setdefault((p.r_fire, p.d_tot), p)
    keep = []
    for p in dedup.values():
        dominated = False
        for q in dedup.values():
            if q is p:
                continue
            if q.d_tot >= p.d_tot and q.r_fire <= p.r_fire and (
                q.d_tot > p.d_tot or q.r_fire < p.r_fire
            ):
                dominated = True
                break
        if not dominated:
            keep.append(p)
    return sorted(keep, key=lambda p: p.r_fire)
