"""Trade-off sweeps, Pareto extraction, and comparison reports.

An alpha sweep solves the shut-off MILP across the weight grid; a
threshold sweep runs the heuristic pipeline across risk thresholds.
Points are solved concurrently but aggregated in deterministic parameter
order, and each point records its own failure rather than aborting the
sweep.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .heuristics import (
    AREA_HEURISTIC,
    TRANSMISSION_HEURISTIC,
    run_heuristic_pipeline,
)
from .milp import SolveOptions
from .network import KIND_BUS, KIND_GEN, KIND_LINE, KIND_LOAD, Network, network_fingerprint
from .risk import RiskTable, area_risk_total
from .shutoff import ShutoffConfig, ShutoffPlan, solve_shutoff

METHOD_OPS = "ops"
METHOD_TRANSMISSION = "transmission"
METHOD_AREA = "area"
METHOD_STANDARD = "standard"

SWEEP_CSV_HEADER = "method,parameter,r_fire,d_tot_mw,objective,status,solve_time_s"
SCATTER_CSV_HEADER = "line_id,r_l,abs_flow_mw,energized"


@dataclass(frozen=True)
class TradeoffPoint:
    method: str
    parameter: float
    r_fire: float
    d_tot: float
    objective: float
    status: str
    solve_time_s: float = 0.0

    @property
    def failed(self) -> bool:
        return self.status.startswith("error")


@dataclass(frozen=True)
class SweepResult:
    method: str
    points: tuple[TradeoffPoint, ...]
    network_fingerprint: str
    risk_fingerprint: str
    plans: tuple[ShutoffPlan | None, ...] = ()

    def ok_points(self) -> list[TradeoffPoint]:
        return [p for p in self.points if not p.failed]


def default_alpha_grid() -> list[float]:
    return [round(i / 100, 2) for i in range(101)]


def default_threshold_grid(
    network: Network, risk_table: RiskTable, kind: str = TRANSMISSION_HEURISTIC
) -> list[float]:
    """Integer thresholds descending from just above the largest risk to 0."""
    if kind == TRANSMISSION_HEURISTIC:
        top = max((risk_table.risk_of(KIND_LINE, l.id) for l in network.lines), default=0.0)
    else:
        top = max((area_risk_total(risk_table, network, a.id) for a in network.areas), default=0.0)
    start = int(math.ceil(top)) + 1
    return [float(t) for t in range(start, -1, -1)]


def _failure_point(method: str, parameter: float, exc: Exception) -> TradeoffPoint:
    return TradeoffPoint(
        method=method,
        parameter=parameter,
        r_fire=float("nan"),
        d_tot=float("nan"),
        objective=float("nan"),
        status=f"error: {exc}",
    )


def _run_parallel(jobs, workers: int, on_point=None):
    done = 0

    def wrap(job):
        nonlocal done
        result = job()
        done += 1
        if on_point is not None:
            on_point(done, len(jobs))
        return result

    if workers <= 1:
        return [wrap(job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return [f.result() for f in [pool.submit(wrap, job) for job in jobs]]


def _plan_point(method: str, parameter: float, plan: ShutoffPlan) -> TradeoffPoint:
    return TradeoffPoint(
        method=method,
        parameter=parameter,
        r_fire=plan.r_fire,
        d_tot=plan.d_tot,
        objective=plan.objective,
        status=plan.status,
        solve_time_s=plan.stats.wall_time_s,
    )


def sweep_alpha(
    network: Network,
    risk_table: RiskTable,
    alphas: list[float] | None = None,
    backend: str = "reference",
    options: SolveOptions | None = None,
    workers: int = 1,
    keep_plans: bool = False,
    on_point=None,
) -> SweepResult:
    """One shut-off solve per alpha; defaults to the 101-point grid."""
    alphas = sorted(default_alpha_grid() if alphas is None else alphas)
    if not alphas:
        raise ValueError("alpha grid is empty")
    for a in alphas:
        if not 0.0 <= a <= 1.0:
            raise ValueError(f"alpha {a} outside [0, 1]")
    options = options or SolveOptions()

    def run_one(alpha: float):
        try:
            return solve_shutoff(
                network, risk_table, ShutoffConfig(alpha=alpha, options=options), backend
            )
        except Exception as exc:  # recorded per-point, sweep continues
            return exc

    results = _run_parallel([lambda a=a: run_one(a) for a in alphas], workers, on_point)
    points: list[TradeoffPoint] = []
    plans: list[ShutoffPlan | None] = []
    for alpha, res in zip(alphas, results):
        if isinstance(res, Exception):
            points.append(_failure_point(METHOD_OPS, alpha, res))
            plans.append(None)
        else:
            points.append(_plan_point(METHOD_OPS, alpha, res))
            plans.append(res if keep_plans else None)
    return SweepResult(
        method=METHOD_OPS,
        points=tuple(points),
        network_fingerprint=network_fingerprint(network),
        risk_fingerprint=risk_table.fingerprint(),
        plans=tuple(plans) if keep_plans else (),
    )


def sweep_threshold(
    network: Network,
    risk_table: RiskTable,
    thresholds: list[float] | None = None,
    kind: str = TRANSMISSION_HEURISTIC,
    backend: str = "reference",
    options: SolveOptions | None = None,
    workers: int = 1,
    keep_plans: bool = False,
    on_point=None,
) -> SweepResult:
    """One heuristic-pipeline run per threshold."""
    if kind not in (TRANSMISSION_HEURISTIC, AREA_HEURISTIC):
        raise ValueError(f"unknown heuristic kind {kind!r}")
    thresholds = sorted(
        default_threshold_grid(network, risk_table, kind) if thresholds is None else thresholds
    )
    if not thresholds:
        raise ValueError("threshold grid is empty")
    options = options or SolveOptions()

    def run_one(threshold: float):
        try:
            return run_heuristic_pipeline(
                network, risk_table, kind, threshold, backend=backend, options=options
            )
        except Exception as exc:
            return exc

    results = _run_parallel([lambda t=t: run_one(t) for t in thresholds], workers, on_point)
    points: list[TradeoffPoint] = []
    plans: list[ShutoffPlan | None] = []
    for threshold, res in zip(thresholds, results):
        if isinstance(res, Exception):
            points.append(_failure_point(kind, threshold, res))
            plans.append(None)
        else:
            points.append(_plan_point(kind, threshold, res))
            plans.append(res if keep_plans else None)
    return SweepResult(
        method=kind,
        points=tuple(points),
        network_fingerprint=network_fingerprint(network),
        risk_fingerprint=risk_table.fingerprint(),
        plans=tuple(plans) if keep_plans else (),
    )


# ---------------------------------------------------------------------------
# Pareto front
# ---------------------------------------------------------------------------


def pareto_front(points: list[TradeoffPoint]) -> list[TradeoffPoint]:
    """Maximal points under (load higher, risk lower) weak dominance.

    Failed points are dropped; exact (r_fire, d_tot) duplicates keep the
    smallest parameter. Output is ordered by r_fire ascending and is
    dominance-free.
    """
    ok = [p for p in points if not p.failed and not math.isnan(p.r_fire)]
    # Deduplicate equal outcomes, keeping the smallest parameter.
    by_outcome: dict[tuple[float, float], TradeoffPoint] = {}
    for p in sorted(ok, key=lambda p: p.parameter):
        key = (p.r_fire, p.d_tot)
        if key not in by_outcome:
            by_outcome[key] = p
    candidates = sorted(by_outcome.values(), key=lambda p: (p.r_fire, -p.d_tot))
    front: list[TradeoffPoint] = []
    best_load = -math.inf
    for p in candidates:
        if p.d_tot > best_load:
            front.append(p)
            best_load = p.d_tot
    return front


def dominates(a: TradeoffPoint, b: TradeoffPoint) -> bool:
    """a weakly dominates b with at least one strict improvement."""
    return (
        a.d_tot >= b.d_tot
        and a.r_fire <= b.r_fire
        and (a.d_tot > b.d_tot or a.r_fire < b.r_fire)
    )


# ---------------------------------------------------------------------------
# Comparison report
# ---------------------------------------------------------------------------


def standard_operation_point(network: Network, risk_table: RiskTable) -> TradeoffPoint:
    """Everything energized, all load served: the no-shut-off baseline."""
    state = {key: 1.0 for key in network.component_keys()}
    from .risk import total_system_risk

    return TradeoffPoint(
        method=METHOD_STANDARD,
        parameter=0.0,
        r_fire=total_system_risk(risk_table, state),
        d_tot=network.total_demand_mw(),
        objective=network.total_demand_mw(),
        status="computed",
    )


def risk_decomposition(network: Network, risk_table: RiskTable, plan: ShutoffPlan) -> dict[str, float]:
    """Energized risk split by component type; parts sum to the total."""
    bus = sum(plan.z_bus[b.id] * risk_table.risk_of(KIND_BUS, b.id) for b in network.buses)
    line = sum(plan.z_line[l.id] * risk_table.risk_of(KIND_LINE, l.id) for l in network.lines)
    gen = sum(plan.z_gen[g.id] * risk_table.risk_of(KIND_GEN, g.id) for g in network.generators)
    load = sum(plan.x_load[d.id] * risk_table.risk_of(KIND_LOAD, d.id) for d in network.loads)
    return {
        "bus": bus,
        "line": line,
        "generator": gen,
        "load": load,
        "total": bus + line + gen + load,
    }


def line_scatter(network: Network, risk_table: RiskTable, plan: ShutoffPlan) -> list[dict]:
    """Per-line (risk, |flow|, energized) rows for the scatter output."""
    return [
        {
            "line_id": l.id,
            "r_l": risk_table.risk_of(KIND_LINE, l.id),
            "abs_flow_mw": abs(plan.p_flow[l.id]),
            "energized": int(plan.z_line[l.id]),
        }
        for l in sorted(network.lines, key=lambda l: l.id)
    ]


def _closest_point(points: list[TradeoffPoint], target_risk: float) -> TradeoffPoint:
    return min(points, key=lambda p: (abs(p.r_fire - target_risk), p.parameter))


def compare_report(
    network: Network,
    risk_table: RiskTable,
    sweeps: list[SweepResult],
    area_threshold: float | None = None,
    backend: str = "reference",
    options: SolveOptions | None = None,
    risk_fractions: tuple[float, float] = (0.5, 0.1),
) -> dict:
    """Cross-method comparison document.

    Selects, per sweep, the points whose risk is closest to the given
    fractions of standard-operation risk (medium / low analogues),
    re-solves them for per-component-type decomposition and line scatter
    data, and tabulates risk, load and solve time for every method.
    """
    if not sweeps:
        raise ValueError("at least one sweep is required")
    options = options or SolveOptions()
    standard = standard_operation_point(network, risk_table)

    report: dict = {
        "standard": {
            "total_risk": standard.r_fire,
            "load_served_mw": standard.d_tot,
            "solve_time_s": None,
        },
        "methods": {},
        "selected": [],
        "scatter": {},
    }
    labels = ("medium_risk", "low_risk")

    def resolve_plan(method: str, parameter: float) -> ShutoffPlan:
        if method == METHOD_OPS:
            return solve_shutoff(
                network, risk_table, ShutoffConfig(alpha=parameter, options=options), backend
            )
        return run_heuristic_pipeline(
            network, risk_table, method, parameter, backend=backend, options=options
        )

    for sweep in sweeps:
        ok = sweep.ok_points()
        if not ok:
            report["methods"][sweep.method] = {"points": len(sweep.points), "usable": 0}
            continue
        report["methods"][sweep.method] = {
            "points": len(sweep.points),
            "usable": len(ok),
            "front": [
                {"parameter": p.parameter, "total_risk": p.r_fire, "load_served_mw": p.d_tot}
                for p in pareto_front(ok)
            ],
        }
        for label, fraction in zip(labels, risk_fractions):
            chosen = _closest_point(ok, fraction * standard.r_fire)
            plan = resolve_plan(sweep.method, chosen.parameter)
            entry = {
                "method": sweep.method,
                "label": label,
                "parameter": chosen.parameter,
                "total_risk": plan.r_fire,
                "load_served_mw": plan.d_tot,
                "solve_time_s": chosen.solve_time_s,
                "risk_by_component_type": risk_decomposition(network, risk_table, plan),
            }
            report["selected"].append(entry)
            report["scatter"][f"{sweep.method}_{label}"] = line_scatter(network, risk_table, plan)

    if area_threshold is not None:
        plan = run_heuristic_pipeline(
            network, risk_table, AREA_HEURISTIC, area_threshold, backend=backend, options=options
        )
        report["selected"].append(
            {
                "method": METHOD_AREA,
                "label": "regional_shutdown",
                "parameter": area_threshold,
                "total_risk": plan.r_fire,
                "load_served_mw": plan.d_tot,
                "solve_time_s": plan.stats.wall_time_s,
                "risk_by_component_type": risk_decomposition(network, risk_table, plan),
            }
        )
        report["scatter"]["area_regional_shutdown"] = line_scatter(network, risk_table, plan)
    return report


# ---------------------------------------------------------------------------
# Delimited output
# ---------------------------------------------------------------------------


def _num(x: float) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return format(x, ".10g")


def sweep_to_csv(sweeps: list[SweepResult] | SweepResult, standard: TradeoffPoint | None = None) -> str:
    if isinstance(sweeps, SweepResult):
        sweeps = [sweeps]
    lines = [SWEEP_CSV_HEADER]
    all_points = [p for s in sweeps for p in s.points]
    if standard is not None:
        all_points.append(standard)
    for p in all_points:
        lines.append(
            ",".join(
                [
                    p.method,
                    _num(p.parameter),
                    _num(p.r_fire),
                    _num(p.d_tot),
                    _num(p.objective),
                    p.status.replace(",", ";"),
                    _num(p.solve_time_s),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def scatter_to_csv(rows: list[dict]) -> str:
    lines = [SCATTER_CSV_HEADER]
    for row in rows:
        lines.append(
            f"{row['line_id']},{_num(row['r_l'])},{_num(row['abs_flow_mw'])},{row['energized']}"
        )
    return "\n".join(lines) + "\n"
