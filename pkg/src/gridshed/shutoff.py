"""Risk-aware optimal shut-off problem: build, solve, audit.

The MILP trades served load against wildfire risk through a single
weight alpha in [0, 1]:

    maximize  (1 - alpha) * sum_d x_d w_d D_d  -  alpha * R_system

over per-component energization binaries (buses, generators, lines),
fractional load service x_d, DC power flow with on/off relaxation of the
flow-angle coupling, and generator dispatch limits. A de-energized line
carries exactly zero flow; an energized line obeys flow = b * (theta_i -
theta_j) and its thermal limit. Loads, generators and lines can only be
energized when their bus is; lines require both endpoint buses.

Flow-angle constraints for a de-energized line are relaxed by a constant
2 * Theta, where Theta bounds every bus angle magnitude, so they can
never bind while the line is off.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import yaml

from .milp import (
    BINARY,
    STATUS_OPTIMAL,
    MilpProblem,
    MilpSolution,
    SolveOptions,
    SolveStats,
    solve_with,
)
from .network import (
    ComponentKey,
    Island,
    KIND_BUS,
    KIND_GEN,
    KIND_LINE,
    KIND_LOAD,
    Network,
    energized_islands,
)
from .risk import RiskTable, total_system_risk

FORCE_ON = "force_on"
FORCE_OFF = "force_off"


class PinError(ValueError):
    """Invalid pin: unknown component, bad state, or duplicate."""


class PinConflictError(ValueError):
    """Pins that contradict each other make the problem infeasible."""


class ShutoffSolveError(RuntimeError):
    """The backend failed to produce a usable solution."""


@dataclass(frozen=True)
class Pin:
    component: ComponentKey
    state: str

    def __post_init__(self) -> None:
        if self.state not in (FORCE_ON, FORCE_OFF):
            raise PinError(f"pin state must be {FORCE_ON} or {FORCE_OFF}, got {self.state!r}")


@dataclass(frozen=True)
class ShutoffConfig:
    alpha: float
    pins: tuple[Pin, ...] = ()
    options: SolveOptions = field(default_factory=SolveOptions)

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")


@dataclass(frozen=True)
class ThetaBound:
    theta_max: float

    @property
    def relax_constant(self) -> float:
        return 2.0 * self.theta_max


@dataclass(frozen=True)
class ShutoffPlan:
    """One solved operating state with recomputed headline metrics."""

    z_bus: Mapping[int, int]
    z_gen: Mapping[int, int]
    z_line: Mapping[int, int]
    x_load: Mapping[int, float]
    p_gen: Mapping[int, float]
    p_flow: Mapping[int, float]
    theta: Mapping[int, float]
    d_tot: float
    r_fire: float
    objective: float
    status: str
    alpha: float
    stats: SolveStats = field(default_factory=SolveStats)

    def component_state(self) -> dict[ComponentKey, float]:
        state: dict[ComponentKey, float] = {}
        state.update({(KIND_BUS, i): float(z) for i, z in self.z_bus.items()})
        state.update({(KIND_GEN, g): float(z) for g, z in self.z_gen.items()})
        state.update({(KIND_LINE, l): float(z) for l, z in self.z_line.items()})
        state.update({(KIND_LOAD, d): float(x) for d, x in self.x_load.items()})
        return state


def theta_bound(network: Network) -> ThetaBound:
    """Conservative bound on any achievable angle magnitude.

    Sums each line's largest angle difference at its thermal limit; no
    path through the network can accumulate more spread than that.
    """
    total = 0.0
    for line in network.lines:
        total += line.thermal_limit_mw / (line.susceptance_pu * network.base_mva)
    return ThetaBound(theta_max=total)


def _check_pins(network: Network, pins: Sequence[Pin]) -> None:
    seen: set[ComponentKey] = set()
    by_key: dict[ComponentKey, str] = {}
    for pin in pins:
        kind, eid = pin.component
        if not network.has_component(kind, eid):
            raise PinError(f"pin references unknown component {kind} {eid}")
        if pin.component in seen:
            raise PinError(f"duplicate pin on {kind} {eid}")
        if kind == KIND_LOAD and pin.state == FORCE_ON:
            raise PinError(
                f"load {eid}: service cannot be pinned on (physics may forbid it); pin its bus instead"
            )
        seen.add(pin.component)
        by_key[pin.component] = pin.state

    # Static contradictions: a component forced on needs its bus(es) on.
    for pin in pins:
        kind, eid = pin.component
        if pin.state != FORCE_ON:
            continue
        if kind == KIND_LINE:
            line = network.line_by_id[eid]
            for end in (line.from_bus, line.to_bus):
                if by_key.get((KIND_BUS, end)) == FORCE_OFF:
                    raise PinConflictError(
                        f"line {eid} forced on but endpoint bus {end} forced off"
                    )
        elif kind == KIND_GEN:
            bus = network.gen_by_id[eid].bus
            if by_key.get((KIND_BUS, bus)) == FORCE_OFF:
                raise PinConflictError(f"generator {eid} forced on but bus {bus} forced off")


def build_shutoff_milp(
    network: Network, risk_table: RiskTable, config: ShutoffConfig
) -> MilpProblem:
    """Assemble the full shut-off MILP for one alpha and pin set."""
    _check_pins(network, config.pins)
    alpha = config.alpha
    bound = theta_bound(network)
    theta_max = bound.theta_max
    relax = bound.relax_constant
    base = network.base_mva

    pin_state = {pin.component: pin.state for pin in config.pins}

    def z_bounds(key: ComponentKey) -> tuple[float, float]:
        state = pin_state.get(key)
        if state == FORCE_OFF:
            return 0.0, 0.0
        if state == FORCE_ON:
            return 1.0, 1.0
        return 0.0, 1.0

    p = MilpProblem("max")
    for b in network.buses:
        lo, hi = z_bounds((KIND_BUS, b.id))
        p.add_variable(f"z_bus_{b.id}", lo, hi, BINARY)
    for g in network.generators:
        lo, hi = z_bounds((KIND_GEN, g.id))
        p.add_variable(f"z_gen_{g.id}", lo, hi, BINARY)
    for l in network.lines:
        lo, hi = z_bounds((KIND_LINE, l.id))
        p.add_variable(f"z_line_{l.id}", lo, hi, BINARY)
    for d in network.loads:
        hi = 0.0 if pin_state.get((KIND_LOAD, d.id)) == FORCE_OFF else 1.0
        p.add_variable(f"x_load_{d.id}", 0.0, hi)
    for g in network.generators:
        p.add_variable(f"p_gen_{g.id}", 0.0, g.p_max_mw)
    for l in network.lines:
        p.add_variable(f"p_flow_{l.id}", -l.thermal_limit_mw, l.thermal_limit_mw)
    for b in network.buses:
        p.add_variable(f"theta_{b.id}", -theta_max, theta_max)

    # Component coupling: nothing energized on a dead bus.
    for d in network.loads:
        p.add_constraint(
            [(f"z_bus_{d.bus}", 1.0), (f"x_load_{d.id}", -1.0)], ">=", 0.0,
            name=f"couple_load_{d.id}",
        )
    for g in network.generators:
        p.add_constraint(
            [(f"z_bus_{g.bus}", 1.0), (f"z_gen_{g.id}", -1.0)], ">=", 0.0,
            name=f"couple_gen_{g.id}",
        )
    for l in network.lines:
        for end in (l.from_bus, l.to_bus):
            p.add_constraint(
                [(f"z_bus_{end}", 1.0), (f"z_line_{l.id}", -1.0)], ">=", 0.0,
                name=f"couple_line_{l.id}_bus_{end}",
            )

    # Dispatch limits tied to the unit's state.
    for g in network.generators:
        p.add_constraint(
            [(f"p_gen_{g.id}", 1.0), (f"z_gen_{g.id}", -g.p_max_mw)], "<=", 0.0,
            name=f"gen_max_{g.id}",
        )
        p.add_constraint(
            [(f"p_gen_{g.id}", 1.0), (f"z_gen_{g.id}", -g.p_min_mw)], ">=", 0.0,
            name=f"gen_min_{g.id}",
        )

    # DC flow with on/off relaxation, plus thermal limits forcing zero
    # flow on de-energized lines.
    for l in network.lines:
        stiffness = l.susceptance_pu * base  # MW per radian
        big = stiffness * relax
        p.add_constraint(
            [
                (f"p_flow_{l.id}", 1.0),
                (f"theta_{l.from_bus}", -stiffness),
                (f"theta_{l.to_bus}", stiffness),
                (f"z_line_{l.id}", big),
            ],
            "<=",
            big,
            name=f"flow_upper_{l.id}",
        )
        p.add_constraint(
            [
                (f"p_flow_{l.id}", 1.0),
                (f"theta_{l.from_bus}", -stiffness),
                (f"theta_{l.to_bus}", stiffness),
                (f"z_line_{l.id}", -big),
            ],
            ">=",
            -big,
            name=f"flow_lower_{l.id}",
        )
        p.add_constraint(
            [(f"p_flow_{l.id}", 1.0), (f"z_line_{l.id}", -l.thermal_limit_mw)], "<=", 0.0,
            name=f"thermal_upper_{l.id}",
        )
        p.add_constraint(
            [(f"p_flow_{l.id}", 1.0), (f"z_line_{l.id}", l.thermal_limit_mw)], ">=", 0.0,
            name=f"thermal_lower_{l.id}",
        )

    # Nodal balance: generation plus net imports covers served load.
    for b in network.buses:
        terms: list[tuple[str, float]] = []
        for g in network.gens_at_bus[b.id]:
            terms.append((f"p_gen_{g}", 1.0))
        for line_id in network.lines_at_bus[b.id]:
            line = network.line_by_id[line_id]
            terms.append((f"p_flow_{line_id}", 1.0 if line.to_bus == b.id else -1.0))
        for d in network.loads_at_bus[b.id]:
            terms.append((f"x_load_{d}", -network.load_by_id[d].demand_mw))
        p.add_constraint(terms, "=", 0.0, name=f"balance_bus_{b.id}")

    objective: list[tuple[str, float]] = []
    for d in network.loads:
        coef = (1.0 - alpha) * d.weight * d.demand_mw - alpha * risk_table.risk_of(KIND_LOAD, d.id)
        objective.append((f"x_load_{d.id}", coef))
    for b in network.buses:
        objective.append((f"z_bus_{b.id}", -alpha * risk_table.risk_of(KIND_BUS, b.id)))
    for g in network.generators:
        objective.append((f"z_gen_{g.id}", -alpha * risk_table.risk_of(KIND_GEN, g.id)))
    for l in network.lines:
        objective.append((f"z_line_{l.id}", -alpha * risk_table.risk_of(KIND_LINE, l.id)))
    p.set_objective(objective)
    return p


def extract_plan(
    network: Network,
    risk_table: RiskTable,
    config: ShutoffConfig,
    solution: MilpSolution,
) -> ShutoffPlan:
    """Turn a MILP solution into a plan, recomputing d_tot and r_fire
    from the rounded states rather than trusting the objective."""
    if not solution.ok:
        raise ShutoffSolveError(f"no plan available: solver status {solution.status} ({solution.stats.message})")
    vals = solution.values
    int_tol = config.options.integrality_tol

    def as_binary(name: str) -> int:
        return int(round(vals[name]))

    def snapped(x: float) -> float:
        if abs(x) <= int_tol:
            return 0.0
        if abs(x - 1.0) <= int_tol:
            return 1.0
        return min(1.0, max(0.0, x))

    z_bus = {b.id: as_binary(f"z_bus_{b.id}") for b in network.buses}
    z_gen = {g.id: as_binary(f"z_gen_{g.id}") for g in network.generators}
    z_line = {l.id: as_binary(f"z_line_{l.id}") for l in network.lines}
    x_load = {d.id: snapped(vals[f"x_load_{d.id}"]) for d in network.loads}
    p_gen = {g.id: vals[f"p_gen_{g.id}"] for g in network.generators}
    p_flow = {l.id: vals[f"p_flow_{l.id}"] for l in network.lines}
    theta = {b.id: vals[f"theta_{b.id}"] for b in network.buses}

    state: dict[ComponentKey, float] = {}
    state.update({(KIND_BUS, i): float(z) for i, z in z_bus.items()})
    state.update({(KIND_GEN, g): float(z) for g, z in z_gen.items()})
    state.update({(KIND_LINE, l): float(z) for l, z in z_line.items()})
    state.update({(KIND_LOAD, d): x for d, x in x_load.items()})

    d_tot = sum(x_load[d.id] * d.demand_mw for d in network.loads)
    r_fire = total_system_risk(risk_table, state)
    return ShutoffPlan(
        z_bus=z_bus,
        z_gen=z_gen,
        z_line=z_line,
        x_load=x_load,
        p_gen=p_gen,
        p_flow=p_flow,
        theta=theta,
        d_tot=d_tot,
        r_fire=r_fire,
        objective=solution.objective,
        status=solution.status,
        alpha=config.alpha,
        stats=solution.stats,
    )


def solve_shutoff(
    network: Network,
    risk_table: RiskTable,
    config: ShutoffConfig,
    backend: str = "reference",
) -> ShutoffPlan:
    """Build and solve the shut-off MILP, returning the extracted plan.

    Raises PinConflictError when the instance is infeasible, which with a
    free all-off fallback can only come from contradictory pins.
    """
    problem = build_shutoff_milp(network, risk_table, config)
    solution = solve_with(backend, problem, config.options)
    if solution.status == "infeasible":
        raise PinConflictError("problem infeasible: pins contradict each other")
    return extract_plan(network, risk_table, config, solution)


# ---------------------------------------------------------------------------
# Independent plan audit
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PlanAudit:
    d_tot: float
    r_fire: float
    max_balance_residual_mw: float
    max_limit_violation_mw: float
    islands: tuple[Island, ...]
    violations: tuple[str, ...]

    @property
    def clean(self) -> bool:
        return not self.violations


def evaluate_plan(
    network: Network,
    risk_table: RiskTable,
    plan: ShutoffPlan,
    tol_mw: float = 1e-6,
) -> PlanAudit:
    """Recompute every quantity from the raw plan values.

    Flags any constraint violation above ``tol_mw``; violations are data,
    not errors. This audit never trusts the solver's own numbers.
    """
    base = network.base_mva
    violations: list[str] = []
    max_limit = 0.0

    def flag(amount: float, text: str) -> None:
        nonlocal max_limit
        max_limit = max(max_limit, amount)
        if amount > tol_mw:
            violations.append(text)

    for d in network.loads:
        x = plan.x_load[d.id]
        if x < -tol_mw or x > 1 + tol_mw:
            violations.append(f"load {d.id}: served fraction {x} outside [0, 1]")
        over = (x - plan.z_bus[d.bus]) * max(d.demand_mw, 1.0)
        flag(over, f"load {d.id}: served while bus {d.bus} is de-energized")

    for g in network.generators:
        z = plan.z_gen[g.id]
        pg = plan.p_gen[g.id]
        if z > plan.z_bus[g.bus]:
            flag(pg if pg > 0 else 1.0, f"generator {g.id}: energized on dead bus {g.bus}")
        if z == 0:
            flag(abs(pg), f"generator {g.id}: dispatch {pg:.6f} MW while off")
        else:
            flag(g.p_min_mw - pg, f"generator {g.id}: dispatch {pg:.6f} below minimum {g.p_min_mw}")
            flag(pg - g.p_max_mw, f"generator {g.id}: dispatch {pg:.6f} above maximum {g.p_max_mw}")

    for l in network.lines:
        z = plan.z_line[l.id]
        pf = plan.p_flow[l.id]
        for end in (l.from_bus, l.to_bus):
            if z > plan.z_bus[end]:
                flag(max(abs(pf), 1.0), f"line {l.id}: energized into dead bus {end}")
        if z == 0:
            flag(abs(pf), f"line {l.id}: carries {pf:.6f} MW while de-energized")
        else:
            expected = l.susceptance_pu * base * (plan.theta[l.from_bus] - plan.theta[l.to_bus])
            flag(abs(pf - expected), f"line {l.id}: flow {pf:.6f} MW deviates from angle law {expected:.6f}")
            flag(abs(pf) - l.thermal_limit_mw, f"line {l.id}: |flow| {abs(pf):.6f} exceeds limit {l.thermal_limit_mw}")

    max_balance = 0.0
    for b in network.buses:
        acc = 0.0
        for g in network.gens_at_bus[b.id]:
            acc += plan.p_gen[g]
        for line_id in network.lines_at_bus[b.id]:
            line = network.line_by_id[line_id]
            acc += plan.p_flow[line_id] if line.to_bus == b.id else -plan.p_flow[line_id]
        for d in network.loads_at_bus[b.id]:
            acc -= plan.x_load[d] * network.load_by_id[d].demand_mw
        max_balance = max(max_balance, abs(acc))
        if abs(acc) > tol_mw:
            violations.append(f"bus {b.id}: power balance residual {acc:.6f} MW")

    state = plan.component_state()
    d_tot = sum(plan.x_load[d.id] * d.demand_mw for d in network.loads)
    r_fire = total_system_risk(risk_table, state)
    islands = tuple(energized_islands(network, state))
    return PlanAudit(
        d_tot=d_tot,
        r_fire=r_fire,
        max_balance_residual_mw=max_balance,
        max_limit_violation_mw=max(max_limit, 0.0),
        islands=islands,
        violations=tuple(violations),
    )


# ---------------------------------------------------------------------------
# Plan serialization
# ---------------------------------------------------------------------------


def plan_to_document(plan: ShutoffPlan, forced_off: Sequence[ComponentKey] = ()) -> dict:
    """Stable-ordered mapping form of a plan, ready for YAML/JSON."""
    doc = {
        "alpha": plan.alpha,
        "status": plan.status,
        "objective": plan.objective,
        "d_tot_mw": plan.d_tot,
        "r_fire": plan.r_fire,
        "buses": [
            {"id": i, "energized": int(plan.z_bus[i]), "theta_rad": plan.theta[i]}
            for i in sorted(plan.z_bus)
        ],
        "generators": [
            {"id": g, "energized": int(plan.z_gen[g]), "p_mw": plan.p_gen[g]}
            for g in sorted(plan.z_gen)
        ],
        "lines": [
            {"id": l, "energized": int(plan.z_line[l]), "flow_mw": plan.p_flow[l]}
            for l in sorted(plan.z_line)
        ],
        "loads": [
            {"id": d, "served_fraction": plan.x_load[d]} for d in sorted(plan.x_load)
        ],
        "solver": {
            "backend": plan.stats.backend,
            "nodes": plan.stats.nodes,
            "lp_solves": plan.stats.lp_solves,
            "wall_time_s": plan.stats.wall_time_s,
        },
    }
    if forced_off:
        doc["forced_off"] = [{"kind": k, "id": i} for k, i in sorted(forced_off)]
    return doc


def serialize_plan(plan: ShutoffPlan, forced_off: Sequence[ComponentKey] = ()) -> str:
    return yaml.safe_dump(plan_to_document(plan, forced_off), sort_keys=False)


def with_components_off(plan: ShutoffPlan, components: set[ComponentKey], r_fire: float) -> ShutoffPlan:
    """Copy a plan with the given components switched off and metrics
    updated; used by island pruning."""
    z_bus = dict(plan.z_bus)
    z_gen = dict(plan.z_gen)
    z_line = dict(plan.z_line)
    x_load = dict(plan.x_load)
    p_gen = dict(plan.p_gen)
    p_flow = dict(plan.p_flow)
    theta = dict(plan.theta)
    for kind, eid in components:
        if kind == KIND_BUS:
            z_bus[eid] = 0
            theta[eid] = 0.0
        elif kind == KIND_GEN:
            z_gen[eid] = 0
            p_gen[eid] = 0.0
        elif kind == KIND_LINE:
            z_line[eid] = 0
            p_flow[eid] = 0.0
        elif kind == KIND_LOAD:
            x_load[eid] = 0.0
    return replace(
        plan,
        z_bus=z_bus,
        z_gen=z_gen,
        z_line=z_line,
        x_load=x_load,
        p_gen=p_gen,
        p_flow=p_flow,
        theta=theta,
        r_fire=r_fire,
    )
