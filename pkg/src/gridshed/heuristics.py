"""Threshold benchmark pipeline: shut off by risk, then maximize load.

Step 1 picks the forced-off set either per area (every component of an
area whose total risk reaches the threshold) or per line (every line at
or above the line threshold). Step 2 solves maximum load delivery with
those components constrained off, and a post-pass de-energizes islands
that serve no load at all. Thresholds compare inclusively (>=).
"""

from __future__ import annotations

from dataclasses import dataclass

from .milp import SolveOptions
from .network import (
    ComponentKey,
    KIND_BUS,
    KIND_GEN,
    KIND_LINE,
    KIND_LOAD,
    Network,
    energized_islands,
)
from .risk import RiskTable, area_risk_total, components_in_area, total_system_risk
from .shutoff import (
    FORCE_OFF,
    Pin,
    ShutoffConfig,
    ShutoffPlan,
    solve_shutoff,
    with_components_off,
)

AREA_HEURISTIC = "area"
TRANSMISSION_HEURISTIC = "transmission"


@dataclass(frozen=True)
class ForcedOffSet:
    components: frozenset[ComponentKey]

    def __len__(self) -> int:
        return len(self.components)

    def __contains__(self, key: ComponentKey) -> bool:
        return key in self.components


def area_heuristic(network: Network, risk_table: RiskTable, area_threshold: float) -> ForcedOffSet:
    """All components of every area whose total risk reaches the threshold.

    A line spanning a triggered and an untriggered area is shut off: any
    exposure term inside a triggered area pulls the component in.
    """
    triggered = [
        area.id
        for area in network.areas
        if area_risk_total(risk_table, network, area.id) >= area_threshold
    ]
    members: set[ComponentKey] = set()
    for area_id in triggered:
        members |= components_in_area(risk_table, area_id)
    return ForcedOffSet(frozenset(members))


def transmission_heuristic(network: Network, risk_table: RiskTable, line_threshold: float) -> ForcedOffSet:
    """Lines at or above the risk threshold; never buses, gens or loads."""
    members = {
        (KIND_LINE, line.id)
        for line in network.lines
        if risk_table.risk_of(KIND_LINE, line.id) >= line_threshold
    }
    return ForcedOffSet(frozenset(members))


def solve_max_load_delivery(
    network: Network,
    risk_table: RiskTable,
    forced_off: ForcedOffSet,
    backend: str = "reference",
    options: SolveOptions | None = None,
) -> ShutoffPlan:
    """Maximize served load with the forced-off set de-energized.

    Identical constraint set to the shut-off MILP with alpha = 0: risk is
    ignored entirely, and components outside the forced set stay free, so
    unneeded equipment may remain energized.
    """
    for key in forced_off.components:
        if not network.has_component(*key):
            raise ValueError(f"forced-off set names unknown component {key[0]} {key[1]}")
    pins = tuple(Pin(component=key, state=FORCE_OFF) for key in sorted(forced_off.components))
    config = ShutoffConfig(alpha=0.0, pins=pins, options=options or SolveOptions())
    return solve_shutoff(network, risk_table, config, backend=backend)


def prune_dead_islands(network: Network, risk_table: RiskTable, plan: ShutoffPlan) -> ShutoffPlan:
    """De-energize every island that serves no load; repeats to fixpoint.

    Served load is untouched, so d_tot never changes; r_fire can only
    fall. Idempotent.
    """
    current = plan
    while True:
        state = current.component_state()
        dead: set[ComponentKey] = set()
        for island in energized_islands(network, state):
            served = sum(
                current.x_load[d] * network.load_by_id[d].demand_mw for d in island.loads
            )
            if served <= 1e-9:
                dead.update((KIND_BUS, b) for b in island.buses)
                dead.update((KIND_LINE, l) for l in island.lines)
                dead.update((KIND_GEN, g) for g in island.generators)
                dead.update((KIND_LOAD, d) for d in island.loads)
        if not dead:
            return current
        new_state = dict(state)
        for key in dead:
            new_state[key] = 0.0
        current = with_components_off(
            current, dead, r_fire=total_system_risk(risk_table, new_state)
        )


def run_heuristic_pipeline(
    network: Network,
    risk_table: RiskTable,
    kind: str,
    threshold: float,
    backend: str = "reference",
    options: SolveOptions | None = None,
) -> ShutoffPlan:
    """Threshold selection, max-load-delivery solve, dead-island pruning."""
    if kind == AREA_HEURISTIC:
        forced = area_heuristic(network, risk_table, threshold)
    elif kind == TRANSMISSION_HEURISTIC:
        forced = transmission_heuristic(network, risk_table, threshold)
    else:
        raise ValueError(f"unknown heuristic kind {kind!r}")
    plan = solve_max_load_delivery(network, risk_table, forced, backend=backend, options=options)
    return prune_dead_islands(network, risk_table, plan)
