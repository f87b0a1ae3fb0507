import math
from dataclasses import replace

import pytest

from gridshed.milp import SolveOptions
from gridshed.shutoff import (
    Pin,
    PinConflictError,
    PinError,
    ShutoffConfig,
    build_shutoff_milp,
    evaluate_plan,
    extract_plan,
    plan_to_document,
    serialize_plan,
    solve_shutoff,
    theta_bound,
)

from .conftest import SMALL_CORPUS, load_corpus
from .oracles import enumerate_milp


def test_theta_bound_single_line(two_bus):
    network, _ = two_bus
    # T=100 MW, susceptance 10 pu on a 100 MVA base: 0.1 rad at the limit.
    bound = theta_bound(network)
    assert bound.theta_max == pytest.approx(0.1)
    assert bound.relax_constant == pytest.approx(0.2)


def test_theta_bound_additivity():
    text = """
format_version: 1
areas: [{id: 1}]
buses: [{id: 1, area_id: 1}, {id: 2, area_id: 1}]
lines:
  - {id: 1, from_bus: 1, to_bus: 2, susceptance_pu: 10.0, thermal_limit_mw: 100.0, voltage_kv: 230.0}
  - {id: 2, from_bus: 1, to_bus: 2, susceptance_pu: 10.0, thermal_limit_mw: 100.0, voltage_kv: 230.0}
generators: []
loads: []
"""
    from gridshed.network import parse_case

    assert theta_bound(parse_case(text)).theta_max == pytest.approx(0.2)


def test_theta_bound_triangle_hand_sum(triangle):
    network, _ = triangle
    # three identical lines: 120 / (12 * 100) = 0.1 rad each
    assert theta_bound(network).theta_max == pytest.approx(0.3)


def test_build_two_bus_structure(two_bus):
    network, table = two_bus
    problem = build_shutoff_milp(network, table, ShutoffConfig(alpha=0.5))
    # 2 z_bus + 1 z_gen + 1 z_line + 1 x + 1 p_gen + 1 p_flow + 2 theta
    assert problem.num_variables == 9
    names = {v.name for v in problem.variables}
    assert {"z_bus_1", "z_bus_2", "z_gen_1", "z_line_1", "x_load_1", "p_gen_1", "p_flow_1", "theta_1", "theta_2"} == names
    # coupling 4 (load, gen, line at both ends) + gen limits 2
    # + flow relax 2 + thermal 2 + balance 2
    assert problem.num_constraints == 12
    by_prefix = {}
    for con in problem.constraints:
        by_prefix.setdefault(con.name.split("_")[0], []).append(con)
    assert len(by_prefix["couple"]) == 4
    assert len(by_prefix["gen"]) == 2
    assert len(by_prefix["flow"]) == 2
    assert len(by_prefix["thermal"]) == 2
    assert len(by_prefix["balance"]) == 2


def test_alpha_zero_objective_ignores_risk(two_bus):
    network, table = two_bus
    problem = build_shutoff_milp(network, table, ShutoffConfig(alpha=0.0))
    for name, coef in problem.objective_terms.items():
        if name.startswith("z_"):
            assert coef == 0.0
    assert problem.objective_terms["x_load_1"] == pytest.approx(50.0)


def test_force_off_pin_fixes_bounds(two_bus):
    network, table = two_bus
    config = ShutoffConfig(alpha=0.1, pins=(Pin(("line", 1), "force_off"),))
    problem = build_shutoff_milp(network, table, config)
    var = problem.variables[problem.var_index("z_line_1")]
    assert (var.lb, var.ub) == (0.0, 0.0)


def test_pin_unknown_component(two_bus):
    network, table = two_bus
    with pytest.raises(PinError, match="unknown"):
        build_shutoff_milp(network, table, ShutoffConfig(alpha=0.1, pins=(Pin(("line", 99), "force_off"),)))


def test_pin_duplicate_rejected(two_bus):
    network, table = two_bus
    pins = (Pin(("line", 1), "force_off"), Pin(("line", 1), "force_on"))
    with pytest.raises(PinError, match="duplicate"):
        build_shutoff_milp(network, table, ShutoffConfig(alpha=0.1, pins=pins))


def test_pin_load_force_on_rejected(two_bus):
    network, table = two_bus
    with pytest.raises(PinError, match="pinned on"):
        build_shutoff_milp(network, table, ShutoffConfig(alpha=0.1, pins=(Pin(("load", 1), "force_on"),)))


def test_contradictory_pins_raise(two_bus):
    network, table = two_bus
    pins = (Pin(("line", 1), "force_on"), Pin(("bus", 2), "force_off"))
    with pytest.raises(PinConflictError):
        solve_shutoff(network, table, ShutoffConfig(alpha=0.1, pins=pins))


def test_two_bus_low_alpha_serves_everything(two_bus):
    network, table = two_bus
    plan = solve_shutoff(network, table, ShutoffConfig(alpha=0.01))
    assert plan.d_tot == pytest.approx(50.0)
    assert all(plan.z_bus.values()) and all(plan.z_line.values())
    # objective recomputation contract
    assert plan.objective == pytest.approx(0.99 * 50.0 - 0.01 * plan.r_fire)


def test_alpha_one_turns_everything_off(two_bus):
    network, table = two_bus
    plan = solve_shutoff(network, table, ShutoffConfig(alpha=1.0))
    assert plan.d_tot == 0.0
    assert plan.r_fire == 0.0
    assert not any(plan.z_line.values())


@pytest.mark.parametrize("alpha", [0.0, 0.01, 0.2, 0.5, 1.0])
def test_two_bus_matches_enumeration(two_bus, alpha):
    network, table = two_bus
    config = ShutoffConfig(alpha=alpha)
    problem = build_shutoff_milp(network, table, config)
    plan = solve_shutoff(network, table, config)
    status, expected = enumerate_milp(problem)
    assert status == "optimal"
    assert plan.objective == pytest.approx(expected, abs=1e-6)


def test_triangle_alpha_half_matches_enumeration(triangle):
    network, table = triangle
    config = ShutoffConfig(alpha=0.5)
    plan = solve_shutoff(network, table, config)
    status, expected = enumerate_milp(build_shutoff_milp(network, table, config))
    assert status == "optimal"
    assert plan.objective == pytest.approx(expected, abs=1e-6)


def test_force_on_keeps_component_energized(triangle):
    network, table = triangle
    pins = (Pin(("line", 3), "force_on"),)
    plan = solve_shutoff(network, table, ShutoffConfig(alpha=1.0, pins=pins))
    assert plan.z_line[3] == 1
    assert plan.z_bus[1] == 1 and plan.z_bus[3] == 1  # coupling holds


@pytest.mark.parametrize("name", SMALL_CORPUS)
@pytest.mark.parametrize("alpha", [0.0, 0.15, 0.6])
def test_solved_plans_satisfy_invariants(name, alpha):
    network, table = load_corpus(name)
    plan = solve_shutoff(network, table, ShutoffConfig(alpha=alpha))
    audit = evaluate_plan(network, table, plan)
    assert audit.clean, audit.violations
    assert audit.max_balance_residual_mw <= 1e-6
    assert audit.max_limit_violation_mw <= 1e-6
    # recomputed metrics agree with the plan's own
    assert audit.d_tot == pytest.approx(plan.d_tot)
    assert audit.r_fire == pytest.approx(plan.r_fire)
    # objective consistency with the weighted service sum
    weighted = sum(
        plan.x_load[d.id] * d.weight * d.demand_mw for d in network.loads
    )
    assert plan.objective == pytest.approx(
        (1 - alpha) * weighted - alpha * plan.r_fire, abs=1e-5
    )


def test_audit_flags_dead_line_flow(two_bus):
    network, table = two_bus
    plan = solve_shutoff(network, table, ShutoffConfig(alpha=0.0))
    broken = replace(plan, z_line={1: 0}, p_flow={1: 10.0})
    audit = evaluate_plan(network, table, broken)
    assert not audit.clean
    assert any("while de-energized" in v for v in audit.violations)
    assert audit.max_limit_violation_mw >= 10.0


def test_audit_reports_balance_residual(two_bus):
    network, table = two_bus
    plan = solve_shutoff(network, table, ShutoffConfig(alpha=0.0))
    broken = replace(plan, p_gen={1: plan.p_gen[1] - 5.0})
    audit = evaluate_plan(network, table, broken)
    assert audit.max_balance_residual_mw == pytest.approx(5.0)
    assert any("balance residual" in v for v in audit.violations)


def test_audit_flags_live_line_angle_violation(two_bus):
    network, table = two_bus
    plan = solve_shutoff(network, table, ShutoffConfig(alpha=0.0))
    broken = replace(plan, theta={1: 0.0, 2: 0.0})
    audit = evaluate_plan(network, table, broken)
    assert any("angle law" in v for v in audit.violations)


def test_plan_document_stable_order(two_bus):
    network, table = two_bus
    plan = solve_shutoff(network, table, ShutoffConfig(alpha=0.25))
    doc = plan_to_document(plan)
    assert list(doc.keys()) == [
        "alpha", "status", "objective", "d_tot_mw", "r_fire",
        "buses", "generators", "lines", "loads", "solver",
    ]
    text_a = serialize_plan(plan)
    text_b = serialize_plan(plan)
    assert text_a == text_b


def test_min_generation_forces_unit_off():
    network, table = load_corpus("two_bus_minload")
    plan = solve_shutoff(network, table, ShutoffConfig(alpha=0.0))
    # p_min 30 > demand 10: the unit cannot run, so nothing is served.
    assert plan.d_tot == 0.0
    assert plan.z_gen[1] == 0
    assert plan.p_gen[1] == 0.0
