import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridshed.network import Line, parse_case
from gridshed.risk import (
    AreaRisk,
    Exposure,
    ExposureTerm,
    RiskInputError,
    area_risk_total,
    build_risk_table,
    component_risk,
    line_exposure,
    load_risk_table,
    total_system_risk,
)

from .conftest import load_corpus
from .test_network import make_state


def _line(length, kv=230.0):
    return Line(1, 1, 2, 10.0, 100.0, kv, length)


def test_line_exposure_splits_by_segment_length():
    exp = line_exposure(_line(40.0), [(1, 30.0), (2, 10.0)], km_per_segment=10.0)
    assert [(t.area_id, t.weight) for t in exp.terms] == [(1, 3.0), (2, 1.0)]


def test_line_exposure_low_voltage_kappa():
    exp = line_exposure(_line(10.0, kv=138.0), [(1, 10.0)])
    assert exp.terms[0].kappa == 2.0
    assert exp.terms[0].weight == 1.0


def test_line_exposure_high_voltage_kappa():
    exp = line_exposure(_line(10.0, kv=230.0), [(1, 10.0)])
    assert exp.terms[0].kappa == 1.0


def test_line_exposure_zero_length():
    exp = line_exposure(_line(0.0), [])
    assert exp.terms == ()
    assert component_risk(exp, {1: AreaRisk(1, 4.0)}).value == 0.0


def test_line_exposure_length_mismatch():
    with pytest.raises(RiskInputError, match="geography"):
        line_exposure(_line(40.0), [(1, 15.0)])


def test_component_risk_sums_terms():
    exp = Exposure(("line", 1), (ExposureTerm(1, 1.0, 3.0), ExposureTerm(2, 2.0, 1.0)))
    risks = {1: AreaRisk(1, 2.0), 2: AreaRisk(2, 4.0)}
    assert component_risk(exp, risks).value == pytest.approx(14.0)


def test_component_risk_zero_kappa_underground():
    exp = Exposure(("line", 1), (ExposureTerm(1, 0.0, 5.0),))
    assert component_risk(exp, {1: AreaRisk(1, 4.0)}).value == 0.0


def test_component_risk_extreme_zone_bus():
    exp = Exposure(("bus", 1), (ExposureTerm(1, 1.0, 1.0),))
    assert component_risk(exp, {1: AreaRisk(1, 4.0)}).value == 4.0


def test_component_risk_unknown_area():
    exp = Exposure(("bus", 1), (ExposureTerm(9, 1.0, 1.0),))
    with pytest.raises(RiskInputError, match="unknown area"):
        component_risk(exp, {1: AreaRisk(1, 1.0)})


def test_build_table_zero_rho_triangle(triangle):
    network, _ = triangle
    table = build_risk_table(network, {1: AreaRisk(1, 0.0)})
    assert len(table) == len(network.component_keys())
    assert all(v == 0.0 for v in table.values.values())


def test_build_table_unit_triangle(triangle):
    network, table = triangle
    # rho=1 everywhere, kappa=1 (230 kV lines), 10 km lines: risk 1 each.
    assert len(table) == 9
    assert all(v == pytest.approx(1.0) for v in table.values.values())


def test_build_table_defaults_disabled():
    network, _ = load_corpus("two_bus")
    with pytest.raises(RiskInputError, match="defaults disabled"):
        build_risk_table(network, {1: AreaRisk(1, 1.0)}, exposures={}, use_defaults=False)


def test_total_system_risk_all_off(triangle):
    network, table = triangle
    assert total_system_risk(table, make_state(network, 0.0, 0.0, 0.0, 0.0)) == 0.0


def test_total_system_risk_all_on_triangle(triangle):
    network, table = triangle
    assert total_system_risk(table, make_state(network)) == pytest.approx(9.0)


def test_total_system_risk_half_shed_load(triangle):
    network, table = triangle
    state = make_state(network, 0.0, 0.0, 0.0, 0.0)
    state[("load", 1)] = 0.5  # load risk is 1.0 in the unit triangle
    assert total_system_risk(table, state) == pytest.approx(0.5)


def test_total_system_risk_rejects_bad_fraction(triangle):
    network, table = triangle
    state = make_state(network)
    state[("load", 1)] = 1.5
    with pytest.raises(ValueError, match="outside"):
        total_system_risk(table, state)


def test_area_risk_total_empty_area():
    network, table = load_corpus("five_bus_path")
    # area 2 holds buses 4 and 5 plus parts of lines 3, 4.
    total_1 = area_risk_total(table, network, 1)
    total_2 = area_risk_total(table, network, 2)
    whole = total_system_risk(table, make_state(network))
    assert total_1 + total_2 == pytest.approx(whole)
    assert total_2 > total_1  # the high-risk ridge dominates


def test_area_risk_total_unknown_area(triangle):
    network, table = triangle
    with pytest.raises(RiskInputError):
        area_risk_total(table, network, 42)


def test_area_risk_total_simple_sum():
    text = """
format_version: 1
areas: [{id: 1}, {id: 2}]
buses: [{id: 1, area_id: 1}, {id: 2, area_id: 2}]
lines: []
generators: [{id: 1, bus: 1, p_min_mw: 0, p_max_mw: 10}]
loads: []
"""
    network = parse_case(text)
    table = build_risk_table(network, {1: AreaRisk(1, 4.0), 2: AreaRisk(2, 0.0)})
    assert area_risk_total(table, network, 1) == pytest.approx(8.0)  # bus 4 + gen 4
    assert area_risk_total(table, network, 2) == 0.0


def test_multi_area_line_splits_between_areas():
    network, table = load_corpus("five_bus_path")
    # line 3: 8 km in area 1 (rho 1) + 12 km in area 2 (rho 4), 138 kV.
    expected = 2.0 * 0.8 * 1.0 + 2.0 * 1.2 * 4.0
    assert table.risk_of("line", 3) == pytest.approx(expected)


def test_kappa_override_applies():
    network, _ = load_corpus("two_bus")
    risk_doc = """
area_risks:
  - {area_id: 1, rho: 2.0}
kappa_overrides:
  - {kind: generator, id: 1, area_id: 1, kappa: 0.0}
"""
    table = load_risk_table(risk_doc, network)
    assert table.risk_of("generator", 1) == 0.0
    assert table.risk_of("bus", 1) == pytest.approx(2.0)


def test_risk_table_fingerprint_stable(two_bus):
    _, table = two_bus
    assert table.fingerprint() == table.fingerprint()


@settings(max_examples=40, deadline=None)
@given(
    rho=st.floats(0.0, 10.0, allow_nan=False),
    bump=st.floats(0.0, 5.0, allow_nan=False),
)
def test_risk_monotone_in_rho(rho, bump):
    network, _ = load_corpus("triangle")
    base = build_risk_table(network, {1: AreaRisk(1, rho)})
    more = build_risk_table(network, {1: AreaRisk(1, rho + bump)})
    for key in base.values:
        assert more.values[key] >= base.values[key] - 1e-12
    state = {k: 1.0 for k in network.component_keys()}
    assert total_system_risk(more, state) >= total_system_risk(base, state) - 1e-12


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 1.0, allow_nan=False))
def test_risk_linear_in_state(x):
    network, table = load_corpus("triangle")
    state = make_state(network, 0.0, 0.0, 0.0, 0.0)
    base = total_system_risk(table, state)
    state[("load", 1)] = x
    risk_of_load = table.risk_of("load", 1)
    assert total_system_risk(table, state) == pytest.approx(base + x * risk_of_load)


def test_energizing_component_adds_exactly_its_risk():
    network, table = load_corpus("five_bus_path")
    state = make_state(network, 0.0, 0.0, 0.0, 0.0)
    before = total_system_risk(table, state)
    state[("line", 3)] = 1.0
    after = total_system_risk(table, state)
    assert after - before == pytest.approx(table.risk_of("line", 3))


def test_coverage_every_component_present():
    for name in ("two_bus", "triangle", "five_bus_path", "medium16"):
        network, table = load_corpus(name)
        assert set(table.values.keys()) == set(network.component_keys())
        assert all(math.isfinite(v) and v >= 0 for v in table.values.values())
