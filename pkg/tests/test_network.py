import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridshed.network import (
    Area,
    Bus,
    CaseFormatError,
    Generator,
    Line,
    Load,
    Network,
    energized_islands,
    network_fingerprint,
    parse_case,
    serialize_case,
    validate,
)

from .conftest import CORPUS_NAMES, load_corpus
from .oracles import bfs_islands


def make_state(network, bus=1.0, line=1.0, gen=1.0, load=1.0):
    state = {}
    state.update({("bus", b.id): bus for b in network.buses})
    state.update({("line", l.id): line for l in network.lines})
    state.update({("generator", g.id): gen for g in network.generators})
    state.update({("load", d.id): load for d in network.loads})
    return state


def test_parse_two_bus_counts(two_bus):
    network, _ = two_bus
    assert len(network.buses) == 2
    assert len(network.lines) == 1
    assert len(network.generators) == 1
    assert len(network.loads) == 1
    assert network.total_demand_mw() == 50.0


def test_parse_reports_dangling_bus():
    text = """
format_version: 1
areas: [{id: 1}]
buses: [{id: 1, area_id: 1}]
lines:
  - {id: 7, from_bus: 1, to_bus: 99, susceptance_pu: 1.0, thermal_limit_mw: 10.0, voltage_kv: 230.0}
generators: []
loads: []
"""
    with pytest.raises(CaseFormatError) as err:
        parse_case(text)
    assert "line 7" in str(err.value)
    assert "99" in str(err.value)


def test_parse_rejects_duplicate_ids():
    text = """
format_version: 1
areas: [{id: 1}]
buses: [{id: 1, area_id: 1}, {id: 1, area_id: 1}]
lines: []
generators: []
loads: []
"""
    with pytest.raises(CaseFormatError) as err:
        parse_case(text)
    assert "duplicate" in str(err.value)


def test_parse_rejects_wrong_version():
    with pytest.raises(CaseFormatError):
        parse_case("format_version: 99\nareas: []\nbuses: []\nlines: []\ngenerators: []\nloads: []\n")


def test_parse_rejects_missing_section():
    with pytest.raises(CaseFormatError):
        parse_case("format_version: 1\nbuses: []\nlines: []\ngenerators: []\nloads: []\n")


def test_parse_rejects_nonpositive_limits():
    text = """
format_version: 1
areas: [{id: 1}]
buses: [{id: 1, area_id: 1}, {id: 2, area_id: 1}]
lines:
  - {id: 1, from_bus: 1, to_bus: 2, susceptance_pu: 0.0, thermal_limit_mw: 10.0, voltage_kv: 230.0}
generators: []
loads: []
"""
    with pytest.raises(CaseFormatError) as err:
        parse_case(text)
    assert "susceptance" in str(err.value)


@pytest.mark.parametrize("name", CORPUS_NAMES)
def test_round_trip_corpus(name):
    network, _ = load_corpus(name)
    again = parse_case(serialize_case(network))
    assert again == network
    assert network_fingerprint(again) == network_fingerprint(network)


def test_validate_clean_network(two_bus):
    network, _ = two_bus
    assert validate(network) == []


def test_validate_gen_min_above_max():
    network = Network(
        buses=(Bus(1, 1),),
        lines=(),
        generators=(Generator(1, 1, p_min_mw=50.0, p_max_mw=10.0),),
        loads=(),
        areas=(Area(1),),
    )
    violations = validate(network)
    assert len(violations) == 1
    assert violations[0].rule == "min_above_max"
    assert violations[0].entity_id == 1


def test_validate_zero_weight_load():
    network = Network(
        buses=(Bus(1, 1),),
        lines=(),
        generators=(),
        loads=(Load(1, 1, demand_mw=5.0, weight=0.0),),
        areas=(Area(1),),
    )
    violations = validate(network)
    assert [v.rule for v in violations] == ["nonpositive_weight"]


def test_islands_triangle_all_on(triangle):
    network, _ = triangle
    islands = energized_islands(network, make_state(network))
    assert len(islands) == 1
    assert islands[0].buses == frozenset({1, 2, 3})
    assert islands[0].lines == frozenset({1, 2, 3})


def test_islands_triangle_lines_off(triangle):
    network, _ = triangle
    islands = energized_islands(network, make_state(network, line=0.0))
    assert len(islands) == 3
    assert all(len(i.buses) == 1 for i in islands)
    assert all(not i.lines for i in islands)


def test_islands_five_bus_cut_matches_bfs_oracle():
    network, _ = load_corpus("five_bus_path")
    for cut_line in (1, 2, 3, 4):
        state = make_state(network)
        state[("line", cut_line)] = 0.0
        mine = {i.buses for i in energized_islands(network, state)}
        assert mine == bfs_islands(network, state)


def test_islands_exclude_dead_buses(triangle):
    network, _ = triangle
    state = make_state(network)
    state[("bus", 3)] = 0.0
    islands = energized_islands(network, state)
    covered = set().union(*(i.buses for i in islands))
    assert 3 not in covered
    assert covered == {1, 2}


def test_islands_missing_component_raises(triangle):
    network, _ = triangle
    state = make_state(network)
    del state[("line", 2)]
    with pytest.raises(KeyError):
        energized_islands(network, state)


@st.composite
def random_network_and_state(draw):
    n_bus = draw(st.integers(2, 7))
    buses = tuple(Bus(i, 1) for i in range(1, n_bus + 1))
    n_line = draw(st.integers(0, 10))
    lines = []
    for lid in range(1, n_line + 1):
        a = draw(st.integers(1, n_bus))
        b = draw(st.integers(1, n_bus))
        if a == b:
            b = a % n_bus + 1
        lines.append(Line(lid, a, b, 10.0, 100.0, 230.0, 10.0))
    network = Network(
        buses=buses, lines=tuple(lines), generators=(), loads=(), areas=(Area(1),)
    )
    state = {("bus", b.id): float(draw(st.integers(0, 1))) for b in buses}
    state.update({("line", l.id): float(draw(st.integers(0, 1))) for l in lines})
    return network, state


@settings(max_examples=60, deadline=None)
@given(random_network_and_state())
def test_islands_partition_energized_buses(case):
    network, state = case
    islands = energized_islands(network, state)
    on_buses = {b.id for b in network.buses if state[("bus", b.id)] > 0.5}
    seen: set[int] = set()
    for island in islands:
        assert not (island.buses & seen), "islands overlap"
        seen |= island.buses
    assert seen == on_buses
    assert {i.buses for i in islands} == bfs_islands(network, state)
    live_lines = {
        l.id
        for l in network.lines
        if state[("line", l.id)] > 0.5
        and state[("bus", l.from_bus)] > 0.5
        and state[("bus", l.to_bus)] > 0.5
    }
    assert set().union(set(), *(i.lines for i in islands)) == live_lines
