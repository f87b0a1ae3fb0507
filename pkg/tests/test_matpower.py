import pytest

from gridshed.matpower import MatpowerFeatureWarning, parse_matpower_subset
from gridshed.network import CaseFormatError, parse_case

TWO_BUS_MPC = """
function mpc = case2
mpc.version = '2';
mpc.baseMVA = 100.0;

%% bus data
%	bus_i	type	Pd	Qd	Gs	Bs	area	Vm	Va	baseKV	zone	Vmax	Vmin
mpc.bus = [
	1	3	0	0	0	0	1	1	0	230	1	1.1	0.9;
	2	1	50	10	0	0	1	1	0	230	1	1.1	0.9;
];

%% generator data
mpc.gen = [
	1	0	0	30	-30	1	100	1	100	0	0	0	0	0	0	0	0	0	0	0	0;
];

%% branch data
%	fbus	tbus	r	x	b	rateA	rateB	rateC	ratio	angle	status	angmin	angmax
mpc.branch = [
	1	2	0.01	0.1	0	100	110	120	0	0	1	-360	360;
];
"""

TWO_BUS_CANONICAL = """
format_version: 1
base_mva: 100.0
areas: [{id: 1}]
buses:
  - {id: 1, area_id: 1}
  - {id: 2, area_id: 1}
lines:
  - {id: 1, from_bus: 1, to_bus: 2, susceptance_pu: 10.0, thermal_limit_mw: 100.0, voltage_kv: 230.0}
generators:
  - {id: 1, bus: 1, p_min_mw: 0.0, p_max_mw: 100.0}
loads:
  - {id: 2, bus: 2, demand_mw: 50.0}
"""


def test_two_bus_matches_canonical_parser():
    mp = parse_matpower_subset(TWO_BUS_MPC)
    canon = parse_case(TWO_BUS_CANONICAL)
    assert [b.id for b in mp.buses] == [b.id for b in canon.buses]
    assert mp.base_mva == canon.base_mva
    line_mp, line_c = mp.lines[0], canon.lines[0]
    assert line_mp.susceptance_pu == pytest.approx(line_c.susceptance_pu)
    assert line_mp.thermal_limit_mw == line_c.thermal_limit_mw
    assert line_mp.voltage_kv == line_c.voltage_kv
    gen_mp, gen_c = mp.generators[0], canon.generators[0]
    assert (gen_mp.bus, gen_mp.p_min_mw, gen_mp.p_max_mw) == (
        gen_c.bus,
        gen_c.p_min_mw,
        gen_c.p_max_mw,
    )
    assert mp.loads[0].demand_mw == canon.loads[0].demand_mw
    assert mp.loads[0].bus == canon.loads[0].bus


def test_zero_reactance_is_an_error():
    bad = TWO_BUS_MPC.replace("1	2	0.01	0.1", "1	2	0.01	0.0")
    with pytest.raises(CaseFormatError) as err:
        parse_matpower_subset(bad)
    assert "infinite susceptance" in str(err.value)


def test_hvdc_table_ignored_with_warning():
    text = TWO_BUS_MPC + """
mpc.dcline = [
	1	2	1	10	10	0	0	0	1.01	1	0	0	0	0	0	0	0	0	0	0	0	0	0;
];
"""
    with pytest.warns(MatpowerFeatureWarning, match="dcline"):
        network = parse_matpower_subset(text)
    assert len(network.lines) == 1  # the AC branch only


def test_out_of_service_rows_skipped():
    text = TWO_BUS_MPC.replace(
        "	1	0	0	30	-30	1	100	1	100	0",
        "	1	0	0	30	-30	1	100	0	100	0",
    )
    network = parse_matpower_subset(text)
    assert len(network.generators) == 0


def test_missing_branch_matrix_is_an_error():
    text = TWO_BUS_MPC.replace("mpc.branch", "mpc.somethingelse")
    with pytest.raises(CaseFormatError, match="mpc.branch"):
        parse_matpower_subset(text)
