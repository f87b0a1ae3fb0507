#!/usr/bin/env python3
"""Synthesize the bundled 73-bus three-area test case and its risk map.

Deterministic: same output on every run. The grid has a low-risk eastern
interconnection, a moderate-risk border pocket, and a western hill
region split into a high-risk ring and an extreme-risk core. The west
runs a generation deficit served over tie corridors, and the western
meshes carry deliberate redundancy with widely varying exposure, so a
risk-aware shut-off first sheds pure redundancy (big risk drop, little
load loss) and then trades load for risk in steps as the weight grows.

Thermal limits are derived in a second pass from a DC flow solve on the
backbone topology (redundant corridors open): backbone branches get
snug limits so the surviving network runs near its ratings, which keeps
the on/off relaxation tight. Generators and loads never share a bus, so
the all-lines-off operating point serves nothing once dead islands are
pruned.

Writes src/gridshed/data/case73.case and case73.risk.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

OUT_DIR = Path(__file__).resolve().parents[1] / "src" / "gridshed" / "data"

AREA_EAST = 1      # rho 0.0
AREA_BORDER = 2    # rho 1.0
AREA_CORE = 3      # rho 4.0
AREA_RING = 4      # rho 2.0

BASE_MVA = 100.0

rng = np.random.default_rng(73)


def jitter(scale=0.05):
    return float(rng.uniform(-scale, scale))


def dc_flows(bus_ids, lines, injections):
    """Flows for fixed injections over the given lines (DC model)."""
    index = {b: k for k, b in enumerate(bus_ids)}
    n = len(bus_ids)
    laplacian = np.zeros((n, n))
    for (_lid, a, b, sus, *_rest) in lines:
        ia, ib = index[a], index[b]
        w = sus * BASE_MVA
        laplacian[ia, ia] += w
        laplacian[ib, ib] += w
        laplacian[ia, ib] -= w
        laplacian[ib, ia] -= w
    p = np.array([injections.get(b, 0.0) for b in bus_ids])
    reduced = laplacian.copy()
    reduced[0, :] = 0.0
    reduced[0, 0] = 1.0
    p = p.copy()
    p[0] = 0.0
    theta = np.linalg.solve(reduced, p)
    flows = {}
    for (lid, a, b, sus, *_rest) in lines:
        flows[lid] = sus * BASE_MVA * (theta[index[a]] - theta[index[b]])
    return flows


def main() -> None:
    buses = []   # (id, area, lat, lon)
    lines = []   # [id, from, to, susceptance, limit, kv, km, geo, cls]
    gens = []    # (id, bus, pmin, pmax)
    loads = []   # (id, bus, mw)

    def add_line(a, b, kv, geo, cls):
        km = round(sum(g[1] for g in geo), 1)
        stiffness = 900.0 if kv >= 230.0 else 420.0  # per-unit b scales as 1/length
        sus = round(stiffness / km, 2)
        lines.append([len(lines) + 1, a, b, sus, None, kv, km, geo, cls])

    # --- eastern interconnection: 28 buses on a 4 x 7 grid ----------------
    east_ids = []
    for r in range(4):
        for cidx in range(7):
            i = 101 + r * 7 + cidx
            east_ids.append(i)
            buses.append((i, AREA_EAST, 33.9 + r * 0.5 + jitter(), -114.6 + cidx * 0.4 + jitter()))

    def east_line(a, b, km):
        add_line(a, b, 230.0, [(AREA_EAST, km)], "east")

    for r in range(4):
        for cidx in range(6):
            east_line(101 + r * 7 + cidx, 101 + r * 7 + cidx + 1, float(rng.integers(12, 26)))
    for r in range(3):
        for cidx in (0, 2, 4, 6):
            east_line(101 + r * 7 + cidx, 101 + (r + 1) * 7 + cidx, float(rng.integers(14, 30)))
    east_line(101, 109, 30.0)
    east_line(113, 121, 32.0)

    # --- border pocket: 8 buses, moderate risk -----------------------------
    border_ids = list(range(129, 137))
    for k, i in enumerate(border_ids):
        buses.append((i, AREA_BORDER, 35.9 + 0.17 * (k % 4) + jitter(), -113.4 + 0.3 * (k // 4) + jitter()))

    def border_line(a, b, km, cls="backbone"):
        add_line(a, b, 138.0, [(AREA_BORDER, km)], cls)

    for k in range(len(border_ids) - 1):
        border_line(border_ids[k], border_ids[k + 1], float(rng.integers(12, 22)))
    border_line(129, 132, 20.0, cls="redundant")
    for east_bus, border_bus in [(122, 129), (125, 133)]:
        add_line(east_bus, border_bus, 230.0, [(AREA_EAST, 22.0), (AREA_BORDER, 14.0)], "backbone")

    # --- western ring: 18 buses, high risk ---------------------------------
    ring_ids = list(range(201, 219))
    for k, i in enumerate(ring_ids):
        angle = 2 * np.pi * k / 18
        buses.append((i, AREA_RING, 34.8 + 0.95 * np.sin(angle) + jitter(0.03),
                      -116.9 + 0.9 * np.cos(angle) + jitter(0.03)))

    def ring_line(a, b, km, cls="backbone"):
        add_line(a, b, 138.0, [(AREA_RING, km)], cls)

    for k in range(18):
        ring_line(ring_ids[k], ring_ids[(k + 1) % 18], float(rng.integers(11, 22)))
    # redundant ring chords with diverse exposure
    ring_line(201, 209, 34.0, cls="redundant")
    ring_line(204, 212, 30.0, cls="redundant")
    ring_line(207, 215, 26.0, cls="redundant")

    # --- western core: 19 buses, extreme risk -------------------------------
    core_ids = list(range(219, 238))
    for k, i in enumerate(core_ids):
        buses.append((i, AREA_CORE, 34.45 + 0.2 * (k % 5) + jitter(0.02),
                      -118.05 + 0.2 * (k // 5) + jitter(0.02)))

    def core_line(a, b, km, cls="backbone"):
        add_line(a, b, 138.0, [(AREA_CORE, km)], cls)

    spine = [(219, 220), (220, 221), (221, 222), (222, 223),
             (219, 224), (224, 225), (225, 226), (226, 227),
             (224, 228), (228, 229), (229, 230), (230, 231),
             (228, 232), (232, 233), (233, 234),
             (232, 235), (235, 236), (236, 237)]
    for a, b in spine:
        core_line(a, b, float(rng.integers(10, 20)))
    # redundant corridors: widely varying risk, shed one by one
    for a, b, km in [(220, 225, 24.0), (221, 226, 28.0),
                     (225, 229, 30.0), (227, 231, 38.0), (233, 237, 36.0)]:
        core_line(a, b, km, cls="redundant")
    # one long legacy corridor: the riskiest line on the system
    core_line(219, 237, 64.0, cls="redundant")

    # --- ring-core connections ----------------------------------------------
    for a, b, km_ring, km_core in [(203, 219, 12.0, 10.0), (208, 224, 13.0, 9.0),
                                   (213, 228, 11.0, 10.0), (216, 232, 12.0, 11.0)]:
        add_line(a, b, 138.0, [(AREA_RING, km_ring), (AREA_CORE, km_core)], "backbone")

    # --- east-west ties: four corridors, the fourth is spare ----------------
    ties = [(104, 205, 30.0, 22.0, "backbone"), (108, 207, 28.0, 20.0, "backbone"),
            (115, 209, 32.0, 18.0, "backbone"), (122, 211, 30.0, 24.0, "redundant")]
    for east_bus, ring_bus, km_east, km_ring, cls in ties:
        add_line(east_bus, ring_bus, 230.0, [(AREA_EAST, km_east), (AREA_RING, km_ring)], cls)

    # --- generation -----------------------------------------------------------
    for bus, pmax in [(101, 1000.0), (103, 950.0), (106, 1000.0), (110, 900.0),
                      (114, 950.0), (118, 1000.0), (121, 900.0), (127, 1050.0)]:
        gens.append((len(gens) + 1, bus, 0.1 * pmax, pmax))
    gens.append((len(gens) + 1, 136, 50.0, 430.0))        # border unit
    for bus, pmax in [(206, 360.0), (214, 330.0)]:        # ring units
        gens.append((len(gens) + 1, bus, 25.0, pmax))
    gens.append((len(gens) + 1, 231, 20.0, 260.0))        # core unit

    gen_buses = {g[1] for g in gens}

    # --- load -------------------------------------------------------------------
    east_load_buses = [i for i in east_ids if i not in gen_buses]
    chosen_east = sorted(int(b) for b in rng.choice(east_load_buses, size=18, replace=False))
    weights = rng.uniform(0.7, 1.3, size=18)
    shares = weights / weights.sum() * 6200.0
    for bus, mw in zip(chosen_east, shares):
        loads.append((len(loads) + 1, bus, float(round(mw, 1))))
    for bus, mw in zip([130, 131, 134, 135], (170.0, 160.0, 150.0, 170.0)):
        loads.append((len(loads) + 1, bus, mw))
    for bus, mw in zip([201, 204, 208, 210, 212, 215, 217], (160.0, 150.0, 140.0, 150.0, 130.0, 140.0, 130.0)):
        loads.append((len(loads) + 1, bus, mw))
    for bus, mw in zip([221, 223, 226, 229, 233, 236], (120.0, 110.0, 125.0, 115.0, 120.0, 110.0)):
        loads.append((len(loads) + 1, bus, mw))

    total_demand = sum(l[2] for l in loads)
    assert not any(l[1] in gen_buses for l in loads), "gen and load share a bus"
    assert len(buses) == 73, len(buses)

    # --- pass 2: derive thermal limits from backbone flows -------------------
    demand_by_bus: dict[int, float] = {}
    for _did, bus, mw in loads:
        demand_by_bus[bus] = demand_by_bus.get(bus, 0.0) + mw
    pmax_total = sum(g[3] for g in gens)
    injections: dict[int, float] = {}
    for _gid, bus, _pmin, pmax in gens:
        injections[bus] = injections.get(bus, 0.0) + pmax * total_demand / pmax_total
    for bus, mw in demand_by_bus.items():
        injections[bus] = injections.get(bus, 0.0) - mw

    bus_ids = [b[0] for b in buses]
    backbone = [l for l in lines if l[8] != "redundant"]
    flows_backbone = dc_flows(bus_ids, backbone, injections)
    flows_full = dc_flows(bus_ids, lines, injections)

    for line in lines:
        lid, _a, _b, _sus, _limit, _kv, _km, _geo, cls = line
        f_bb = abs(flows_backbone.get(lid, 0.0))
        f_full = abs(flows_full[lid])
        if cls == "east":
            limit = max(1.2 * max(f_bb, f_full), 300.0)
        elif cls == "redundant":
            limit = max(1.3 * f_full, 120.0)
        else:
            limit = max(1.06 * max(f_bb, f_full), 60.0)
        line[4] = float(round(limit, 1))

    # --- emit ---------------------------------------------------------------------
    case = ["format_version: 1", f"base_mva: {BASE_MVA}", "areas:"]
    case.append("  - {id: 1, name: eastern_plains}")
    case.append("  - {id: 2, name: border_ridge}")
    case.append("  - {id: 3, name: west_core}")
    case.append("  - {id: 4, name: west_ring}")
    case.append("buses:")
    for i, area, lat, lon in buses:
        case.append(f"  - {{id: {i}, area_id: {area}, coord: [{lat:.4f}, {lon:.4f}]}}")
    case.append("lines:")
    for (lid, a, b, sus, limit, kv, km, _geo, _cls) in lines:
        case.append(
            f"  - {{id: {lid}, from_bus: {a}, to_bus: {b}, susceptance_pu: {sus}, "
            f"thermal_limit_mw: {limit}, voltage_kv: {kv}, length_km: {km}}}"
        )
    case.append("generators:")
    for gid, bus, pmin, pmax in gens:
        case.append(f"  - {{id: {gid}, bus: {bus}, p_min_mw: {pmin}, p_max_mw: {pmax}}}")
    case.append("loads:")
    for did, bus, mw in loads:
        case.append(f"  - {{id: {did}, bus: {bus}, demand_mw: {mw}, weight: 1.0}}")

    risk = ["area_risks:"]
    risk.append("  - {area_id: 1, rho: 0.0}")
    risk.append("  - {area_id: 2, rho: 1.0}")
    risk.append("  - {area_id: 3, rho: 4.0}")
    risk.append("  - {area_id: 4, rho: 2.0}")
    risk.append("line_geography:")
    for (lid, _a, _b, _sus, _limit, _kv, _km, geo, _cls) in lines:
        segs = ", ".join(f"[{area}, {km}]" for area, km in geo)
        risk.append(f"  - {{id: {lid}, segments: [{segs}]}}")

    OUT_DIR.mkdir(parents=True, exist_ok=True)
    (OUT_DIR / "case73.case").write_text("\n".join(case) + "\n")
    (OUT_DIR / "case73.risk").write_text("\n".join(risk) + "\n")
    print(f"wrote case73: 73 buses, {len(lines)} lines, {len(gens)} gens, "
          f"{len(loads)} loads, {total_demand:.1f} MW demand")


if __name__ == "__main__":
    main()
