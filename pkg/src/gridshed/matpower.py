"""MATPOWER case-file subset parser.

Consumes the ``mpc.bus``, ``mpc.gen`` and ``mpc.branch`` matrices (columns
in the de-facto standard order) plus ``mpc.baseMVA``. Loads come from the
bus table's Pd column; branch reactance becomes the positive susceptance
magnitude 1/x and rate A the thermal limit. Everything else (AC data,
HVDC tables, cost tables) is ignored with a warning.
"""

from __future__ import annotations

import re
import warnings

from .network import Area, Bus, CaseFormatError, Generator, Line, Load, Network, validate


class MatpowerFeatureWarning(UserWarning):
    """An unsupported MATPOWER table or field was skipped."""


_MATRIX_RE = re.compile(r"mpc\.(\w+)\s*=\s*\[(.*?)\];", re.DOTALL)
_SCALAR_RE = re.compile(r"mpc\.(\w+)\s*=\s*([0-9eE+\-.]+)\s*;")

# Tables we deliberately skip. dcline covers HVDC extensions.
_IGNORED_TABLES = ("gencost", "dcline", "dclinecost", "branch_ext", "bus_name")


def _parse_matrix(body: str) -> list[list[float]]:
    rows = []
    for raw in body.strip().splitlines():
        raw = raw.split("%")[0].strip().rstrip(";")
        if not raw:
            continue
        rows.append([float(tok) for tok in raw.replace(",", " ").split()])
    return rows


def parse_matpower_subset(text: str) -> Network:
    """Parse the supported subset of a MATPOWER case into a Network.

    Raises CaseFormatError when a mandatory matrix (bus, gen, branch) is
    missing or a branch has x = 0 (infinite susceptance). Unsupported
    tables raise MatpowerFeatureWarning and are skipped.
    """
    matrices = {name: _parse_matrix(body) for name, body in _MATRIX_RE.findall(text)}
    scalars = {name: float(val) for name, val in _SCALAR_RE.findall(text)}

    for name in ("bus", "gen", "branch"):
        if name not in matrices:
            raise CaseFormatError(f"missing mandatory matrix mpc.{name}")

    for name in matrices:
        if name in _IGNORED_TABLES:
            warnings.warn(f"ignoring unsupported table mpc.{name}", MatpowerFeatureWarning, stacklevel=2)
        elif name not in ("bus", "gen", "branch"):
            warnings.warn(f"ignoring unknown table mpc.{name}", MatpowerFeatureWarning, stacklevel=2)

    base_mva = scalars.get("baseMVA", 100.0)

    # bus: [bus_i type Pd Qd Gs Bs area Vm Va baseKV zone Vmax Vmin]
    buses: list[Bus] = []
    loads: list[Load] = []
    base_kv: dict[int, float] = {}
    area_ids: set[int] = set()
    for row in matrices["bus"]:
        if len(row) < 13:
            raise CaseFormatError(f"bus row too short: {row}")
        bus_id = int(row[0])
        area = int(row[6])
        area_ids.add(area)
        buses.append(Bus(id=bus_id, area_id=area))
        base_kv[bus_id] = row[9]
        if row[2] != 0.0:
            loads.append(Load(id=bus_id, bus=bus_id, demand_mw=row[2]))

    # gen: [bus Pg Qg Qmax Qmin Vg mBase status Pmax Pmin ...]
    generators: list[Generator] = []
    for i, row in enumerate(matrices["gen"], start=1):
        if len(row) < 10:
            raise CaseFormatError(f"gen row too short: {row}")
        if row[7] <= 0:  # out-of-service unit
            continue
        generators.append(
            Generator(id=i, bus=int(row[0]), p_min_mw=max(0.0, row[9]), p_max_mw=row[8])
        )

    # branch: [fbus tbus r x b rateA rateB rateC ratio angle status angmin angmax]
    lines: list[Line] = []
    for i, row in enumerate(matrices["branch"], start=1):
        if len(row) < 11:
            raise CaseFormatError(f"branch row too short: {row}")
        if row[10] <= 0:  # out-of-service branch
            continue
        x = row[3]
        if x == 0.0:
            raise CaseFormatError(f"branch {i}: reactance x = 0 yields infinite susceptance")
        from_bus = int(row[0])
        lines.append(
            Line(
                id=i,
                from_bus=from_bus,
                to_bus=int(row[1]),
                susceptance_pu=1.0 / abs(x),
                thermal_limit_mw=row[5],
                voltage_kv=base_kv.get(from_bus, 0.0),
            )
        )

    network = Network(
        buses=tuple(buses),
        lines=tuple(lines),
        generators=tuple(generators),
        loads=tuple(loads),
        areas=tuple(Area(id=a) for a in sorted(area_ids)),
        base_mva=base_mva,
    )
    violations = validate(network)
    if violations:
        raise CaseFormatError("invalid network: " + "; ".join(str(v) for v in violations))
    return network
