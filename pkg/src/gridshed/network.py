"""Grid data model: buses, lines, generators, loads, areas.

The canonical case format is a YAML document with a ``format_version: 1``
header and sections ``base_mva``, ``areas``, ``buses``, ``lines``,
``generators``, ``loads``. Field names match the dataclass fields below.
Networks are immutable after construction and safe to share across
concurrent solver workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import yaml

CASE_FORMAT_VERSION = 1

# Component kind tags used everywhere a (kind, id) pair identifies equipment.
KIND_BUS = "bus"
KIND_LINE = "line"
KIND_GEN = "generator"
KIND_LOAD = "load"
ALL_KINDS = (KIND_BUS, KIND_LINE, KIND_GEN, KIND_LOAD)

ComponentKey = tuple[str, int]


class CaseFormatError(ValueError):
    """Raised when a case document is malformed or fails validation."""


@dataclass(frozen=True)
class Area:
    id: int
    name: str = ""


@dataclass(frozen=True)
class Bus:
    id: int
    area_id: int
    name: str = ""
    coord: tuple[float, float] | None = None  # (latitude, longitude), degrees


@dataclass(frozen=True)
class Line:
    id: int
    from_bus: int
    to_bus: int
    susceptance_pu: float  # positive magnitude, 1/x
    thermal_limit_mw: float
    voltage_kv: float
    length_km: float | None = None


@dataclass(frozen=True)
class Generator:
    id: int
    bus: int
    p_min_mw: float
    p_max_mw: float


@dataclass(frozen=True)
class Load:
    id: int
    bus: int
    demand_mw: float
    weight: float = 1.0


@dataclass(frozen=True)
class Violation:
    """One failed invariant, attached to the offending entity."""

    kind: str
    entity_id: int
    rule: str
    message: str

    def __str__(self) -> str:
        return f"{self.kind} {self.entity_id}: {self.rule}: {self.message}"


@dataclass(frozen=True)
class Network:
    buses: tuple[Bus, ...]
    lines: tuple[Line, ...]
    generators: tuple[Generator, ...]
    loads: tuple[Load, ...]
    areas: tuple[Area, ...]
    base_mva: float = 100.0

    # Derived lookups, filled in __post_init__.
    bus_by_id: Mapping[int, Bus] = field(default=None, repr=False, compare=False)
    line_by_id: Mapping[int, Line] = field(default=None, repr=False, compare=False)
    gen_by_id: Mapping[int, Generator] = field(default=None, repr=False, compare=False)
    load_by_id: Mapping[int, Load] = field(default=None, repr=False, compare=False)
    area_by_id: Mapping[int, Area] = field(default=None, repr=False, compare=False)
    lines_at_bus: Mapping[int, tuple[int, ...]] = field(default=None, repr=False, compare=False)
    gens_at_bus: Mapping[int, tuple[int, ...]] = field(default=None, repr=False, compare=False)
    loads_at_bus: Mapping[int, tuple[int, ...]] = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "bus_by_id", {b.id: b for b in self.buses})
        object.__setattr__(self, "line_by_id", {l.id: l for l in self.lines})
        object.__setattr__(self, "gen_by_id", {g.id: g for g in self.generators})
        object.__setattr__(self, "load_by_id", {d.id: d for d in self.loads})
        object.__setattr__(self, "area_by_id", {a.id: a for a in self.areas})
        lines_at: dict[int, list[int]] = {b.id: [] for b in self.buses}
        gens_at: dict[int, list[int]] = {b.id: [] for b in self.buses}
        loads_at: dict[int, list[int]] = {b.id: [] for b in self.buses}
        for l in self.lines:
            if l.from_bus in lines_at:
                lines_at[l.from_bus].append(l.id)
            if l.to_bus in lines_at:
                lines_at[l.to_bus].append(l.id)
        for g in self.generators:
            if g.bus in gens_at:
                gens_at[g.bus].append(g.id)
        for d in self.loads:
            if d.bus in loads_at:
                loads_at[d.bus].append(d.id)
        object.__setattr__(self, "lines_at_bus", {k: tuple(v) for k, v in lines_at.items()})
        object.__setattr__(self, "gens_at_bus", {k: tuple(v) for k, v in gens_at.items()})
        object.__setattr__(self, "loads_at_bus", {k: tuple(v) for k, v in loads_at.items()})

    # -- convenience ---------------------------------------------------

    def total_demand_mw(self) -> float:
        return sum(d.demand_mw for d in self.loads)

    def component_keys(self) -> list[ComponentKey]:
        """Every component as (kind, id), buses first, stable order."""
        keys: list[ComponentKey] = [(KIND_BUS, b.id) for b in self.buses]
        keys += [(KIND_LINE, l.id) for l in self.lines]
        keys += [(KIND_GEN, g.id) for g in self.generators]
        keys += [(KIND_LOAD, d.id) for d in self.loads]
        return keys

    def has_component(self, kind: str, entity_id: int) -> bool:
        table = {
            KIND_BUS: self.bus_by_id,
            KIND_LINE: self.line_by_id,
            KIND_GEN: self.gen_by_id,
            KIND_LOAD: self.load_by_id,
        }.get(kind)
        return table is not None and entity_id in table

    def binary_component_count(self) -> int:
        """Components carrying an on/off state (buses, lines, generators)."""
        return len(self.buses) + len(self.lines) + len(self.generators)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def validate(network: Network) -> list[Violation]:
    """Check every type invariant; returns one Violation per failure.

    An empty list means the network satisfies all invariants. Violations
    are data, not exceptions: callers decide whether to abort.
    """
    out: list[Violation] = []
    v = out.append

    seen_areas: set[int] = set()
    for a in network.areas:
        if a.id in seen_areas:
            v(Violation("area", a.id, "duplicate_id", f"area id {a.id} declared twice"))
        seen_areas.add(a.id)

    seen: set[int] = set()
    for b in network.buses:
        if b.id in seen:
            v(Violation(KIND_BUS, b.id, "duplicate_id", f"bus id {b.id} declared twice"))
        seen.add(b.id)
        if b.area_id not in network.area_by_id:
            v(Violation(KIND_BUS, b.id, "dangling_area", f"bus {b.id} references undeclared area {b.area_id}"))

    seen = set()
    for l in network.lines:
        if l.id in seen:
            v(Violation(KIND_LINE, l.id, "duplicate_id", f"line id {l.id} declared twice"))
        seen.add(l.id)
        for end in (l.from_bus, l.to_bus):
            if end not in network.bus_by_id:
                v(Violation(KIND_LINE, l.id, "dangling_bus", f"line {l.id} references missing bus {end}"))
        if l.from_bus == l.to_bus:
            v(Violation(KIND_LINE, l.id, "self_loop", f"line {l.id} connects bus {l.from_bus} to itself"))
        if not l.susceptance_pu > 0:
            v(Violation(KIND_LINE, l.id, "nonpositive_susceptance", f"susceptance_pu={l.susceptance_pu}"))
        if not l.thermal_limit_mw > 0:
            v(Violation(KIND_LINE, l.id, "nonpositive_limit", f"thermal_limit_mw={l.thermal_limit_mw}"))
        if not l.voltage_kv > 0:
            v(Violation(KIND_LINE, l.id, "nonpositive_voltage", f"voltage_kv={l.voltage_kv}"))
        if l.length_km is not None and l.length_km < 0:
            v(Violation(KIND_LINE, l.id, "negative_length", f"length_km={l.length_km}"))

    seen = set()
    for g in network.generators:
        if g.id in seen:
            v(Violation(KIND_GEN, g.id, "duplicate_id", f"generator id {g.id} declared twice"))
        seen.add(g.id)
        if g.bus not in network.bus_by_id:
            v(Violation(KIND_GEN, g.id, "dangling_bus", f"generator {g.id} references missing bus {g.bus}"))
        if g.p_min_mw < 0:
            v(Violation(KIND_GEN, g.id, "negative_p_min", f"p_min_mw={g.p_min_mw}"))
        if g.p_min_mw > g.p_max_mw:
            v(Violation(KIND_GEN, g.id, "min_above_max", f"p_min_mw={g.p_min_mw} > p_max_mw={g.p_max_mw}"))

    seen = set()
    for d in network.loads:
        if d.id in seen:
            v(Violation(KIND_LOAD, d.id, "duplicate_id", f"load id {d.id} declared twice"))
        seen.add(d.id)
        if d.bus not in network.bus_by_id:
            v(Violation(KIND_LOAD, d.id, "dangling_bus", f"load {d.id} references missing bus {d.bus}"))
        if d.demand_mw < 0:
            v(Violation(KIND_LOAD, d.id, "negative_demand", f"demand_mw={d.demand_mw}"))
        if not d.weight > 0:
            v(Violation(KIND_LOAD, d.id, "nonpositive_weight", f"weight={d.weight}"))

    if not network.base_mva > 0:
        v(Violation("network", 0, "nonpositive_base_mva", f"base_mva={network.base_mva}"))

    return out


# ---------------------------------------------------------------------------
# Canonical case format
# ---------------------------------------------------------------------------

_REQUIRED_SECTIONS = ("buses", "lines", "generators", "loads", "areas")


def _req(entry: Mapping, key: str, where: str):
    if key not in entry:
        raise CaseFormatError(f"{where}: missing field '{key}'")
    return entry[key]


def parse_case(text: str) -> Network:
    """Parse a canonical case document into a validated Network.

    Raises CaseFormatError naming the offending entity on malformed
    documents, dangling references, duplicate ids, or nonpositive limits.
    """
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise CaseFormatError(f"not a well-formed case document: {exc}") from exc
    if not isinstance(doc, Mapping):
        raise CaseFormatError("case document must be a mapping of sections")
    version = doc.get("format_version")
    if version != CASE_FORMAT_VERSION:
        raise CaseFormatError(f"unsupported format_version {version!r}, expected {CASE_FORMAT_VERSION}")
    for section in _REQUIRED_SECTIONS:
        if section not in doc:
            raise CaseFormatError(f"missing section '{section}'")
        if doc[section] is not None and not isinstance(doc[section], list):
            raise CaseFormatError(f"section '{section}' must be a list")

    def entries(section: str) -> list[Mapping]:
        raw = doc[section] or []
        for i, entry in enumerate(raw):
            if not isinstance(entry, Mapping):
                raise CaseFormatError(f"{section}[{i}] is not a mapping")
        return raw

    areas = tuple(
        Area(id=int(_req(e, "id", f"areas[{i}]")), name=str(e.get("name", "")))
        for i, e in enumerate(entries("areas"))
    )
    buses = []
    for i, e in enumerate(entries("buses")):
        where = f"buses[{i}]"
        coord = e.get("coord")
        if coord is not None:
            if not isinstance(coord, (list, tuple)) or len(coord) != 2:
                raise CaseFormatError(f"{where}: coord must be [latitude, longitude]")
            coord = (float(coord[0]), float(coord[1]))
        buses.append(
            Bus(
                id=int(_req(e, "id", where)),
                area_id=int(_req(e, "area_id", where)),
                name=str(e.get("name", "")),
                coord=coord,
            )
        )
    lines = []
    for i, e in enumerate(entries("lines")):
        where = f"lines[{i}]"
        length = e.get("length_km")
        lines.append(
            Line(
                id=int(_req(e, "id", where)),
                from_bus=int(_req(e, "from_bus", where)),
                to_bus=int(_req(e, "to_bus", where)),
                susceptance_pu=float(_req(e, "susceptance_pu", where)),
                thermal_limit_mw=float(_req(e, "thermal_limit_mw", where)),
                voltage_kv=float(_req(e, "voltage_kv", where)),
                length_km=None if length is None else float(length),
            )
        )
    generators = tuple(
        Generator(
            id=int(_req(e, "id", f"generators[{i}]")),
            bus=int(_req(e, "bus", f"generators[{i}]")),
            p_min_mw=float(_req(e, "p_min_mw", f"generators[{i}]")),
            p_max_mw=float(_req(e, "p_max_mw", f"generators[{i}]")),
        )
        for i, e in enumerate(entries("generators"))
    )
    loads = tuple(
        Load(
            id=int(_req(e, "id", f"loads[{i}]")),
            bus=int(_req(e, "bus", f"loads[{i}]")),
            demand_mw=float(_req(e, "demand_mw", f"loads[{i}]")),
            weight=float(e.get("weight", 1.0)),
        )
        for i, e in enumerate(entries("loads"))
    )

    network = Network(
        buses=tuple(buses),
        lines=tuple(lines),
        generators=generators,
        loads=loads,
        areas=areas,
        base_mva=float(doc.get("base_mva", 100.0)),
    )
    violations = validate(network)
    if violations:
        raise CaseFormatError("invalid network: " + "; ".join(str(x) for x in violations))
    return network


def serialize_case(network: Network) -> str:
    """Render a Network back to the canonical case format.

    Output is deterministic (components sorted by id) and reparses to an
    equal Network.
    """
    doc: dict = {"format_version": CASE_FORMAT_VERSION, "base_mva": network.base_mva}
    doc["areas"] = [
        {"id": a.id, "name": a.name} for a in sorted(network.areas, key=lambda a: a.id)
    ]
    doc["buses"] = []
    for b in sorted(network.buses, key=lambda b: b.id):
        entry: dict = {"id": b.id, "area_id": b.area_id}
        if b.name:
            entry["name"] = b.name
        if b.coord is not None:
            entry["coord"] = [b.coord[0], b.coord[1]]
        doc["buses"].append(entry)
    doc["lines"] = []
    for l in sorted(network.lines, key=lambda l: l.id):
        entry = {
            "id": l.id,
            "from_bus": l.from_bus,
            "to_bus": l.to_bus,
            "susceptance_pu": l.susceptance_pu,
            "thermal_limit_mw": l.thermal_limit_mw,
            "voltage_kv": l.voltage_kv,
        }
        if l.length_km is not None:
            entry["length_km"] = l.length_km
        doc["lines"].append(entry)
    doc["generators"] = [
        {"id": g.id, "bus": g.bus, "p_min_mw": g.p_min_mw, "p_max_mw": g.p_max_mw}
        for g in sorted(network.generators, key=lambda g: g.id)
    ]
    doc["loads"] = [
        {"id": d.id, "bus": d.bus, "demand_mw": d.demand_mw, "weight": d.weight}
        for d in sorted(network.loads, key=lambda d: d.id)
    ]
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=None)


# ---------------------------------------------------------------------------
# Island analysis
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Island:
    """One connected component of the energized network."""

    buses: frozenset[int]
    lines: frozenset[int]
    generators: frozenset[int]
    loads: frozenset[int]


def energized_islands(network: Network, state: Mapping[ComponentKey, float]) -> list[Island]:
    """Partition energized buses into islands connected by energized lines.

    ``state`` maps every (kind, id) to its energization value: z in {0, 1}
    for buses / lines / generators and the served fraction in [0, 1] for
    loads. De-energized buses are excluded entirely; a line joins an island
    only when the line and both endpoints are energized. Raises KeyError
    naming the first component missing from ``state``.
    """
    for key in network.component_keys():
        if key not in state:
            raise KeyError(f"state missing component {key[0]} {key[1]}")

    on_bus = {b.id for b in network.buses if state[(KIND_BUS, b.id)] > 0.5}
    adjacency: dict[int, list[tuple[int, int]]] = {b: [] for b in on_bus}
    for l in network.lines:
        if state[(KIND_LINE, l.id)] > 0.5 and l.from_bus in on_bus and l.to_bus in on_bus:
            adjacency[l.from_bus].append((l.to_bus, l.id))
            adjacency[l.to_bus].append((l.from_bus, l.id))

    islands: list[Island] = []
    visited: set[int] = set()
    for start in sorted(on_bus):
        if start in visited:
            continue
        stack = [start]
        visited.add(start)
        member_buses: set[int] = set()
        member_lines: set[int] = set()
        while stack:
            cur = stack.pop()
            member_buses.add(cur)
            for nxt, line_id in adjacency[cur]:
                member_lines.add(line_id)
                if nxt not in visited:
                    visited.add(nxt)
                    stack.append(nxt)
        gens = {
            g for b in member_buses for g in network.gens_at_bus[b]
            if state[(KIND_GEN, g)] > 0.5
        }
        loads = {d for b in member_buses for d in network.loads_at_bus[b]}
        islands.append(
            Island(
                buses=frozenset(member_buses),
                lines=frozenset(member_lines),
                generators=frozenset(gens),
                loads=frozenset(loads),
            )
        )
    return islands


def network_fingerprint(network: Network) -> str:
    """SHA-256 of the canonical serialization; ties results to inputs."""
    import hashlib

    return hashlib.sha256(serialize_case(network).encode()).hexdigest()
