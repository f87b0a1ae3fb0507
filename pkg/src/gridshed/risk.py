"""Wildfire risk attribution for grid components.

Each map area carries a relative risk value rho. A component's exposure
lists (area, kappa, weight) terms; its risk is the sum of
kappa * weight * rho over those terms. Point components (buses,
generators, loads) have a single unit-weight term in their bus's area;
lines are split into fixed-length segments so that longer lines in risky
terrain accumulate more risk. System risk for an energization state is
the state-weighted sum of component risks.

Default ignition factors when no override is given: 1.0 for buses,
generators and loads; 1.0 for lines at or above 230 kV and 2.0 below
(narrower right-of-way, more vegetation contact). A line with no recorded
geography is treated as a single segment in its from-bus's area.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import yaml

from .network import (
    ComponentKey,
    KIND_BUS,
    KIND_GEN,
    KIND_LINE,
    KIND_LOAD,
    Line,
    Network,
)

DEFAULT_KM_PER_SEGMENT = 10.0
HIGH_VOLTAGE_KV = 230.0
KAPPA_HIGH_VOLTAGE_LINE = 1.0
KAPPA_LOW_VOLTAGE_LINE = 2.0
KAPPA_POINT_COMPONENT = 1.0


class RiskInputError(ValueError):
    """Raised on malformed or inconsistent risk inputs."""


@dataclass(frozen=True)
class AreaRisk:
    area_id: int
    rho: float

    def __post_init__(self) -> None:
        if self.rho < 0:
            raise RiskInputError(f"area {self.area_id}: rho must be >= 0, got {self.rho}")


@dataclass(frozen=True)
class ExposureTerm:
    area_id: int
    kappa: float
    weight: float


@dataclass(frozen=True)
class Exposure:
    component: ComponentKey
    terms: tuple[ExposureTerm, ...]


@dataclass(frozen=True)
class ComponentRisk:
    component: ComponentKey
    value: float


@dataclass(frozen=True)
class RiskTable:
    """Per-component risk for every component of one network."""

    values: Mapping[ComponentKey, float]
    exposures: Mapping[ComponentKey, Exposure]
    area_risks: Mapping[int, AreaRisk]

    def risk_of(self, kind: str, entity_id: int) -> float:
        return self.values[(kind, entity_id)]

    def __len__(self) -> int:
        return len(self.values)

    def fingerprint(self) -> str:
        import hashlib

        text = "\n".join(
            f"{kind},{eid},{self.values[(kind, eid)]!r}"
            for kind, eid in sorted(self.values)
        )
        return hashlib.sha256(text.encode()).hexdigest()


def default_line_kappa(voltage_kv: float) -> float:
    return KAPPA_HIGH_VOLTAGE_LINE if voltage_kv >= HIGH_VOLTAGE_KV else KAPPA_LOW_VOLTAGE_LINE


def line_exposure(
    line: Line,
    area_lengths: Iterable[tuple[int, float]],
    km_per_segment: float = DEFAULT_KM_PER_SEGMENT,
    kappa_by_area: Mapping[int, float] | None = None,
) -> Exposure:
    """Split a line's length into per-area segment weights.

    ``area_lengths`` must sum to the line's length within 1e-6 km.
    Weight per area is km / km_per_segment; fractional segments are kept
    as-is so risk stays proportional to exposed length.
    """
    if km_per_segment <= 0:
        raise RiskInputError(f"km_per_segment must be positive, got {km_per_segment}")
    pairs = list(area_lengths)
    total = sum(km for _, km in pairs)
    expected = line.length_km if line.length_km is not None else total
    if abs(total - expected) > 1e-6:
        raise RiskInputError(
            f"line {line.id}: geography lengths sum to {total} km but line is {expected} km"
        )
    terms = []
    for area_id, km in pairs:
        if km < 0:
            raise RiskInputError(f"line {line.id}: negative length {km} km in area {area_id}")
        if km == 0:
            continue
        kappa = default_line_kappa(line.voltage_kv)
        if kappa_by_area is not None and area_id in kappa_by_area:
            kappa = kappa_by_area[area_id]
        terms.append(ExposureTerm(area_id=area_id, kappa=kappa, weight=km / km_per_segment))
    return Exposure(component=(KIND_LINE, line.id), terms=tuple(terms))


def component_risk(exposure: Exposure, area_risks: Mapping[int, AreaRisk]) -> ComponentRisk:
    """Sum kappa * weight * rho across the exposure's areas."""
    value = 0.0
    for term in exposure.terms:
        risk = area_risks.get(term.area_id)
        if risk is None:
            raise RiskInputError(
                f"{exposure.component[0]} {exposure.component[1]}: unknown area {term.area_id}"
            )
        value += term.kappa * term.weight * risk.rho
    return ComponentRisk(component=exposure.component, value=value)


def build_risk_table(
    network: Network,
    area_risks: Mapping[int, AreaRisk],
    exposures: Mapping[ComponentKey, Exposure] | None = None,
    use_defaults: bool = True,
) -> RiskTable:
    """Compute the full component -> risk map for a network.

    Components absent from ``exposures`` fall back to the default rule
    (bus-area inheritance, voltage-class line factors) unless
    ``use_defaults`` is False, in which case an uncovered component is an
    error. Every network component gets an entry.
    """
    exposures = dict(exposures or {})
    values: dict[ComponentKey, float] = {}
    all_exposures: dict[ComponentKey, Exposure] = {}

    def default_exposure(key: ComponentKey) -> Exposure:
        kind, eid = key
        if kind == KIND_BUS:
            area = network.bus_by_id[eid].area_id
            return Exposure(key, (ExposureTerm(area, KAPPA_POINT_COMPONENT, 1.0),))
        if kind == KIND_GEN:
            area = network.bus_by_id[network.gen_by_id[eid].bus].area_id
            return Exposure(key, (ExposureTerm(area, KAPPA_POINT_COMPONENT, 1.0),))
        if kind == KIND_LOAD:
            area = network.bus_by_id[network.load_by_id[eid].bus].area_id
            return Exposure(key, (ExposureTerm(area, KAPPA_POINT_COMPONENT, 1.0),))
        line = network.line_by_id[eid]
        area = network.bus_by_id[line.from_bus].area_id
        if line.length_km is not None and line.length_km > 0:
            weight = line.length_km / DEFAULT_KM_PER_SEGMENT
        else:
            weight = 1.0
        return Exposure(key, (ExposureTerm(area, default_line_kappa(line.voltage_kv), weight),))

    for key in network.component_keys():
        exposure = exposures.get(key)
        if exposure is None:
            if not use_defaults:
                raise RiskInputError(f"no exposure for {key[0]} {key[1]} and defaults disabled")
            exposure = default_exposure(key)
        all_exposures[key] = exposure
        values[key] = component_risk(exposure, area_risks).value

    return RiskTable(values=values, exposures=all_exposures, area_risks=dict(area_risks))


def total_system_risk(risk_table: RiskTable, state: Mapping[ComponentKey, float]) -> float:
    """State-weighted sum of component risks.

    Loads contribute fractionally through their served share x in [0, 1];
    buses, lines and generators contribute their full risk when energized
    (z = 1) and nothing when off.
    """
    total = 0.0
    for key, risk in risk_table.values.items():
        if key not in state:
            raise KeyError(f"state missing component {key[0]} {key[1]}")
        x = state[key]
        if key[0] == KIND_LOAD:
            if x < -1e-9 or x > 1 + 1e-9:
                raise ValueError(f"load {key[1]}: served fraction {x} outside [0, 1]")
        total += x * risk
    return total


def area_risk_total(risk_table: RiskTable, network: Network, area_id: int) -> float:
    """Sum of component risks attributed to one area.

    Multi-area lines count toward an area proportionally to their
    exposure terms in it.
    """
    if area_id not in network.area_by_id:
        raise RiskInputError(f"unknown area {area_id}")
    rho = risk_table.area_risks[area_id].rho if area_id in risk_table.area_risks else 0.0
    total = 0.0
    for exposure in risk_table.exposures.values():
        for term in exposure.terms:
            if term.area_id == area_id:
                total += term.kappa * term.weight * rho
    return total


def components_in_area(risk_table: RiskTable, area_id: int) -> set[ComponentKey]:
    """Components with any exposure term in the area."""
    return {
        key
        for key, exposure in risk_table.exposures.items()
        if any(term.area_id == area_id for term in exposure.terms)
    }


# ---------------------------------------------------------------------------
# Risk input file
# ---------------------------------------------------------------------------


def parse_risk_inputs(text: str, network: Network) -> tuple[dict[int, AreaRisk], dict[ComponentKey, Exposure]]:
    """Parse a risk document (area_risks, kappa_overrides, line_geography).

    Returns the area risk map and explicit exposures for components with
    geography or kappa overrides; everything else falls back to the
    default rule in build_risk_table.
    """
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise RiskInputError(f"not a well-formed risk document: {exc}") from exc
    if not isinstance(doc, Mapping):
        raise RiskInputError("risk document must be a mapping of sections")

    area_risks: dict[int, AreaRisk] = {}
    for entry in doc.get("area_risks") or []:
        area_id = int(entry["area_id"])
        if area_id not in network.area_by_id:
            raise RiskInputError(f"area_risks: unknown area {area_id}")
        area_risks[area_id] = AreaRisk(area_id=area_id, rho=float(entry["rho"]))
    for area in network.areas:
        area_risks.setdefault(area.id, AreaRisk(area_id=area.id, rho=0.0))

    kappa_overrides: dict[ComponentKey, dict[int, float]] = {}
    for entry in doc.get("kappa_overrides") or []:
        key = (str(entry["kind"]), int(entry["id"]))
        if not network.has_component(*key):
            raise RiskInputError(f"kappa_overrides: unknown component {key[0]} {key[1]}")
        kappa = float(entry["kappa"])
        if kappa < 0:
            raise RiskInputError(f"kappa_overrides: kappa must be >= 0 for {key[0]} {key[1]}")
        kappa_overrides.setdefault(key, {})[int(entry["area_id"])] = kappa

    exposures: dict[ComponentKey, Exposure] = {}
    for entry in doc.get("line_geography") or []:
        line_id = int(entry["id"])
        line = network.line_by_id.get(line_id)
        if line is None:
            raise RiskInputError(f"line_geography: unknown line {line_id}")
        segments = [(int(a), float(km)) for a, km in entry["segments"]]
        for area_id, _ in segments:
            if area_id not in area_risks:
                raise RiskInputError(f"line_geography: line {line_id} crosses unknown area {area_id}")
        exposures[(KIND_LINE, line_id)] = line_exposure(
            line,
            segments,
            km_per_segment=float(doc.get("km_per_segment", DEFAULT_KM_PER_SEGMENT)),
            kappa_by_area=kappa_overrides.get((KIND_LINE, line_id)),
        )

    # Kappa overrides for components without geography become single-term
    # exposures in the component's own area.
    for key, by_area in kappa_overrides.items():
        if key in exposures:
            continue
        kind, eid = key
        if kind == KIND_LINE:
            line = network.line_by_id[eid]
            area = network.bus_by_id[line.from_bus].area_id
            if line.length_km is not None and line.length_km > 0:
                weight = line.length_km / DEFAULT_KM_PER_SEGMENT
            else:
                weight = 1.0
        else:
            owner_bus = {
                KIND_BUS: lambda: eid,
                KIND_GEN: lambda: network.gen_by_id[eid].bus,
                KIND_LOAD: lambda: network.load_by_id[eid].bus,
            }[kind]()
            area = network.bus_by_id[owner_bus].area_id
            weight = 1.0
        kappa = by_area.get(area)
        if kappa is None:
            raise RiskInputError(
                f"kappa_overrides: {kind} {eid} override names area(s) {sorted(by_area)} "
                f"but the component sits in area {area}"
            )
        exposures[key] = Exposure(key, (ExposureTerm(area, kappa, weight),))

    return area_risks, exposures


def load_risk_table(text: str, network: Network) -> RiskTable:
    """Parse a risk document and build the full table for the network."""
    area_risks, exposures = parse_risk_inputs(text, network)
    return build_risk_table(network, area_risks, exposures)
