"""HTTP API behind the operator console.

Cases are uploaded once and solved interactively at chosen risk weights
with optional component pins; sweeps run asynchronously on a bounded
worker pool. Stored solutions are immutable: the serialized document is
frozen at solve time, so repeated fetches are byte-identical. State is
in-process with optional write-through persistence of plan documents to
a directory.
"""

from __future__ import annotations

import json
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.responses import Response
from pydantic import BaseModel, Field

from .heuristics import TRANSMISSION_HEURISTIC
from .milp import SolveOptions
from .network import CaseFormatError, Network, parse_case, validate
from .risk import RiskInputError, RiskTable, load_risk_table
from .shutoff import (
    FORCE_OFF,
    FORCE_ON,
    Pin,
    PinConflictError,
    PinError,
    ShutoffConfig,
    evaluate_plan,
    plan_to_document,
    solve_shutoff,
)
from .sweep import METHOD_OPS, sweep_alpha, sweep_threshold


class PinBody(BaseModel):
    kind: str
    id: int
    state: str = Field(pattern="^(force_on|force_off)$")


class UploadBody(BaseModel):
    case: str
    risk: str


class SolveBody(BaseModel):
    alpha: float
    pins: list[PinBody] = []
    backend: str | None = None
    time_limit_s: float | None = None


class SweepBody(BaseModel):
    method: str = METHOD_OPS
    grid: list[float] | None = None
    backend: str | None = None


@dataclass
class CaseRecord:
    case_id: str
    network: Network
    risk_table: RiskTable
    solutions: dict[str, bytes] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)


@dataclass
class SweepJob:
    sweep_id: str
    case_id: str
    method: str
    status: str = "running"
    progress: float = 0.0
    points: list[dict] | None = None
    error: str | None = None


def _pin_from_body(body: PinBody) -> Pin:
    return Pin(component=(body.kind, body.id), state=body.state)


def create_app(workers: int = 2, persist_dir: str | None = None, default_backend: str = "reference") -> FastAPI:
    app = FastAPI(title="gridshed", version="0.1.0")
    cases: dict[str, CaseRecord] = {}
    sweeps: dict[str, SweepJob] = {}
    pool = ThreadPoolExecutor(max_workers=max(1, workers))
    persist_path = Path(persist_dir) if persist_dir else None
    if persist_path:
        persist_path.mkdir(parents=True, exist_ok=True)

    def get_case(case_id: str) -> CaseRecord:
        record = cases.get(case_id)
        if record is None:
            raise HTTPException(status_code=404, detail=f"unknown case {case_id}")
        return record

    @app.post("/cases", status_code=201)
    def upload_case(body: UploadBody):
        try:
            network = parse_case(body.case)
            risk_table = load_risk_table(body.risk, network)
        except (CaseFormatError, RiskInputError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        violations = validate(network)
        if violations:
            raise HTTPException(status_code=400, detail=[str(v) for v in violations])
        case_id = uuid.uuid4().hex[:12]
        cases[case_id] = CaseRecord(case_id=case_id, network=network, risk_table=risk_table)
        return {
            "case_id": case_id,
            "summary": _case_summary(network, risk_table),
        }

    @app.get("/cases/{case_id}")
    def case_info(case_id: str):
        record = get_case(case_id)
        return {"case_id": case_id, "summary": _case_summary(record.network, record.risk_table)}

    @app.post("/cases/{case_id}/solve")
    def solve_case(case_id: str, body: SolveBody):
        record = get_case(case_id)
        if not 0.0 <= body.alpha <= 1.0:
            raise HTTPException(status_code=422, detail=f"alpha {body.alpha} outside [0, 1]")
        try:
            pins = tuple(_pin_from_body(p) for p in body.pins)
            options = SolveOptions(time_limit_s=body.time_limit_s)
            config = ShutoffConfig(alpha=body.alpha, pins=pins, options=options)
            plan = solve_shutoff(
                record.network, record.risk_table, config,
                backend=body.backend or default_backend,
            )
        except PinConflictError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except PinError as exc:
            raise HTTPException(status_code=422, detail=str(exc))

        audit = evaluate_plan(record.network, record.risk_table, plan)
        solution_id = uuid.uuid4().hex[:12]
        document = {
            "solution_id": solution_id,
            "case_id": case_id,
            "pins": [p.model_dump() for p in body.pins],
            "plan": plan_to_document(plan),
            "audit": {
                "max_balance_residual_mw": audit.max_balance_residual_mw,
                "max_limit_violation_mw": audit.max_limit_violation_mw,
                "violations": list(audit.violations),
            },
        }
        blob = json.dumps(document, indent=2).encode()
        with record.lock:
            record.solutions[solution_id] = blob
        if persist_path:
            (persist_path / f"{case_id}_{solution_id}.json").write_bytes(blob)

        islands = [sorted(i.buses) for i in audit.islands]
        return {
            "solution_id": solution_id,
            "pins": [p.model_dump() for p in body.pins],
            "summary": {
                "alpha": plan.alpha,
                "status": plan.status,
                "objective": plan.objective,
                "d_tot_mw": plan.d_tot,
                "r_fire": plan.r_fire,
                "islands": islands,
                "buses_off": sorted(i for i, z in plan.z_bus.items() if not z),
                "lines_off": sorted(l for l, z in plan.z_line.items() if not z),
                "generators_off": sorted(g for g, z in plan.z_gen.items() if not z),
            },
            "plan": plan_to_document(plan),
        }

    @app.get("/cases/{case_id}/solutions/{solution_id}")
    def get_solution(case_id: str, solution_id: str):
        record = get_case(case_id)
        blob = record.solutions.get(solution_id)
        if blob is None:
            raise HTTPException(status_code=404, detail=f"unknown solution {solution_id}")
        return Response(content=blob, media_type="application/json")

    @app.post("/cases/{case_id}/sweeps", status_code=202)
    def start_sweep(case_id: str, body: SweepBody):
        record = get_case(case_id)
        if body.method not in (METHOD_OPS, TRANSMISSION_HEURISTIC, "area"):
            raise HTTPException(status_code=422, detail=f"unknown sweep method {body.method!r}")
        sweep_id = uuid.uuid4().hex[:12]
        job = SweepJob(sweep_id=sweep_id, case_id=case_id, method=body.method)
        sweeps[sweep_id] = job

        def run() -> None:
            def on_point(done: int, total: int) -> None:
                job.progress = done / total

            try:
                backend = body.backend or default_backend
                if body.method == METHOD_OPS:
                    result = sweep_alpha(
                        record.network, record.risk_table, body.grid, backend, on_point=on_point
                    )
                else:
                    result = sweep_threshold(
                        record.network, record.risk_table, body.grid,
                        kind=body.method, backend=backend, on_point=on_point,
                    )
                job.points = [
                    {
                        "method": p.method,
                        "parameter": p.parameter,
                        "r_fire": p.r_fire,
                        "d_tot_mw": p.d_tot,
                        "objective": p.objective,
                        "status": p.status,
                        "solve_time_s": p.solve_time_s,
                    }
                    for p in result.points
                ]
                job.progress = 1.0
                job.status = "done"
            except Exception as exc:  # job failures carry diagnostics
                job.error = str(exc)
                job.status = "failed"

        pool.submit(run)
        return {"sweep_id": sweep_id}

    @app.get("/sweeps/{sweep_id}")
    def sweep_status(sweep_id: str):
        job = sweeps.get(sweep_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"unknown sweep {sweep_id}")
        out = {
            "sweep_id": job.sweep_id,
            "case_id": job.case_id,
            "method": job.method,
            "status": job.status,
            "progress": job.progress,
        }
        if job.status == "done":
            out["points"] = job.points
        if job.status == "failed":
            out["error"] = job.error
        return out

    return app


def _case_summary(network: Network, risk_table: RiskTable) -> dict:
    from .sweep import standard_operation_point

    standard = standard_operation_point(network, risk_table)
    return {
        "buses": len(network.buses),
        "lines": len(network.lines),
        "generators": len(network.generators),
        "loads": len(network.loads),
        "areas": len(network.areas),
        "total_demand_mw": network.total_demand_mw(),
        "standard_risk": standard.r_fire,
        "violations": [],
        "buses_geo": [
            {"id": b.id, "area_id": b.area_id, "coord": list(b.coord) if b.coord else None}
            for b in network.buses
        ],
        "lines_geo": [
            {"id": l.id, "from_bus": l.from_bus, "to_bus": l.to_bus} for l in network.lines
        ],
        "generators_at": [{"id": g.id, "bus": g.bus} for g in network.generators],
        "loads_at": [
            {"id": d.id, "bus": d.bus, "demand_mw": d.demand_mw} for d in network.loads
        ],
    }
