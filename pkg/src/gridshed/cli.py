"""Command-line interface.

Exit codes: 0 success, 1 domain error (bad data, infeasible pins), 2
usage error. Output files are written atomically (temp file + rename) so
a failed run never leaves a partial artifact. The default solver backend
comes from GRIDSHED_BACKEND; flags override it.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import yaml

from .heuristics import (
    AREA_HEURISTIC,
    TRANSMISSION_HEURISTIC,
    ForcedOffSet,
    run_heuristic_pipeline,
    solve_max_load_delivery,
)
from .matpower import parse_matpower_subset
from .milp import MilpError, SolveOptions
from .network import ALL_KINDS, CaseFormatError, Network, parse_case, validate
from .risk import RiskInputError, RiskTable, load_risk_table
from .shutoff import (
    FORCE_OFF,
    FORCE_ON,
    Pin,
    PinConflictError,
    PinError,
    ShutoffConfig,
    ShutoffPlan,
    ShutoffSolveError,
    evaluate_plan,
    plan_to_document,
    serialize_plan,
    solve_shutoff,
)
from .sweep import (
    METHOD_OPS,
    SweepResult,
    compare_report,
    default_alpha_grid,
    line_scatter,
    scatter_to_csv,
    standard_operation_point,
    sweep_alpha,
    sweep_threshold,
    sweep_to_csv,
)

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2

_DOMAIN_ERRORS = (
    CaseFormatError,
    RiskInputError,
    PinError,
    PinConflictError,
    ShutoffSolveError,
    MilpError,
    OSError,
)


class UsageError(Exception):
    pass


def _atomic_write(path: str | Path, content: str) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(content)
    os.replace(tmp, path)


def _read_case(path: str) -> Network:
    text = Path(path).read_text()
    if "mpc." in text:
        return parse_matpower_subset(text)
    return parse_case(text)


def _read_risk(path: str, network: Network) -> RiskTable:
    return load_risk_table(Path(path).read_text(), network)


def _parse_pin(spec: str) -> Pin:
    parts = spec.split(":")
    if len(parts) != 3:
        raise UsageError(f"pin must look like kind:id:on|off, got {spec!r}")
    kind, raw_id, state = parts
    if kind not in ALL_KINDS:
        raise UsageError(f"pin kind must be one of {', '.join(ALL_KINDS)}, got {kind!r}")
    try:
        eid = int(raw_id)
    except ValueError:
        raise UsageError(f"pin id must be an integer, got {raw_id!r}") from None
    if state not in ("on", "off"):
        raise UsageError(f"pin state must be on or off, got {state!r}")
    return Pin(component=(kind, eid), state=FORCE_ON if state == "on" else FORCE_OFF)


def _solve_options(args) -> SolveOptions:
    return SolveOptions(
        relative_gap=args.gap,
        time_limit_s=args.time_limit,
    )


def _backend(args) -> str:
    if args.backend:
        return args.backend
    return os.environ.get("GRIDSHED_BACKEND", "reference")


def _emit(content: str, out: str | None) -> None:
    if out:
        _atomic_write(out, content)
    else:
        sys.stdout.write(content)


def _plan_output(
    plan: ShutoffPlan,
    fmt: str,
    network: Network,
    risk_table: RiskTable,
    forced_off=(),
) -> str:
    if fmt == "plan":
        return serialize_plan(plan, forced_off)
    if fmt == "csv":
        lines = ["kind,id,energized,value_mw,served_fraction"]
        for i in sorted(plan.z_bus):
            lines.append(f"bus,{i},{plan.z_bus[i]},,")
        for g in sorted(plan.z_gen):
            lines.append(f"generator,{g},{plan.z_gen[g]},{plan.p_gen[g]:.10g},")
        for l in sorted(plan.z_line):
            lines.append(f"line,{l},{plan.z_line[l]},{plan.p_flow[l]:.10g},")
        for d in sorted(plan.x_load):
            lines.append(f"load,{d},,,{plan.x_load[d]:.10g}")
        return "\n".join(lines) + "\n"
    audit = evaluate_plan(network, risk_table, plan)
    doc = {
        "alpha": plan.alpha,
        "status": plan.status,
        "objective": plan.objective,
        "d_tot_mw": audit.d_tot,
        "r_fire": audit.r_fire,
        "max_balance_residual_mw": audit.max_balance_residual_mw,
        "max_limit_violation_mw": audit.max_limit_violation_mw,
        "islands": len(audit.islands),
        "violations": list(audit.violations),
    }
    return json.dumps(doc, indent=2) + "\n"


def _parse_grid(raw: str | None) -> list[float] | None:
    if raw is None:
        return None
    try:
        return [float(tok) for tok in raw.split(",") if tok.strip()]
    except ValueError:
        raise UsageError(f"grid must be a comma-separated list of numbers, got {raw!r}") from None


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _cmd_validate(args) -> int:
    network = _read_case(args.case)
    violations = validate(network)
    if args.risk:
        _read_risk(args.risk, network)  # raises on problems
    for v in violations:
        print(str(v), file=sys.stderr)
    if violations:
        return EXIT_DOMAIN
    print(
        f"ok: {len(network.buses)} buses, {len(network.lines)} lines, "
        f"{len(network.generators)} generators, {len(network.loads)} loads, "
        f"{network.total_demand_mw():.10g} MW total demand"
    )
    return EXIT_OK


def _cmd_risk(args) -> int:
    network = _read_case(args.case)
    table = _read_risk(args.risk, network)
    lines = ["kind,id,risk"]
    for kind, eid in sorted(table.values):
        lines.append(f"{kind},{eid},{table.values[(kind, eid)]:.10g}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _cmd_solve(args) -> int:
    if not 0.0 <= args.alpha <= 1.0:
        raise UsageError(f"--alpha must lie in [0, 1], got {args.alpha}")
    network = _read_case(args.case)
    table = _read_risk(args.risk, network)
    pins = tuple(_parse_pin(s) for s in args.pin or [])
    config = ShutoffConfig(alpha=args.alpha, pins=pins, options=_solve_options(args))
    plan = solve_shutoff(network, table, config, backend=_backend(args))
    _emit(_plan_output(plan, args.format, network, table), args.out)
    return EXIT_OK


def _cmd_mld(args) -> int:
    network = _read_case(args.case)
    table = _read_risk(args.risk, network)
    forced: set = set()
    for spec in args.pin or []:
        pin = _parse_pin(spec)
        if pin.state != FORCE_OFF:
            raise UsageError("mld only accepts off pins (the forced-off set)")
        forced.add(pin.component)
    plan = solve_max_load_delivery(
        network, table, ForcedOffSet(frozenset(forced)), backend=_backend(args),
        options=_solve_options(args),
    )
    _emit(_plan_output(plan, args.format, network, table, sorted(forced)), args.out)
    return EXIT_OK


def _cmd_heuristic(args) -> int:
    if args.method not in (TRANSMISSION_HEURISTIC, AREA_HEURISTIC):
        raise UsageError("--method must be transmission or area for this command")
    if args.threshold is None:
        raise UsageError("--threshold is required")
    network = _read_case(args.case)
    table = _read_risk(args.risk, network)
    plan = run_heuristic_pipeline(
        network, table, args.method, args.threshold,
        backend=_backend(args), options=_solve_options(args),
    )
    _emit(_plan_output(plan, args.format, network, table), args.out)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    network = _read_case(args.case)
    table = _read_risk(args.risk, network)
    grid = _parse_grid(args.grid)
    backend = _backend(args)
    options = _solve_options(args)
    if args.method == METHOD_OPS:
        if grid and any(not 0.0 <= a <= 1.0 for a in grid):
            raise UsageError("alpha grid values must lie in [0, 1]")
        sweep = sweep_alpha(network, table, grid, backend, options, workers=args.workers)
    else:
        sweep = sweep_threshold(
            network, table, grid, kind=args.method, backend=backend,
            options=options, workers=args.workers,
        )
    _emit(sweep_to_csv(sweep), args.out)
    if args.figures:
        if not args.out:
            raise UsageError("--figures requires --out to name the data file")
        from .figures import plot_parameter_sweep

        plot_parameter_sweep(sweep, str(Path(args.out).with_suffix(".png")))
    return EXIT_OK


def _cmd_compare(args) -> int:
    network = _read_case(args.case)
    table = _read_risk(args.risk, network)
    out_dir = Path(args.out or "compare_out")
    out_dir.mkdir(parents=True, exist_ok=True)
    backend = _backend(args)
    options = _solve_options(args)

    ops = sweep_alpha(network, table, _parse_grid(args.grid), backend, options, workers=args.workers)
    trans = sweep_threshold(
        network, table, None, kind=TRANSMISSION_HEURISTIC, backend=backend,
        options=options, workers=args.workers,
    )
    standard = standard_operation_point(network, table)
    report = compare_report(
        network, table, [ops, trans], area_threshold=args.threshold,
        backend=backend, options=options,
    )

    _atomic_write(out_dir / "sweep.csv", sweep_to_csv([ops, trans], standard))
    _atomic_write(out_dir / "report.json", json.dumps(report, indent=2) + "\n")
    for key, rows in report["scatter"].items():
        _atomic_write(out_dir / f"scatter_{key}.csv", scatter_to_csv(rows))

    from .figures import plot_line_scatter, plot_parameter_sweep, plot_tradeoff

    plot_tradeoff([ops, trans], str(out_dir / "tradeoff.png"), standard=standard)
    plot_parameter_sweep(ops, str(out_dir / "alpha_sweep.png"))
    plot_parameter_sweep(trans, str(out_dir / "threshold_sweep.png"))
    for key, rows in report["scatter"].items():
        plot_line_scatter(rows, str(out_dir / f"scatter_{key}.png"), title=key.replace("_", " "))
    print(f"comparison written to {out_dir}")
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    host, _, port = args.listen.rpartition(":")
    app = create_app(workers=args.workers, persist_dir=args.persist_dir)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="info")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, risk_required: bool = True) -> None:
    p.add_argument("--case", required=True, help="case file (canonical or MATPOWER subset)")
    p.add_argument("--risk", required=risk_required, help="risk input file")
    p.add_argument("--backend", default=None, help="solver backend (default: $GRIDSHED_BACKEND or reference)")
    p.add_argument("--gap", type=float, default=1e-6, help="relative MIP gap")
    p.add_argument("--time-limit", type=float, default=None, help="per-solve time limit (s)")
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument("--seed", type=int, default=None, help="reserved")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridshed",
        description="Risk-aware power shut-off planning: solve, benchmark, sweep, serve.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and validate a case (and optional risk file)")
    p.add_argument("--case", required=True)
    p.add_argument("--risk", default=None)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("risk", help="emit the per-component risk table")
    _add_common(p)
    p.set_defaults(func=_cmd_risk)

    p = sub.add_parser("solve", help="solve the shut-off problem at one alpha")
    _add_common(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--pin", action="append", metavar="kind:id:on|off")
    p.add_argument("--format", choices=("plan", "csv", "report"), default="plan")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("mld", help="maximize load delivery with pinned-off components")
    _add_common(p)
    p.add_argument("--pin", action="append", metavar="kind:id:off")
    p.add_argument("--format", choices=("plan", "csv", "report"), default="plan")
    p.set_defaults(func=_cmd_mld)

    p = sub.add_parser("heuristic", help="threshold heuristic pipeline (shut off, then serve)")
    _add_common(p)
    p.add_argument("--method", choices=(TRANSMISSION_HEURISTIC, AREA_HEURISTIC), required=True)
    p.add_argument("--threshold", type=float, required=True)
    p.add_argument("--format", choices=("plan", "csv", "report"), default="plan")
    p.set_defaults(func=_cmd_heuristic)

    p = sub.add_parser("sweep", help="parameter sweep producing the trade-off table")
    _add_common(p)
    p.add_argument("--method", choices=(METHOD_OPS, TRANSMISSION_HEURISTIC, AREA_HEURISTIC), default=METHOD_OPS)
    p.add_argument("--grid", default=None, help="comma-separated parameter values")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--figures", action="store_true", help="also render the sweep figure")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("compare", help="cross-method report with figures")
    _add_common(p)
    p.add_argument("--grid", default=None, help="alpha grid override")
    p.add_argument("--threshold", type=float, default=None, help="area-heuristic threshold for the report")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("serve", help="run the HTTP service for the operator console")
    p.add_argument("--listen", default="127.0.0.1:8000")
    p.add_argument("--workers", type=int, default=2)
    p.add_argument("--persist-dir", default=None, help="write-through plan persistence directory")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        # Domain-typed ValueErrors map to domain failures.
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except _DOMAIN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
