"""Operator-facing command line.

Six subcommands share one JSON run file: coeffs (coefficient report),
simulate (trajectory CSV plus summary), classify (damping regime),
sweep (one-parameter regime map), limit (small-cell convergence study)
and audit (published-constant defects).  File-writing commands place
CSV, JSON and rendered figures side by side in the output directory.

Exit codes: 0 success, 2 invalid input, 3 singular or degenerate
configuration, 4 integrator check failure, 5 operation undefined in the
current damping regime.  The COMPACTA_LOG environment variable picks the
diagnostic level (debug, info, warning, error).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor, as_completed
from pathlib import Path
from typing import Any

import numpy as np

from . import plots
from .coefficients import (
    MacroCoefficients,
    ReducedCoefficients,
    cubic_macro_coefficients,
    reduced_coefficients,
)
from .config import (
    BACKENDS,
    RunConfig,
    SweepSpec,
    format_float,
    load_config,
)
from .dynamics import (
    OSCILLATORY,
    audit_published_constants,
    asymptotic_limit_report,
    classify_regime,
    closed_form_oracle_gap,
    closed_form_trajectory,
    damping_class,
    deviation_sign_changes,
)
from .errors import (
    BracketingError,
    CompactaError,
    DivergenceError,
    OracleConvergenceError,
    RegimeError,
    SingularModelError,
    UnsupportedGeometryError,
    ValidationError,
)

log = logging.getLogger("compacta.cli")

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SINGULAR = 3
EXIT_ORACLE = 4
EXIT_REGIME = 5

SWEEP_HEADER = ["value", "status", "regime", "alpha0", "beta0", "discriminant",
                "q0_infinity", "decay_time", "period"]
LIMIT_HEADER = ["l0", "slow_root", "fast_root", "root_gap", "supnorm_gap"]


def _configure_logging() -> None:
    name = os.environ.get("COMPACTA_LOG", "warning").strip().lower()
    level = {
        "debug": logging.DEBUG,
        "info": logging.INFO,
        "warning": logging.WARNING,
        "error": logging.ERROR,
    }.get(name, logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _load(args: argparse.Namespace) -> RunConfig:
    config = load_config(args.config)
    numerics = config.numerics
    if getattr(args, "backend", None):
        numerics = dataclasses.replace(numerics, backend=args.backend)
    output = config.output
    if getattr(args, "out", None):
        output = dataclasses.replace(output, directory=args.out)
    if getattr(args, "no_plots", False):
        output = dataclasses.replace(output, plots=False)
    return dataclasses.replace(config, numerics=numerics, output=output)


def _out_dir(config: RunConfig, required: bool) -> Path | None:
    directory = config.output.directory
    if directory is None:
        if required:
            raise ValidationError(
                "this command writes files: pass --out or set output.directory"
            )
        return None
    path = Path(directory)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _jobs(args: argparse.Namespace) -> int:
    jobs = getattr(args, "jobs", None)
    if jobs is None or jobs == 0:
        return os.cpu_count() or 1
    if jobs < 0:
        raise ValidationError(f"--jobs must be positive, got {jobs}")
    return jobs


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return format_float(value)


def _write_csv(path: Path, header: list[str], rows) -> None:
    # comma separator, `.` decimal, LF endings, shortest round-trip floats
    with open(path, "w", newline="") as handle:
        handle.write(",".join(header) + "\n")
        for row in rows:
            handle.write(",".join(_cell(value) for value in row) + "\n")


def _emit_json(payload: dict, path: Path | None) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text)
        log.info("wrote %s", path)


def _complex_value(z: complex) -> Any:
    if z.imag == 0.0:
        return z.real
    return {"real": z.real, "imag": z.imag}


def _macro_payload(mc: MacroCoefficients) -> dict:
    return {
        "e": [float(v) for v in mc.e],
        "f": [float(v) for v in mc.f],
        "w": [float(v) for v in mc.w],
        "m": [float(v) for v in mc.m],
        "C": [[float(v) for v in row] for row in mc.C],
        "D": [[float(v) for v in row] for row in mc.D],
        "phi_f": float(mc.phi_f),
        "rho_bar": float(mc.rho_bar),
    }


def _reduced_payload(rc: ReducedCoefficients) -> dict:
    return {
        "alpha0": float(rc.alpha0),
        "beta0": float(rc.beta0),
        "gamma0": float(rc.gamma0),
        "gamma1": float(rc.gamma1),
        "discriminant": float(rc.discriminant),
    }


def _scalar_items(mc: MacroCoefficients, rc: ReducedCoefficients) -> dict[str, float]:
    items: dict[str, float] = {}
    for name, vec in (("e", mc.e), ("f", mc.f), ("w", mc.w), ("m", mc.m)):
        for i in range(3):
            items[f"{name}{i + 1}"] = float(vec[i])
    for name, mat in (("C", mc.C), ("D", mc.D)):
        for i in range(3):
            for j in range(3):
                items[f"{name}{i + 1}{j + 1}"] = float(mat[i, j])
    items["phi_f"] = float(mc.phi_f)
    items["rho_bar"] = float(mc.rho_bar)
    items["alpha0"] = float(rc.alpha0)
    items["beta0"] = float(rc.beta0)
    items["gamma0"] = float(rc.gamma0)
    items["gamma1"] = float(rc.gamma1)
    return items


def cmd_coeffs(args: argparse.Namespace) -> int:
    config = _load(args)
    out = _out_dir(config, required=False)
    spec, materials = config.cell, config.materials
    per_backend: dict[str, tuple[MacroCoefficients, ReducedCoefficients]] = {}
    report: dict[str, Any] = {
        "cell": {"l0": spec.l0, "g": spec.g, "h": spec.h},
        "backends": {},
        "discrepancy": {},
    }
    for backend in BACKENDS:
        mc = cubic_macro_coefficients(spec, materials, backend)
        rc = reduced_coefficients(spec, materials, backend)
        per_backend[backend] = (mc, rc)
        report["backends"][backend] = {
            "macro": _macro_payload(mc),
            "reduced": _reduced_payload(rc),
        }
    paper_items = _scalar_items(*per_backend["paper"])
    fp_items = _scalar_items(*per_backend["first-principles"])
    for name, paper_value in paper_items.items():
        fp_value = fp_items[name]
        report["discrepancy"][name] = {
            "paper": paper_value,
            "first_principles": fp_value,
            "ratio": paper_value / fp_value if fp_value != 0.0 else None,
        }
    _emit_json(report, out / "coefficients.json" if out else None)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    config = _load(args)
    out = _out_dir(config, required=True)
    spec, materials, scenario = config.cell, config.materials, config.scenario
    numerics = config.numerics
    rc = reduced_coefficients(spec, materials, numerics.backend)
    # run the integrator check before touching the filesystem so a failed
    # tolerance leaves no partial outputs behind
    gap = closed_form_oracle_gap(
        rc, scenario, target=numerics.oracle_tolerance, critical_band=numerics.critical_band
    )
    trajectory = closed_form_trajectory(
        spec, materials, scenario,
        backend=numerics.backend, samples=numerics.samples,
        critical_band=numerics.critical_band,
    )
    for warning in trajectory.warnings:
        log.warning("%s", warning)
    report = classify_regime(rc, spec, materials, numerics.critical_band)
    q0_inf = rc.q0_infinity(scenario.eta)
    tail = trajectory.times > scenario.t0
    summary = {
        "regime": report.regime,
        "backend": numerics.backend,
        "q0_infinity": float(q0_inf),
        "max_abs_q0": float(np.max(np.abs(trajectory.q0))),
        "zero_crossings_after_t0": deviation_sign_changes(trajectory.q0[tail], q0_inf),
        "oracle_max_gap": float(gap),
        "oracle_tolerance": numerics.oracle_tolerance,
        "pressure_route_mismatch": float(trajectory.pressure_mismatch),
        "samples": numerics.samples,
        "warnings": list(trajectory.warnings),
    }
    _write_csv(
        out / "trajectory.csv",
        ["t", "Q0", "Q0dot", "Q1", "P", "phase"],
        zip(trajectory.times, trajectory.q0, trajectory.q0_dot,
            trajectory.q1, trajectory.pressure, trajectory.phase),
    )
    _emit_json(summary, out / "summary.json")
    if config.output.plots:
        plots.render_trajectory(trajectory, scenario.t0, out / "trajectory.png")
    return EXIT_OK


def cmd_classify(args: argparse.Namespace) -> int:
    config = _load(args)
    out = _out_dir(config, required=False)
    spec, materials = config.cell, config.materials
    rc = reduced_coefficients(spec, materials, config.numerics.backend)
    report = classify_regime(rc, spec, materials, config.numerics.critical_band)
    payload = {
        "regime": report.regime,
        "backend": report.backend,
        "l0": report.l0,
        "alpha0": report.alpha0,
        "beta0": report.beta0,
        "discriminant": report.discriminant,
        "critical_l0": report.critical_l0,
        "critical_l0_closed_form": report.critical_l0_closed_form,
        "decay_time": report.decay_time,
        "period": report.period,
    }
    _emit_json(payload, out / "regime.json" if out else None)
    return EXIT_OK


def _sweep_point(config: RunConfig, sweep: SweepSpec, value: float) -> dict[str, Any]:
    row: dict[str, Any] = dict.fromkeys(SWEEP_HEADER)
    row["value"] = value
    try:
        point = sweep.apply(config, value)
        rc = reduced_coefficients(point.cell, point.materials, point.numerics.backend)
        regime = damping_class(rc.alpha0, rc.beta0, point.numerics.critical_band)
        slow = rc.roots()[1]
        row.update(
            status="ok",
            regime=regime,
            alpha0=rc.alpha0,
            beta0=rc.beta0,
            discriminant=rc.discriminant,
            q0_infinity=rc.q0_infinity(point.scenario.eta),
            decay_time=1.0 / abs(slow.real),
            period=2.0 * np.pi / abs(slow.imag) if regime == OSCILLATORY else None,
        )
    except CompactaError as exc:
        log.warning("sweep point %s=%r is singular: %s", sweep.param, value, exc)
        row["status"] = "singular"
    return row


def cmd_sweep(args: argparse.Namespace) -> int:
    config = _load(args)
    out = _out_dir(config, required=True)
    sweep = SweepSpec(
        param=args.param, lo=args.min, hi=args.max, count=args.count, scale=args.scale
    )
    values = [float(v) for v in sweep.values()]
    jobs = _jobs(args)
    rows: list[dict[str, Any] | None] = [None] * len(values)
    if jobs > 1 and len(values) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {
                pool.submit(_sweep_point, config, sweep, value): index
                for index, value in enumerate(values)
            }
            for future in as_completed(futures):
                rows[futures[future]] = future.result()
    else:
        rows = [_sweep_point(config, sweep, value) for value in values]
    singular = sum(1 for row in rows if row["status"] != "ok")
    if singular:
        log.warning("%d of %d sweep points were singular", singular, len(rows))
    _write_csv(out / "sweep.csv", SWEEP_HEADER, ([row[k] for k in SWEEP_HEADER] for row in rows))
    if config.output.plots:
        plots.render_sweep(rows, sweep.param, sweep.scale, out / "sweep.png")
    return EXIT_OK


def cmd_limit(args: argparse.Namespace) -> int:
    config = _load(args)
    out = _out_dir(config, required=True)
    try:
        sequence = tuple(float(part) for part in args.sequence.split(","))
    except ValueError:
        raise ValidationError(
            f"--sequence must be comma-separated numbers, got {args.sequence!r}"
        ) from None
    report = asymptotic_limit_report(
        config.materials, config.cell.g, config.cell.h, config.scenario,
        sequence, backend=config.numerics.backend,
        samples=config.numerics.samples, jobs=_jobs(args),
    )
    _write_csv(
        out / "limit.csv",
        LIMIT_HEADER,
        ([row.l0, row.slow_root, row.fast_root, row.root_gap, row.supnorm_gap]
         for row in report.rows),
    )
    summary = {
        "backend": report.backend,
        "slow_root_limit": report.slow_root_limit,
        "fitted_order_root": report.fitted_order_root,
        "fitted_order_supnorm": report.fitted_order_supnorm,
        "note": report.note,
        "rows": [
            {"l0": row.l0, "a2_gap": row.a2_gap, "fast_branch_supnorm": row.fast_branch_supnorm}
            for row in report.rows
        ],
    }
    _emit_json(summary, out / "limit_summary.json")
    if config.output.plots:
        plots.render_limit(report, out / "limit.png")
    return EXIT_OK


def cmd_audit(args: argparse.Namespace) -> int:
    config = _load(args)
    out = _out_dir(config, required=False)
    rc = reduced_coefficients(config.cell, config.materials, config.numerics.backend)
    audit = audit_published_constants(rc, config.scenario, config.numerics.critical_band)
    payload = {
        "backend": audit.backend,
        "regime": audit.regime,
        "published": {
            "a1": _complex_value(audit.published_a1),
            "a2": _complex_value(audit.published_a2),
            "b1": _complex_value(audit.published_b1),
            "b2": _complex_value(audit.published_b2),
            "a3": audit.published_a3,
            "start_value_defect": audit.published_start_value_defect,
            "start_slope_defect": audit.published_start_slope_defect,
            "junction_value_defect": audit.published_junction_value_defect,
            "junction_slope_defect": audit.published_junction_slope_defect,
            "a3_start_defect": audit.published_a3_start_defect,
        },
        "derived": {
            "start_value_defect": audit.derived_start_value_defect,
            "start_slope_defect": audit.derived_start_slope_defect,
            "junction_value_defect": audit.derived_junction_value_defect,
            "junction_slope_defect": audit.derived_junction_slope_defect,
            "a3_start_defect": audit.derived_a3_start_defect,
        },
    }
    _emit_json(payload, out / "audit.json" if out else None)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="compacta",
        description="Settling-induced micro-vibration model of saturated granular ground.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, jobs: bool = False, renders: bool = False) -> None:
        p.add_argument("--config", required=True, help="JSON run file")
        p.add_argument("--backend", choices=list(BACKENDS), default=None,
                       help="override the configured coefficient backend")
        p.add_argument("--out", default=None, help="output directory")
        if jobs:
            p.add_argument("--jobs", type=int, default=0,
                           help="worker count for grid evaluation (0 = all cores)")
        if renders:
            p.add_argument("--no-plots", action="store_true", help="skip figure files")

    p = sub.add_parser("coeffs", help="macro and reduced coefficients for both backends")
    common(p)
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("simulate", help="two-phase trajectory with recovered Q1 and P")
    common(p, renders=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("classify", help="damping regime and critical cell size")
    common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("sweep", help="regime map over one parameter grid")
    common(p, jobs=True, renders=True)
    p.add_argument("--param", required=True, help="swept parameter name")
    p.add_argument("--min", required=True, type=float, help="grid lower bound")
    p.add_argument("--max", required=True, type=float, help="grid upper bound")
    p.add_argument("--count", required=True, type=int, help="number of grid points")
    p.add_argument("--scale", choices=["linear", "log"], default="linear")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("limit", help="small-cell convergence study")
    common(p, jobs=True, renders=True)
    p.add_argument("--sequence", required=True,
                   help="comma-separated decreasing cell sizes, e.g. 0.4,0.2,0.1,0.05")
    p.set_defaults(func=cmd_limit)

    p = sub.add_parser("audit", help="defects of the published integration constants")
    common(p)
    p.set_defaults(func=cmd_audit)
    return parser


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VALIDATION
    except (SingularModelError, UnsupportedGeometryError, BracketingError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_SINGULAR
    except (OracleConvergenceError, DivergenceError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ORACLE
    except RegimeError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_REGIME
    except CompactaError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VALIDATION


if __name__ == "__main__":
    raise SystemExit(main())
