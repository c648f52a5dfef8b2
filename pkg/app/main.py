"""Herdflow command-line entrypoint.

    python app/main.py simulate --config run.cfg [--out DIR]
    python app/main.py diagnose --config run.cfg [--deltas 0.02,0.01]
    python app/main.py optimize --config run.cfg [--out DIR]

Exit codes: 0 success, 1 configuration error, 2 runtime abort,
3 diagnostic failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

# Make `core.*` importable regardless of the working directory.
APP_DIR = Path(__file__).resolve().parent
if str(APP_DIR) not in sys.path:
    sys.path.insert(0, str(APP_DIR))

from core.diagnostics.checks import check_run, stability_report
from core.engine.runner import run
from core.errors import ConfigError, HerdflowError, SimulationAbort
from core.io import writers
from core.io.config import RunConfig, load_config
from core.logging_config import setup_logging
from core.models.piper import PiperModel
from core.optimizer.search import objective, optimize

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_ABORT = 2
EXIT_DIAGNOSTIC = 3


def _output_dir(args, config: RunConfig) -> Path:
    return Path(args.out) if args.out else Path(config.output_dir)


def _write_run(trajectory, config: RunConfig, out: Path) -> None:
    for index, snap in enumerate(trajectory.snapshots):
        if "csv" in config.formats:
            writers.write_snapshot(snap.field, snap.time, out / writers.snapshot_name(index))
        if "pgm" in config.formats:
            writers.write_pgm(snap.field, out / writers.snapshot_name(index, "pgm"))
    writers.write_trajectory(trajectory, out / "agents.csv")


def cmd_simulate(args, config: RunConfig) -> int:
    model = config.build_model()
    out = _output_dir(args, config)
    trajectory = run(model, config.grid, config.solver, config.t_end, config.snapshot_times)
    _write_run(trajectory, config, out)
    findings = check_run(trajectory, model)
    writers.write_report(
        out / "report.txt",
        trajectory.diagnostics,
        findings,
        extra={"final_state": ", ".join(repr(float(v)) for v in trajectory.final_state)},
    )
    logger.info(f"Wrote {len(trajectory.snapshots)} snapshot(s) to {out}")
    return EXIT_OK


def cmd_diagnose(args, config: RunConfig) -> int:
    try:
        deltas = [float(d) for d in args.deltas.split(",") if d.strip()]
    except ValueError:
        raise ConfigError(f"malformed --deltas '{args.deltas}'")
    model = config.build_model()
    out = _output_dir(args, config)
    trajectory = run(model, config.grid, config.solver, config.t_end, config.snapshot_times)
    _write_run(trajectory, config, out)
    findings = check_run(trajectory, model)

    stability_flags: List[str] = []
    try:
        table = stability_report(model, config.grid, config.solver, config.t_end, deltas)
        writers.write_stability(table, out / "stability.csv")
        stability_flags = table.flags
    except ValueError as e:
        raise ConfigError(str(e))
    except SimulationAbort as e:
        stability_flags = [f"perturbed run aborted: {e}"]

    extra = {f"stability.flag.{i}": flag for i, flag in enumerate(stability_flags)}
    extra["stability"] = "pass" if not stability_flags else "fail"
    writers.write_report(out / "report.txt", trajectory.diagnostics, findings, extra=extra)

    failed = [f.check for f in findings if not f.passed]
    if failed or stability_flags:
        logger.error(f"Diagnostics failed: checks={failed} stability_flags={len(stability_flags)}")
        return EXIT_DIAGNOSTIC
    logger.info("All diagnostics passed")
    return EXIT_OK


def cmd_optimize(args, config: RunConfig) -> int:
    model = config.build_model()
    if not isinstance(model, PiperModel):
        raise ConfigError(f"optimize needs the piper scenario, got '{config.scenario}'")
    spec = config.objective_spec(model)
    coarse = config.coarse_grid()
    opt = config.optimizer
    logger.info(
        f"Optimizing piper route on {coarse.nx}x{coarse.ny} cells, budget={opt.budget}, "
        f"target={spec.target}, horizon={spec.horizon}"
    )
    result = optimize(spec, model, coarse, config.solver, opt.budget, opt.seed, nodes=opt.nodes, restarts=opt.restarts)
    full = objective(result.best_route, spec, model, config.grid, config.solver)
    result = result.model_copy(update={"full_resolution_value": full})
    logger.info(f"Full-resolution objective of best route: {full:.6g}")

    out = _output_dir(args, config)
    writers.write_route(result.best_route, out / "route.csv")
    writers.write_history(result, out / "history.csv")
    writers.write_report(out / "optimize.txt", extra={
        "scenario": config.scenario,
        "target": ", ".join(repr(v) for v in spec.target),
        "horizon": spec.horizon,
        "budget": opt.budget,
        "seed": opt.seed,
        "evaluations": result.evaluations,
        "baseline_value": result.baseline_value,
        "best_value": result.best_value,
        "full_resolution_value": full,
        "coarse_cells": coarse.nx,
    })
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "diagnose": cmd_diagnose,
    "optimize": cmd_optimize,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="herdflow", description="Coupled agent / crowd density simulations.")
    parser.add_argument("--log-level", default=None, help="console log level (default from HERDFLOW_LOG_LEVEL)")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="run configuration file")
        cmd.add_argument("--out", default=None, help="output directory (overrides output.dir)")
        if name == "diagnose":
            cmd.add_argument("--deltas", default="0.02,0.01", help="comma separated perturbation sizes")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_CONFIG

    setup_logging(level=args.log_level)
    logger.info("=" * 60)
    logger.info(f"Herdflow {args.command} ({args.config})")
    logger.info("=" * 60)

    try:
        config = load_config(args.config)
        return COMMANDS[args.command](args, config)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        logger.debug("Configuration error details", exc_info=True)
        return EXIT_CONFIG
    except SimulationAbort as e:
        logger.error(f"Simulation aborted: {e}")
        if e.state:
            logger.error(f"State at abort: {e.state}")
        logger.debug("Abort details", exc_info=True)
        return EXIT_ABORT
    except HerdflowError as e:
        # DomainTooSmallError, CflViolationError, OutputError
        logger.error(f"Run failed: {e}")
        logger.debug("Failure details", exc_info=True)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
