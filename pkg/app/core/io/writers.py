"""Result files: density snapshots (CSV and PGM), agent trajectories, reports, routes."""
from __future__ import annotations

import logging
import re
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
from PIL import Image

from core.diagnostics.models import DiagnosticsReport, Finding, StabilityTable
from core.engine.models import Trajectory
from core.errors import OutputError
from core.grid.models import DensityField, GridSpec
from core.optimizer.models import OptimizationResult, RouteParam

logger = logging.getLogger(__name__)

_HEADER = re.compile(r"^#\s*(.*)$")


def _write_text(path: Path, text: str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
    except OSError as e:
        raise OutputError(path, e.strerror or str(e))
    logger.debug(f"Wrote {path}")
    return path


def _read_lines(path: Path) -> List[str]:
    try:
        return Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise OutputError(path, e.strerror or str(e))


def _header_fields(line: str, path) -> Dict[str, str]:
    match = _HEADER.match(line.strip())
    if not match:
        raise OutputError(path, "missing '#' header line")
    fields = {}
    for item in match.group(1).split():
        key, sep, value = item.partition("=")
        if sep:
            fields[key] = value
    return fields


def snapshot_name(index: int, suffix: str = "csv") -> str:
    return f"rho_t{index:03d}.{suffix}"


def write_snapshot(field: DensityField, time: float, path) -> Path:
    """Header line, then one row per cell row from lowest to highest y."""
    g = field.grid
    lines = [f"# t={time!r} nx={g.nx} ny={g.ny} x0={g.x0!r} y0={g.y0!r} dx={g.dx!r} dy={g.dy!r}"]
    for row in field.values:
        lines.append(",".join(f"{v:.9g}" for v in row))
    return _write_text(path, "\n".join(lines) + "\n")


def read_snapshot(path, rho_max: float = 1.0) -> Tuple[float, DensityField]:
    lines = [line for line in _read_lines(path) if line.strip()]
    if not lines:
        raise OutputError(path, "empty snapshot file")
    fields = _header_fields(lines[0], path)
    try:
        grid = GridSpec(
            x0=float(fields["x0"]), y0=float(fields["y0"]),
            nx=int(fields["nx"]), ny=int(fields["ny"]),
            dx=float(fields["dx"]), dy=float(fields["dy"]),
        )
        time = float(fields["t"])
        values = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    except (KeyError, ValueError) as e:
        raise OutputError(path, f"malformed snapshot: {e}")
    if values.shape != grid.shape:
        raise OutputError(path, f"expected {grid.ny} rows of {grid.nx} values, got shape {values.shape}")
    return time, DensityField(grid=grid, values=values, rho_max=rho_max)


def write_pgm(field: DensityField, path) -> Path:
    """8-bit grayscale, black = 0 and white = rho_max; image row 0 is the top (largest y)."""
    scaled = np.clip(field.values, 0.0, field.rho_max) / field.rho_max
    gray = np.flipud(np.rint(255.0 * scaled)).astype(np.uint8)
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        Image.fromarray(gray).save(path, format="PPM")
    except OSError as e:
        raise OutputError(path, e.strerror or str(e))
    return path


def write_trajectory(trajectory: Trajectory, path) -> Path:
    """CSV ``t,p1,...,pN``, one row per step; an existing file is replaced."""
    lines = [",".join(["t"] + [f"p{i + 1}" for i in range(trajectory.state_size)])]
    for t, state in zip(trajectory.times, trajectory.agent_states):
        lines.append(",".join([repr(float(t))] + [repr(float(v)) for v in state]))
    return _write_text(path, "\n".join(lines) + "\n")


def _fmt(value) -> str:
    if value is None:
        return "unavailable"
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def report_lines(report: DiagnosticsReport) -> List[Tuple[str, object]]:
    items: List[Tuple[str, object]] = [
        ("scenario", report.scenario),
        ("rho_max", report.rho_max),
        ("mass.initial", report.initial_mass),
        ("mass.drift", report.mass_drift),
        ("density.min", report.min_density),
        ("density.max", report.max_density),
        ("clipped_mass", report.clipped_mass),
        ("tv.initial", report.initial_tv),
        ("support.initial_radius", report.initial_support_radius),
        ("support.threshold", report.support_threshold),
        ("kernel_clip_events", report.kernel_clip_events),
        ("steps", max(0, len(report.steps) - 1)),
    ]
    if report.watch_box is not None:
        items.append(("watch_box", ", ".join(repr(v) for v in report.watch_box)))
    for i, snap in enumerate(report.snapshots):
        prefix = f"snapshot.{i}"
        items += [
            (f"{prefix}.time", snap.time),
            (f"{prefix}.step", snap.step),
            (f"{prefix}.mass", snap.mass),
            (f"{prefix}.tv", snap.total_variation),
            (f"{prefix}.tv_bound", snap.tv_bound),
            (f"{prefix}.support_radius", snap.support_radius),
            (f"{prefix}.support_bound", snap.support_bound),
            (f"{prefix}.agent_norm", snap.agent_norm),
            (f"{prefix}.agent_bound", snap.agent_bound),
            (f"{prefix}.components", snap.components),
            (f"{prefix}.watched_mass", snap.watched_mass),
        ]
    return items


def write_report(
    path,
    report: Optional[DiagnosticsReport] = None,
    findings: Iterable[Finding] = (),
    extra: Optional[Dict[str, object]] = None,
) -> Path:
    """Flat ``key = value`` text report."""
    items = report_lines(report) if report is not None else []
    for finding in findings:
        items.append((f"check.{finding.check}", "pass" if finding.passed else "fail"))
        if finding.detail:
            items.append((f"check.{finding.check}.detail", finding.detail))
    for key, value in (extra or {}).items():
        items.append((key, value))
    return _write_text(path, "".join(f"{k} = {_fmt(v)}\n" for k, v in items))


def write_stability(table: StabilityTable, path) -> Path:
    lines = [f"# scenario={table.scenario} t_end={table.t_end!r}", "delta,l1_drift,agent_drift,l1_ratio,agent_ratio"]
    for row in table.rows:
        lines.append(",".join(repr(float(v)) for v in (row.delta, row.l1_drift, row.agent_drift, row.l1_ratio, row.agent_ratio)))
    for flag in table.flags:
        lines.append(f"# flag: {flag}")
    return _write_text(path, "\n".join(lines) + "\n")


def write_route(route: RouteParam, path) -> Path:
    """CSV ``t,psi_x,psi_y`` of heading nodes under a ``# start=x,y spacing=s`` header."""
    lines = [
        f"# start={route.start[0]!r},{route.start[1]!r} spacing={route.spacing!r}",
        "t,psi_x,psi_y",
    ]
    for t, (px, py) in zip(route.node_times, route.nodes):
        lines.append(f"{float(t)!r},{float(px)!r},{float(py)!r}")
    return _write_text(path, "\n".join(lines) + "\n")


def read_route(path) -> RouteParam:
    lines = [line for line in _read_lines(path) if line.strip()]
    if not lines:
        raise OutputError(path, "empty route file")
    fields = _header_fields(lines[0], path)
    try:
        start = tuple(float(v) for v in fields["start"].split(","))
        rows = [[float(v) for v in line.split(",")] for line in lines[1:] if not line.startswith("t,")]
        times = [r[0] for r in rows]
        spacing = float(fields["spacing"]) if "spacing" in fields else times[1] - times[0]
        return RouteParam(start=start, nodes=tuple((r[1], r[2]) for r in rows), spacing=spacing)
    except (KeyError, ValueError, IndexError) as e:
        raise OutputError(path, f"malformed route: {e}")


def write_history(result: OptimizationResult, path) -> Path:
    """Best objective value after each evaluation."""
    lines = ["evaluation,best_value"]
    lines += [f"{i + 1},{float(v)!r}" for i, v in enumerate(result.history)]
    return _write_text(path, "\n".join(lines) + "\n")
