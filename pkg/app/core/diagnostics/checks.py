"""Run-level verification of the maximum principle, conservation, BV and speed bounds."""
from __future__ import annotations

import logging
import math
from typing import Iterable, List, Sequence, Tuple

from core.diagnostics.models import Finding, StabilityRow, StabilityTable
from core.engine.models import Trajectory
from core.engine.runner import run, run_pair_perturbed
from core.grid import operations as ops
from core.grid.models import GridSpec
from core.models.base import ScenarioModel
from core.solver.pde import SolverConfig

logger = logging.getLogger(__name__)

RANGE_TOLERANCE = 1e-6
MASS_TOLERANCE = 1e-10
CLIP_TOLERANCE = 1e-8
TV_SLACK = 1e-6
AGENT_SLACK = 0.05
MAX_DELTA = 0.1
RATIO_SPREAD = 2.0


def check_run(trajectory: Trajectory, model: ScenarioModel, mass_tolerance: float = MASS_TOLERANCE) -> List[Finding]:
    """Evaluate every invariant on a finished run; never raises on a failed check."""
    report = trajectory.diagnostics
    R = report.rho_max
    findings: List[Finding] = []

    numbers = [report.initial_mass, report.initial_tv, report.initial_support_radius]
    for s in report.steps:
        numbers += [s.min, s.max, s.mass, s.clipped_mass]
    for snap in report.snapshots:
        numbers += [snap.mass, snap.total_variation, snap.support_radius, snap.support_bound,
                    snap.agent_norm, snap.agent_bound]
        if snap.tv_bound is not None:
            numbers.append(snap.tv_bound)
    findings.append(Finding(check="finite", passed=all(math.isfinite(v) for v in numbers)))

    lo, hi = report.min_density, report.max_density
    findings.append(Finding(
        check="range",
        passed=lo >= -RANGE_TOLERANCE * R and hi <= R * (1 + RANGE_TOLERANCE),
        detail=f"min={lo:.6g} max={hi:.6g}",
    ))

    drift = report.mass_drift
    findings.append(Finding(check="mass", passed=drift <= mass_tolerance, detail=f"relative drift={drift:.3e}"))

    if report.clipped_mass > 0:
        limit = CLIP_TOLERANCE * max(report.initial_mass, 1e-300)
        findings.append(Finding(
            check="clipping",
            passed=report.clipped_mass < limit,
            detail=f"clipped mass={report.clipped_mass:.3e}",
        ))

    tv_failures, tv_checked = [], 0
    for snap in report.snapshots:
        if snap.tv_bound is None:
            continue
        tv_checked += 1
        if snap.total_variation > snap.tv_bound * (1 + TV_SLACK) + 1e-12:
            tv_failures.append(f"t={snap.time:.4g}: TV={snap.total_variation:.6g} > {snap.tv_bound:.6g}")
    findings.append(Finding(
        check="tv_bound",
        passed=not tv_failures,
        detail="; ".join(tv_failures) if tv_failures else (
            f"{tv_checked} snapshot(s) within bound" if tv_checked else "bound unavailable, skipped"
        ),
    ))

    support_failures = [
        f"t={s.time:.4g}: radius={s.support_radius:.4g} > {s.support_bound:.4g}"
        for s in report.snapshots if s.support_radius > s.support_bound
    ]
    findings.append(Finding(check="support", passed=not support_failures, detail="; ".join(support_failures)))

    agent_failures = [
        f"t={s.time:.4g}: |p|={s.agent_norm:.4g} > {s.agent_bound:.4g}"
        for s in report.snapshots if s.agent_norm > s.agent_bound * (1 + AGENT_SLACK)
    ]
    findings.append(Finding(check="agent_bound", passed=not agent_failures, detail="; ".join(agent_failures)))

    for finding in findings:
        if not finding.passed:
            logger.warning(f"[{model.name}] check '{finding.check}' failed: {finding.detail}")
    return findings


def stability_report(
    model: ScenarioModel,
    grid: GridSpec,
    config: SolverConfig,
    t_end: float,
    deltas: Sequence[float],
) -> StabilityTable:
    """Final L1 and agent drifts of perturbed pairs and their growth relative to delta."""
    for delta in deltas:
        if not 0 <= delta <= MAX_DELTA:
            raise ValueError(f"deltas must lie in [0, {MAX_DELTA}], got {delta}")
    table = StabilityTable(scenario=model.name, t_end=t_end)
    for delta in deltas:
        if delta == 0:
            table.rows.append(StabilityRow(delta=0.0, l1_drift=0.0, agent_drift=0.0, l1_ratio=0.0, agent_ratio=0.0))
            continue
        pair = run_pair_perturbed(model, grid, config, t_end, delta)
        l1, agent = pair.l1_drift[-1], pair.agent_drift[-1]
        table.rows.append(StabilityRow(
            delta=delta, l1_drift=l1, agent_drift=agent, l1_ratio=l1 / delta, agent_ratio=agent / delta,
        ))
        logger.info(f"[{model.name}] delta={delta}: L1 drift={l1:.4g}, agent drift={agent:.4g}")

    positive = sorted((r for r in table.rows if r.delta > 0), key=lambda r: r.delta)
    for small, large in zip(positive, positive[1:]):
        for name in ("l1", "agent"):
            d_small, d_large = getattr(small, f"{name}_drift"), getattr(large, f"{name}_drift")
            r_small, r_large = getattr(small, f"{name}_ratio"), getattr(large, f"{name}_ratio")
            if d_small > d_large:
                table.flags.append(f"{name} drift not monotone between delta={small.delta} and delta={large.delta}")
            lo, hi = min(r_small, r_large), max(r_small, r_large)
            if hi > 0 and (lo == 0 or hi / lo > RATIO_SPREAD):
                table.flags.append(
                    f"{name} drift/delta varies by more than {RATIO_SPREAD}x between "
                    f"delta={small.delta} ({r_small:.4g}) and delta={large.delta} ({r_large:.4g})"
                )
    return table


def support_overshoot(trajectory: Trajectory, model: ScenarioModel) -> List[Tuple[float, float]]:
    """Per snapshot, cells by which the support exceeds the analytic radius r0 + V_cfl t."""
    report = trajectory.diagnostics
    result = []
    for snap in trajectory.snapshots:
        grid = snap.field.grid
        radius = ops.support_radius(snap.field, report.support_threshold)
        allowed = report.initial_support_radius + model.v_cfl * snap.time
        result.append((snap.time, max(0.0, radius - allowed) / grid.h))
    return result


def refinement_study(
    model: ScenarioModel,
    extent: Tuple[float, float, float, float],
    resolutions: Iterable[int],
    t_end: float,
    config: SolverConfig,
) -> List[Tuple[int, float]]:
    """Support overshoot at t_end, in cells, for each grid resolution."""
    rows = []
    for cells in resolutions:
        grid = GridSpec.from_extent(*extent, nx=cells, ny=cells)
        trajectory = run(model, grid, config, t_end, [t_end])
        overshoot = support_overshoot(trajectory, model)[-1][1]
        logger.info(f"[{model.name}] {cells}x{cells}: support overshoot {overshoot:.3g} cells")
        rows.append((cells, overshoot))
    return rows
