"""Coupled time loop: conservation-law step and agent ODE step from the same state.

Both substeps of step n read (rho^n, p^n); dt is the CFL step truncated so
that every requested snapshot time and t_end are hit exactly.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, Optional, Tuple

import numpy as np

from core.config.settings import get_settings
from core.diagnostics.recorder import DiagnosticsRecorder
from core.engine.models import PerturbationResult, Snapshot, Trajectory
from core.errors import SimulationAbort
from core.grid import operations as ops
from core.grid.models import DensityField, GridSpec
from core.models.base import ScenarioModel
from core.solver.ode import ode_step
from core.solver.pde import SolverConfig, cfl_dt, pde_step

logger = logging.getLogger(__name__)


def _schedule(t_end: float, snapshot_times: Iterable[float]) -> Tuple[list[float], set[float]]:
    requested = sorted({float(t) for t in snapshot_times})
    skipped = [t for t in requested if t < 0 or t > t_end]
    if skipped:
        logger.warning(f"Ignoring snapshot times outside [0, {t_end}]: {skipped}")
    wanted = {t for t in requested if 0 <= t <= t_end}
    targets = sorted({t for t in wanted if t > 0} | ({t_end} if t_end > 0 else set()))
    return targets, wanted


def run(
    model: ScenarioModel,
    grid: GridSpec,
    solver_config: SolverConfig,
    t_end: float,
    snapshot_times: Iterable[float] = (),
    initial_field: Optional[DensityField] = None,
    initial_state: Optional[np.ndarray] = None,
    watch_box: Optional[Tuple[float, float, float, float]] = None,
) -> Trajectory:
    """Integrate the coupled system up to t_end."""
    if t_end < 0:
        raise ValueError(f"t_end must be nonnegative, got {t_end}")
    rho = initial_field if initial_field is not None else model.initial_density(
        grid, t_end=t_end, strict=solver_config.strict_margin
    )
    p = model.check_state(initial_state if initial_state is not None else model.initial_state)
    targets, wanted = _schedule(t_end, snapshot_times)
    dt_cfl = cfl_dt(model, grid, solver_config)
    model.check_speed_bound(grid, p)
    threshold = solver_config.margin_threshold * rho.rho_max
    initial_mass = ops.mass(rho)
    leak_limit = solver_config.mass_tolerance * initial_mass
    clipped_total = 0.0

    recorder = DiagnosticsRecorder(model, rho, p, watch_box=watch_box)
    trajectory = Trajectory(scenario=model.name, state_size=p.size, times=[0.0], agent_states=[p.copy()])
    recorder.record_step(0, 0.0, rho, p)

    def snapshot(step: int, t: float) -> None:
        trajectory.snapshots.append(Snapshot(time=t, step=step, field=rho, agents=p.copy()))
        recorder.record_snapshot(step, t, rho, p)

    if 0.0 in wanted:
        snapshot(0, 0.0)

    logger.info(
        f"Running '{model.name}' to t={t_end} on {grid.nx}x{grid.ny} cells "
        f"(dt_cfl={dt_cfl:.4g}, V_cfl={model.v_cfl:.4g})"
    )
    t, step = 0.0, 0
    for target in targets:
        while t < target:
            remaining = target - t
            landing = remaining <= dt_cfl * (1.0 + 1e-12)
            dt = remaining if landing else dt_cfl
            rho_next, clipped = pde_step(rho, model, t, p, dt, step, solver_config)
            p_next = ode_step(p, model, rho, model.kernel, t, dt)
            t = target if landing else t + dt
            step += 1
            rho, p = rho_next, p_next

            edge = ops.boundary_band_max(rho, solver_config.margin_cells)
            if edge > threshold:
                logger.error(f"[{model.name}] density {edge:.3g} reached the domain margin at t={t:.6g}")
                raise SimulationAbort(
                    f"density {edge:.3g} within {solver_config.margin_cells} cells of the boundary",
                    time=t,
                    state={"step": step, "p": p.tolist()},
                )
            clipped_total += clipped
            mass_now = ops.mass(rho)
            # only the zero ghost cells and clamping change the mass
            leaked = abs(mass_now - initial_mass) - clipped_total
            if initial_mass > 0 and leaked > leak_limit:
                logger.error(
                    f"[{model.name}] mass {leaked:.3g} ({leaked / initial_mass:.3g} relative) "
                    f"left through the boundary by t={t:.6g}"
                )
                raise SimulationAbort(
                    f"mass {leaked:.3g} left the grid through the boundary",
                    time=t,
                    state={"step": step, "p": p.tolist(), "mass": mass_now},
                )
            recorder.record_step(step, t, rho, p, clipped_mass=clipped, boundary_max=edge)
            trajectory.times.append(t)
            trajectory.agent_states.append(p.copy())
            if step % 100 == 0:
                logger.debug(f"[{model.name}] step {step} t={t:.5f} p={np.round(p, 4).tolist()}")
        if target in wanted:
            snapshot(step, t)

    trajectory.diagnostics = recorder.report
    logger.info(f"Finished '{model.name}' after {step} steps, final p={np.round(p, 4).tolist()}")
    return trajectory


def run_pair_perturbed(
    model: ScenarioModel,
    grid: GridSpec,
    config: SolverConfig,
    t_end: float,
    delta: float,
    snapshot_times: Optional[Iterable[float]] = None,
) -> PerturbationResult:
    """Run twice, the second time with the initial density scaled by (1 - delta)."""
    if not 0 <= delta < 1:
        raise ValueError(f"delta must be in [0, 1), got {delta}")
    times = sorted(set(snapshot_times) if snapshot_times is not None else {0.0, t_end})
    base = model.initial_density(grid, t_end=t_end, strict=config.strict_margin)
    perturbed = base.scaled(1.0 - delta)

    with ThreadPoolExecutor(max_workers=max(1, get_settings().workers)) as pool:
        first = pool.submit(run, model, grid, config, t_end, times, base)
        second = pool.submit(run, model, grid, config, t_end, times, perturbed)
        a, b = first.result(), second.result()

    l1, agents = [], []
    for snap_a, snap_b in zip(a.snapshots, b.snapshots):
        l1.append(ops.l1_distance(snap_a.field, snap_b.field))
        agents.append(float(np.linalg.norm(snap_a.agents - snap_b.agents)))
    return PerturbationResult(
        delta=delta,
        times=[s.time for s in a.snapshots],
        l1_drift=l1,
        agent_drift=agents,
        initial_gap=ops.l1_distance(base, perturbed),
    )
