"""Collects per-step and per-snapshot diagnostics while the engine runs."""
from __future__ import annotations

import logging
from typing import Optional, Tuple

import numpy as np

from core.averaging.kernel import kernel_leaves_grid
from core.diagnostics.bounds import agent_norm_bound, support_growth_bound, tv_bound
from core.diagnostics.models import DiagnosticsReport, SnapshotRecord, StepRecord
from core.grid import operations as ops
from core.grid.models import DensityField
from core.models.base import ScenarioModel

logger = logging.getLogger(__name__)

COMPONENT_THRESHOLD = 0.01  # relative to rho_max


class DiagnosticsRecorder:
    def __init__(
        self,
        model: ScenarioModel,
        initial: DensityField,
        initial_state: np.ndarray,
        watch_box: Optional[Tuple[float, float, float, float]] = None,
    ):
        self.model = model
        self.grid = initial.grid
        self.initial_norm = float(np.linalg.norm(initial_state))
        self.agent_radius = self.initial_norm
        rho_max = initial.rho_max
        self.support_threshold = ops.DEFAULT_SUPPORT_THRESHOLD * rho_max
        self.c_phi = model.c_phi(ops.mass(initial))
        self.report = DiagnosticsReport(
            scenario=model.name,
            rho_max=rho_max,
            initial_mass=ops.mass(initial),
            initial_tv=ops.total_variation(initial),
            initial_support_radius=ops.support_radius(initial, self.support_threshold),
            support_threshold=self.support_threshold,
            component_threshold=COMPONENT_THRESHOLD * rho_max,
            watch_box=watch_box if watch_box is not None else model.initial_shape.bounding_box(),
        )

    def record_step(self, step: int, t: float, field: DensityField, p: np.ndarray,
                    clipped_mass: float = 0.0, boundary_max: float = 0.0) -> None:
        self.agent_radius = max(self.agent_radius, float(np.linalg.norm(p)))
        self.report.steps.append(StepRecord(
            step=step, time=t, min=field.min, max=field.max,
            mass=ops.mass(field), clipped_mass=clipped_mass,
        ))
        if boundary_max > self.support_threshold and any(
            kernel_leaves_grid(self.grid, self.model.kernel, point)
            for point in self.model.agent_positions(p)
        ):
            self.report.kernel_clip_events += 1

    def record_snapshot(self, step: int, t: float, field: DensityField, p: np.ndarray) -> SnapshotRecord:
        self.agent_radius = max(self.agent_radius, float(np.linalg.norm(p)))
        box = self.report.watch_box
        record = SnapshotRecord(
            time=t,
            step=step,
            mass=ops.mass(field),
            total_variation=ops.total_variation(field),
            tv_bound=tv_bound(self.model, t, self.report.initial_tv, self.agent_radius),
            support_radius=ops.support_radius(field, self.support_threshold),
            support_bound=support_growth_bound(self.report.initial_support_radius, step, self.grid),
            agent_norm=float(np.linalg.norm(p)),
            agent_bound=agent_norm_bound(self.initial_norm, self.c_phi, t),
            components=ops.connected_components(field, self.report.component_threshold),
            watched_mass=ops.mass_in_box(field, *box) if box is not None else 0.0,
        )
        self.report.snapshots.append(record)
        logger.info(
            f"[{self.model.name}] t={t:.4f} step={step} mass={record.mass:.6g} "
            f"TV={record.total_variation:.4g} components={record.components} |p|={record.agent_norm:.4g}"
        )
        return record
