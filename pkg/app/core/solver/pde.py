"""Lax-Friedrichs finite volumes with dimensional splitting.

Each sweep advances one axis with the agent state frozen:

    rho_i' = (rho_{i-1} + rho_{i+1}) / 2 - dt / (2h) (F_{i+1} - F_{i-1})

where F_j is the axis component of f(t, x_j, rho_j, p) at the cell center.
Ghost cells outside the grid hold rho = 0, hence F = 0.
"""
from __future__ import annotations

import logging
import math
from enum import Enum
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from core.errors import CflViolationError, SimulationAbort
from core.grid.models import DensityField, GridSpec
from core.models.base import ScenarioModel

logger = logging.getLogger(__name__)


class Axis(str, Enum):
    x = "x"
    y = "y"


class SolverConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    cfl_factor: float = Field(default=0.9, gt=0)
    clamp_to_range: bool = False
    # False only for instability probes: allows cfl_factor > 1
    enforce_cfl: bool = True
    # In-run margin guard: abort when density above margin_threshold * R
    # reaches the outer margin_cells cells of the grid
    margin_cells: int = Field(default=2, ge=1)
    margin_threshold: float = Field(default=1e-4, ge=0)
    # Abort once the mass lost through the zero ghost cells exceeds this
    # fraction of the initial mass
    mass_tolerance: float = Field(default=1e-10, ge=0)
    # Upper bound on the CFL step; None keeps the CFL step
    max_dt: Optional[float] = Field(default=None, gt=0)
    # Turn the speed-bound domain check at start-up into an error
    strict_margin: bool = False

    @model_validator(mode="after")
    def _check_cfl(self):
        if self.enforce_cfl and self.cfl_factor > 1:
            raise ValueError(f"cfl_factor {self.cfl_factor} > 1 requires enforce_cfl = false")
        return self


@lru_cache(maxsize=16)
def _centers(grid: GridSpec) -> np.ndarray:
    centers = grid.cell_centers()
    centers.setflags(write=False)
    return centers


def cfl_dt(model: ScenarioModel, grid: GridSpec, config: SolverConfig) -> float:
    """dt = cfl_factor * min(dx, dy) / V_cfl, capped by max_dt when set."""
    speed = model.v_cfl
    if not math.isfinite(speed) or speed <= 0:
        raise CflViolationError(f"Scenario '{model.name}' has invalid V_cfl={speed}")
    dt = config.cfl_factor * min(grid.dx, grid.dy) / speed
    return dt if config.max_dt is None else min(dt, config.max_dt)


def _sweep_values(
    values: np.ndarray,
    model: ScenarioModel,
    t: float,
    p: np.ndarray,
    dt: float,
    axis: Axis,
    grid: GridSpec,
) -> np.ndarray:
    component, array_axis, h = (0, 1, grid.dx) if axis is Axis.x else (1, 0, grid.dy)
    flux = model.flux_component(t, _centers(grid), values, p, component)
    pad = [(0, 0), (0, 0)]
    pad[array_axis] = (1, 1)
    rho_p = np.moveaxis(np.pad(values, pad), array_axis, 0)
    flux_p = np.moveaxis(np.pad(flux, pad), array_axis, 0)
    updated = 0.5 * (rho_p[2:] + rho_p[:-2]) - dt / (2.0 * h) * (flux_p[2:] - flux_p[:-2])
    return np.moveaxis(updated, 0, array_axis)


def lxf_sweep(
    field: DensityField,
    model: ScenarioModel,
    t: float,
    p: np.ndarray,
    dt: float,
    axis: Axis,
    enforce_cfl: bool = True,
) -> DensityField:
    """One Lax-Friedrichs sweep along `axis`."""
    axis = Axis(axis)
    grid = field.grid
    h = grid.dx if axis is Axis.x else grid.dy
    if enforce_cfl and dt * model.v_cfl > h * (1.0 + 1e-12):
        raise CflViolationError(
            f"dt={dt:.6g} exceeds the CFL limit {h / model.v_cfl:.6g} along {axis.value}"
        )
    values = _sweep_values(field.values, model, t, p, dt, axis, grid)
    if not np.all(np.isfinite(values)):
        raise SimulationAbort(f"nonfinite density after {axis.value}-sweep", time=t)
    return field.with_values(values)


def pde_step(
    field: DensityField,
    model: ScenarioModel,
    t: float,
    p: np.ndarray,
    dt: float,
    step_index: int,
    config: SolverConfig = SolverConfig(),
) -> Tuple[DensityField, float]:
    """Two full-dt sweeps, X then Y on even steps and Y then X on odd steps.

    Returns the new field and the mass removed by clamping to [0, R]
    (always 0 when clamping is off).
    """
    order = (Axis.x, Axis.y) if step_index % 2 == 0 else (Axis.y, Axis.x)
    for axis in order:
        field = lxf_sweep(field, model, t, p, dt, axis, enforce_cfl=config.enforce_cfl)
    clipped_mass = 0.0
    if config.clamp_to_range:
        clipped = np.clip(field.values, 0.0, field.rho_max)
        clipped_mass = float(np.abs(field.values - clipped).sum() * field.grid.cell_area)
        if clipped_mass > 0:
            logger.debug(f"Step {step_index}: clamped mass {clipped_mass:.3e}")
        field = field.with_values(clipped)
    return field, clipped_mass
