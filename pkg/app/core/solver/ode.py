"""Euler polygonals for the agent ODE p' = phi(t, p, (A rho)(p))."""
from __future__ import annotations

import logging

import numpy as np

from core.averaging.kernel import MollifierKernel, stack_at
from core.errors import SimulationAbort
from core.grid.models import DensityField
from core.models.base import ScenarioModel

logger = logging.getLogger(__name__)


def agent_positions(p: np.ndarray, model: ScenarioModel) -> np.ndarray:
    """Points where the averaging operator is sampled, shape (n, 2)."""
    return model.agent_positions(p)


def ode_step(
    p: np.ndarray,
    model: ScenarioModel,
    field: DensityField,
    kernel: MollifierKernel,
    t: float,
    dt: float,
) -> np.ndarray:
    """p + dt * phi(t, p, r) with r the stacked averages of `field` at the agents."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    p = model.check_state(p)
    r = stack_at(field, kernel, agent_positions(p, model), model.mode)
    phi = np.asarray(model.speed(t, p, r), dtype=float)
    if not np.all(np.isfinite(phi)):
        state = {"t": t, "p": p.tolist(), "r": r.tolist(), "phi": phi.tolist()}
        logger.error(f"Nonfinite agent speed: {state}")
        raise SimulationAbort("nonfinite agent speed", time=t, state=state)
    return p + dt * phi
