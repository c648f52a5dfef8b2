"""Closed-form bounds checked against simulated runs."""
from __future__ import annotations

import math
from typing import Optional

from core.grid.models import GridSpec
from core.models.base import ScenarioModel

SPACE_DIM = 2


def sphere_weight(n: int) -> float:
    """W_n = integral of cos(theta)^n over [0, pi/2]; W_2 = pi/4."""
    return math.sqrt(math.pi) * math.gamma((n + 1) / 2) / (2.0 * math.gamma(n / 2 + 1))


def tv_growth_rate(model: ScenarioModel) -> Optional[float]:
    """kappa = (2 N_x + 1) sup |grad_x d_rho f|."""
    sup = model.grad_drho_flux_sup()
    if sup is None:
        return None
    return (2 * SPACE_DIM + 1) * sup


def tv_bound(model: ScenarioModel, t: float, tv_initial: float, agent_radius: float) -> Optional[float]:
    """(TV(rho_0) + N_x W_{N_x} t int sup |grad_x div_x f| dx) exp(kappa t).

    The sup runs over rho in [0, R] and agent states of norm at most
    agent_radius. Returns None when the scenario has no constants.
    """
    kappa = tv_growth_rate(model)
    integral = model.grad_div_flux_integral(agent_radius)
    if kappa is None or integral is None:
        return None
    source = SPACE_DIM * sphere_weight(SPACE_DIM) * t * integral
    try:
        return (tv_initial + source) * math.exp(kappa * t)
    except OverflowError:
        return math.inf


def agent_norm_bound(initial_norm: float, c_phi: float, t: float) -> float:
    """(|p0| + 1) exp(C_phi t) - 1."""
    try:
        return (initial_norm + 1.0) * math.exp(c_phi * t) - 1.0
    except OverflowError:
        return math.inf


def support_growth_bound(initial_radius: float, steps: int, grid: GridSpec) -> float:
    """Each sweep moves the numerical support by at most one cell along its axis."""
    return initial_radius + steps * math.hypot(grid.dx, grid.dy) + 3.0 * grid.h
