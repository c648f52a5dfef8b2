"""A predator accelerating into a flock of preys to split it (2D run).

f(t, x, rho, p) = rho V_max (1 - rho/R) (V0 + B exp(-C |x - P|) (x - P))
phi(t, (P, V), r) = (V, alpha r)
A rho             = rho * grad eta  sampled at the predator position P
"""
from __future__ import annotations

from functools import cached_property

import numpy as np
from pydantic import Field, model_validator

from core.averaging.kernel import AveragingMode
from core.models.base import ScenarioModel, ScenarioParams, Vector, logistic_speed
from core.models.profiles import ExponentialProfile
from core.models.shapes import InitialShape


class PreyParams(ScenarioParams):
    v_max: float = Field(default=2.0, gt=0)
    rho_max: float = Field(default=1.0, gt=0)
    c: float = Field(default=5.25, gt=0)
    b: float = Field(default=40.0, gt=0)
    v0: Vector = (0.0, -0.5)
    alpha: float = Field(default=400.0, gt=0)
    r_p: float = Field(default=0.5, gt=0)
    initial: InitialShape = InitialShape(kind="rectangle", numbers=(-0.2, 0.2, -0.2, -0.1))
    position0: Vector = (0.0, -0.8)
    velocity0: Vector = (0.0, 1.0)

    @model_validator(mode="after")
    def _check(self):
        for name in ("v0", "position0", "velocity0"):
            if len(getattr(self, name)) != 2:
                raise ValueError(f"{name} must have 2 components")
        return self


def flux_prey(t: float, x: np.ndarray, rho: np.ndarray, p: np.ndarray, params: PreyParams) -> np.ndarray:
    predator = np.asarray(p, dtype=float)[:2]
    escape = ExponentialProfile(params.b, params.c).field(x - predator)
    w = np.asarray(params.v0) + escape
    return logistic_speed(rho, params.v_max, params.rho_max)[..., None] * w


def speed_prey(t: float, p: np.ndarray, r: np.ndarray, params: PreyParams) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    return np.concatenate([p[2:4], params.alpha * np.asarray(r, dtype=float)])


class PreyModel(ScenarioModel):
    name = "prey"
    mode = AveragingMode.gradient

    def __init__(self, params: PreyParams = PreyParams()):
        super().__init__(params)
        self.escape = ExponentialProfile(params.b, params.c)

    @property
    def initial_state(self) -> np.ndarray:
        return np.array(self.params.position0 + self.params.velocity0, dtype=float)

    def flux(self, t, x, rho, p):
        return flux_prey(t, x, rho, p, self.params)

    def speed(self, t, p, r):
        return speed_prey(t, p, r, self.params)

    def agent_positions(self, p):
        return self.check_state(p)[:2].reshape(1, 2)

    @cached_property
    def v_cfl(self) -> float:
        drift = float(np.hypot(*self.params.v0))
        return self.params.v_max * (drift + self.escape.sup_magnitude())

    def c_phi(self, mass: float) -> float:
        return max(1.0, self.params.alpha * self.kernel.max_grad_norm * mass)

    def grad_drho_flux_sup(self) -> float:
        return self.params.v_max * self.escape.sup_jacobian()

    def grad_div_flux_integral(self, agent_radius: float) -> float:
        peak = self.params.v_max * self.params.rho_max / 4.0
        return peak * self.escape.swept_grad_div_integral(agent_radius)
