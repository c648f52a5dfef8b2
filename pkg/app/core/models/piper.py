"""The pied piper: rats attracted by a musician who speeds up in dense crowds.

f(t, x, rho, p) = rho V_max (1 - rho/R) (p - x) exp(-|p - x|^2)
phi(t, p, r)    = (v_p + (V_p - v_p) r / R) psi(t),  psi(t) = (cos wt, -sin wt)
A rho           = rho * eta  (value mode, one sample point at p)
"""
from __future__ import annotations

from functools import cached_property
import math
from typing import Callable, Optional

import numpy as np
from pydantic import Field, model_validator

from core.averaging.kernel import AveragingMode
from core.models.base import ScenarioModel, ScenarioParams, Vector, logistic_speed
from core.models.profiles import GaussianProfile
from core.models.shapes import InitialShape

Heading = Callable[[float], np.ndarray]


class PiperParams(ScenarioParams):
    v_max: float = Field(default=9.0, gt=0)
    rho_max: float = Field(default=1.0, gt=0)
    speed_max: float = Field(default=7.0, gt=0)   # V_p
    speed_min: float = Field(default=1.0, ge=0)   # v_p
    omega: float = 1.0
    r_p: float = Field(default=0.15, gt=0)
    initial: InitialShape = InitialShape(kind="rectangle", numbers=(-0.5, 0.0, 0.35, 0.85))
    p0: Vector = (-1.0, 0.5)

    @model_validator(mode="after")
    def _check(self):
        if self.speed_min > self.speed_max:
            raise ValueError(f"speed_min {self.speed_min} exceeds speed_max {self.speed_max}")
        if len(self.p0) != 2:
            raise ValueError(f"p0 must have 2 components, got {len(self.p0)}")
        return self


ATTRACTION = GaussianProfile(amplitude=1.0, length=1.0)


def circular_heading(omega: float) -> Heading:
    def psi(t: float) -> np.ndarray:
        return np.array([math.cos(omega * t), -math.sin(omega * t)])
    return psi


def flux_piper(t: float, x: np.ndarray, rho: np.ndarray, p: np.ndarray, params: PiperParams) -> np.ndarray:
    d = np.asarray(p, dtype=float)[:2] - x
    w = ATTRACTION.field(d)
    return logistic_speed(rho, params.v_max, params.rho_max)[..., None] * w


def speed_piper(
    t: float,
    p: np.ndarray,
    r: float,
    params: PiperParams,
    heading: Optional[Heading] = None,
) -> np.ndarray:
    psi = (heading or circular_heading(params.omega))(t)
    q = params.speed_min + (params.speed_max - params.speed_min) * float(r) / params.rho_max
    return q * np.asarray(psi, dtype=float)


class PiperModel(ScenarioModel):
    name = "piper"
    mode = AveragingMode.value

    def __init__(self, params: PiperParams = PiperParams(), heading: Optional[Heading] = None):
        super().__init__(params)
        self.heading = heading or circular_heading(params.omega)

    def with_heading(self, heading: Heading) -> "PiperModel":
        return PiperModel(self.params, heading=heading)

    def with_start(self, p0) -> "PiperModel":
        return PiperModel(self.params.model_copy(update={"p0": tuple(float(v) for v in p0)}), heading=self.heading)

    @property
    def initial_state(self) -> np.ndarray:
        return np.array(self.params.p0, dtype=float)

    def flux(self, t, x, rho, p):
        return flux_piper(t, x, rho, p, self.params)

    def speed(self, t, p, r):
        return speed_piper(t, p, float(np.asarray(r).ravel()[0]), self.params, self.heading)

    def agent_positions(self, p):
        return self.check_state(p).reshape(1, 2)

    @cached_property
    def v_cfl(self) -> float:
        # sup |d_rho (rho v(rho))| = V_max, attained at rho = 0 and rho = R
        return self.params.v_max * ATTRACTION.sup_magnitude()

    def c_phi(self, mass: float) -> float:
        # r <= R because rho <= R and eta has unit mass; headings satisfy |psi| <= 1
        return self.params.speed_max

    def grad_drho_flux_sup(self) -> float:
        return self.params.v_max * ATTRACTION.sup_jacobian()

    def grad_div_flux_integral(self, agent_radius: float) -> float:
        peak = self.params.v_max * self.params.rho_max / 4.0
        return peak * ATTRACTION.swept_grad_div_integral(agent_radius)
