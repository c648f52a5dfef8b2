"""Shepherd dogs circling a dispersing herd.

f(t, x, rho, p) = rho V_max (1 - rho/R) (v_r(x) + sum_i v(x - p_i))
    v(x)   = (alpha / sqrt(l)) exp(-|x|^2 / l) x      (repulsion from each dog)
    v_r(x) = beta x / (1 + |x|^2)                    (spontaneous dispersion)
phi(t, p, r) = V_d r_perp / sqrt(1 + |r|^2),  (a, b)_perp = (b, -a)
A rho        = rho * grad eta  (one gradient per dog)
"""
from __future__ import annotations

from functools import cached_property
import math

import numpy as np
from pydantic import Field, model_validator

from core.averaging.kernel import AveragingMode
from core.models.base import ScenarioModel, ScenarioParams, Vector, logistic_speed
from core.models.profiles import GaussianProfile, LorentzProfile
from core.models.shapes import InitialShape


class DogsParams(ScenarioParams):
    n: int = Field(default=2, ge=1)
    v_max: float = Field(default=1.0, gt=0)
    rho_max: float = Field(default=1.0, gt=0)
    alpha: float = Field(default=20.0, ge=0)  # 0 switches the dogs' repulsion off
    ell: float = Field(default=0.2, gt=0)
    beta: float = Field(default=1.0, gt=0)
    r_p: float = Field(default=1.0, gt=0)
    v_d: float = Field(default=100.0, gt=0)
    initial: InitialShape = InitialShape(kind="disc", numbers=(0.0, 0.0, 0.2))
    p0: Vector = (0.7, 0.0, -0.7, 0.0)

    @model_validator(mode="after")
    def _check(self):
        if len(self.p0) != 2 * self.n:
            raise ValueError(f"p0 must hold 2n = {2 * self.n} coordinates, got {len(self.p0)}")
        return self


def _profiles(params: DogsParams):
    repulsion = GaussianProfile(amplitude=params.alpha / math.sqrt(params.ell), length=params.ell)
    dispersion = LorentzProfile(amplitude=params.beta)
    return repulsion, dispersion


def flux_dogs(t: float, x: np.ndarray, rho: np.ndarray, p: np.ndarray, params: DogsParams) -> np.ndarray:
    repulsion, dispersion = _profiles(params)
    w = dispersion.field(x)
    for dog in np.asarray(p, dtype=float).reshape(-1, 2):
        w = w + repulsion.field(x - dog)
    return logistic_speed(rho, params.v_max, params.rho_max)[..., None] * w


def speed_dogs(t: float, p: np.ndarray, r: np.ndarray, params: DogsParams) -> np.ndarray:
    r = np.asarray(r, dtype=float).reshape(-1, 2)
    perp = np.stack([r[:, 1], -r[:, 0]], axis=1)
    return params.v_d * perp.ravel() / math.sqrt(1.0 + float((r ** 2).sum()))


class DogsModel(ScenarioModel):
    name = "dogs"
    mode = AveragingMode.gradient

    def __init__(self, params: DogsParams = DogsParams()):
        super().__init__(params)
        self.repulsion, self.dispersion = _profiles(params)

    @property
    def initial_state(self) -> np.ndarray:
        return np.array(self.params.p0, dtype=float)

    def flux(self, t, x, rho, p):
        return flux_dogs(t, x, rho, p, self.params)

    def speed(self, t, p, r):
        return speed_dogs(t, p, r, self.params)

    def agent_positions(self, p):
        return self.check_state(p).reshape(-1, 2)

    @cached_property
    def v_cfl(self) -> float:
        field_sup = self.dispersion.sup_magnitude() + self.params.n * self.repulsion.sup_magnitude()
        return self.params.v_max * field_sup

    def c_phi(self, mass: float) -> float:
        return self.params.v_d

    def grad_drho_flux_sup(self) -> float:
        jac = self.dispersion.sup_jacobian() + self.params.n * self.repulsion.sup_jacobian()
        return self.params.v_max * jac

    def grad_div_flux_integral(self, agent_radius: float) -> float:
        # each dog lies in the ball of radius |p|; bound the sum term by term
        peak = self.params.v_max * self.params.rho_max / 4.0
        fixed = self.dispersion.swept_grad_div_integral(0.0)
        swept = self.repulsion.swept_grad_div_integral(agent_radius) if self.params.alpha > 0 else 0.0
        return peak * (fixed + self.params.n * swept)
