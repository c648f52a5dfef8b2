"""Common scenario interface.

A scenario bundles the flux f(t, x, rho, p), the agent speed law
phi(t, p, r), the averaging operator (kernel and mode) and the initial data.
Fluxes have the form f = rho * V_max (1 - rho/R) * W(t, x, p), so they vanish
at vacuum and at congestion, |d f / d rho| <= V_max |W| and
|rho V_max (1 - rho/R)| <= V_max R / 4.
"""
from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from typing import Annotated, Optional, Tuple

import numpy as np
from pydantic import BaseModel, BeforeValidator

from core.averaging.kernel import AveragingMode, MollifierKernel
from core.errors import CflViolationError
from core.grid.models import DensityField, GridSpec
from core.models.shapes import InitialShape, rasterize

logger = logging.getLogger(__name__)

# random (cell, density) pairs sampled by check_speed_bound
SPEED_SAMPLES = 256


def _parse_vector(value):
    if isinstance(value, str):
        value = [v for v in value.replace(",", " ").split()]
    return tuple(float(v) for v in value)


Vector = Annotated[Tuple[float, ...], BeforeValidator(_parse_vector)]


def logistic_speed(rho: np.ndarray, v_max: float, rho_max: float) -> np.ndarray:
    """rho * v(rho) with v(rho) = V_max (1 - rho/R)."""
    return rho * v_max * (1.0 - rho / rho_max)


class ScenarioParams(BaseModel):
    """Parameters shared by every scenario."""

    model_config = {"frozen": True}

    rho_max: float
    v_max: float
    r_p: float
    initial: InitialShape


class ScenarioModel(ABC):
    """One built-in scenario; instances are immutable after construction."""

    name: str = ""
    mode: AveragingMode = AveragingMode.value
    params: ScenarioParams

    def __init__(self, params: ScenarioParams):
        self.params = params
        self.kernel = MollifierKernel(radius=params.r_p)

    @property
    def rho_max(self) -> float:
        return self.params.rho_max

    @property
    def initial_shape(self) -> InitialShape:
        return self.params.initial

    @property
    @abstractmethod
    def initial_state(self) -> np.ndarray:
        """Agent state p-bar."""

    @property
    def state_size(self) -> int:
        return int(self.initial_state.size)

    @abstractmethod
    def flux(self, t: float, x: np.ndarray, rho: np.ndarray, p: np.ndarray) -> np.ndarray:
        """f at positions x of shape (..., 2) with densities rho of shape (...)."""

    def flux_component(self, t: float, x: np.ndarray, rho: np.ndarray, p: np.ndarray, axis: int) -> np.ndarray:
        return self.flux(t, x, rho, p)[..., axis]

    @abstractmethod
    def speed(self, t: float, p: np.ndarray, r: np.ndarray) -> np.ndarray:
        """phi(t, p, r); r is the stacked averaging output."""

    @abstractmethod
    def agent_positions(self, p: np.ndarray) -> np.ndarray:
        """Convolution sample points, shape (n, 2)."""

    @property
    @abstractmethod
    def v_cfl(self) -> float:
        """Upper bound of |d f / d rho . e| for every axis direction e."""

    @abstractmethod
    def c_phi(self, mass: float) -> float:
        """Constant with |phi(t, p, r)| <= C_phi (1 + |p|) for densities of the given mass."""

    def grad_drho_flux_sup(self) -> Optional[float]:
        """sup |grad_x d_rho f|, or None when not available."""
        return None

    def grad_div_flux_integral(self, agent_radius: float) -> Optional[float]:
        """Integral over x of sup |grad_x div_x f| over rho in [0, R] and |p| <= agent_radius."""
        return None

    def check_state(self, p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if p.shape != (self.state_size,):
            raise ValueError(f"{self.name} agent state must have {self.state_size} components, got shape {p.shape}")
        return p

    def initial_density(self, grid: GridSpec, t_end: float = 0.0, strict: bool = False) -> DensityField:
        return rasterize(
            self.initial_shape,
            grid,
            self.rho_max,
            transport_margin=self.params.r_p + self.v_cfl * t_end,
            strict=strict,
        )

    def check_speed_bound(self, grid: GridSpec, p: np.ndarray, t: float = 0.0, seed: int = 0) -> float:
        """Largest sampled |d f / d rho| on the grid; raises when it exceeds v_cfl.

        Centred differences in rho at random cell centres and densities in
        (0, R). The fluxes are quadratic in rho, so the differences are exact
        up to round-off.
        """
        rng = np.random.default_rng(seed)
        centers = grid.cell_centers().reshape(-1, 2)
        x = centers[rng.integers(len(centers), size=SPEED_SAMPLES)]
        step = 1e-6 * self.rho_max
        rho = rng.uniform(step, self.rho_max - step, size=SPEED_SAMPLES)
        p = self.check_state(p)
        slope = np.linalg.norm(self.flux(t, x, rho + step, p) - self.flux(t, x, rho - step, p), axis=-1) / (2 * step)
        worst = float(slope.max())
        if worst > self.v_cfl * (1.0 + 1e-6):
            raise CflViolationError(
                f"Scenario '{self.name}': sampled |df/drho| = {worst:.6g} exceeds V_cfl = {self.v_cfl:.6g}"
            )
        logger.debug(f"[{self.name}] sampled |df/drho| <= {worst:.4g} (V_cfl={self.v_cfl:.4g})")
        return worst
