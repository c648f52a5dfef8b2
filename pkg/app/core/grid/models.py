"""Grid and density field value types."""
from __future__ import annotations

from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class GridSpec(BaseModel):
    """Uniform rectangular grid; cell (i, j) has center (x0+(i+1/2)dx, y0+(j+1/2)dy)."""

    model_config = ConfigDict(frozen=True)

    x0: float
    y0: float
    nx: int = Field(ge=3)
    ny: int = Field(ge=3)
    dx: float = Field(gt=0)
    dy: float = Field(gt=0)

    @classmethod
    def from_extent(cls, xmin: float, xmax: float, ymin: float, ymax: float, nx: int, ny: int) -> "GridSpec":
        if xmax <= xmin or ymax <= ymin:
            raise ValueError(f"Empty extent [{xmin}, {xmax}] x [{ymin}, {ymax}]")
        return cls(x0=xmin, y0=ymin, nx=nx, ny=ny, dx=(xmax - xmin) / nx, dy=(ymax - ymin) / ny)

    @property
    def x1(self) -> float:
        return self.x0 + self.nx * self.dx

    @property
    def y1(self) -> float:
        return self.y0 + self.ny * self.dy

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    @property
    def h(self) -> float:
        """Largest cell width."""
        return max(self.dx, self.dy)

    @property
    def shape(self) -> Tuple[int, int]:
        """Array shape of field values: rows are y (low to high), columns are x."""
        return (self.ny, self.nx)

    def x_centers(self) -> np.ndarray:
        return self.x0 + (np.arange(self.nx) + 0.5) * self.dx

    def y_centers(self) -> np.ndarray:
        return self.y0 + (np.arange(self.ny) + 0.5) * self.dy

    def cell_centers(self) -> np.ndarray:
        """Cell centers as an array of shape (ny, nx, 2)."""
        xx, yy = np.meshgrid(self.x_centers(), self.y_centers())
        return np.stack([xx, yy], axis=-1)

    def refine(self, factor: int) -> "GridSpec":
        return GridSpec(
            x0=self.x0, y0=self.y0,
            nx=self.nx * factor, ny=self.ny * factor,
            dx=self.dx / factor, dy=self.dy / factor,
        )

    def contains_box(self, xmin: float, xmax: float, ymin: float, ymax: float, margin: float = 0.0) -> bool:
        return (
            xmin - margin >= self.x0 and xmax + margin <= self.x1
            and ymin - margin >= self.y0 and ymax + margin <= self.y1
        )


class DensityField(BaseModel):
    """Cell averages of the density on a grid; immutable once constructed."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: GridSpec
    values: np.ndarray
    rho_max: float = Field(default=1.0, gt=0)

    @field_validator("values", mode="before")
    @classmethod
    def _as_float_array(cls, v):
        arr = np.array(v, dtype=float)
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def _check_values(self):
        if self.values.shape != self.grid.shape:
            raise ValueError(f"values shape {self.values.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("density values must be finite")
        return self

    @classmethod
    def zeros(cls, grid: GridSpec, rho_max: float = 1.0) -> "DensityField":
        return cls(grid=grid, values=np.zeros(grid.shape), rho_max=rho_max)

    @classmethod
    def constant(cls, grid: GridSpec, value: float, rho_max: float = 1.0) -> "DensityField":
        return cls(grid=grid, values=np.full(grid.shape, float(value)), rho_max=rho_max)

    def with_values(self, values: np.ndarray) -> "DensityField":
        return DensityField(grid=self.grid, values=values, rho_max=self.rho_max)

    def scaled(self, factor: float) -> "DensityField":
        return self.with_values(self.values * factor)

    def refined(self, factor: int) -> "DensityField":
        """Split every cell into factor x factor equal copies."""
        values = np.kron(self.values, np.ones((factor, factor)))
        return DensityField(grid=self.grid.refine(factor), values=values, rho_max=self.rho_max)

    @property
    def min(self) -> float:
        return float(self.values.min())

    @property
    def max(self) -> float:
        return float(self.values.max())
