"""Convolution of a density with a compactly supported mollifier, sampled at points.

The kernel is eta(x) = 3/(pi r^6) * max(0, r^2 - |x|^2)^2, which integrates to 1.
Only cells whose centers fall inside the kernel disc contribute (midpoint rule);
cells outside the grid are treated as empty.
"""
from __future__ import annotations

import math
from enum import Enum
from typing import Iterable, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from core.grid.models import DensityField, GridSpec


class AveragingMode(str, Enum):
    value = "value"
    gradient = "gradient"


class MollifierKernel(BaseModel):
    model_config = ConfigDict(frozen=True)

    radius: float = Field(gt=0)

    @property
    def normalization(self) -> float:
        return 3.0 / (math.pi * self.radius ** 6)

    @property
    def max_value(self) -> float:
        """eta(0) = 3/(pi r^2)."""
        return 3.0 / (math.pi * self.radius ** 2)

    @property
    def max_grad_norm(self) -> float:
        """|grad eta| peaks at |x| = r/sqrt(3) with value 8/(sqrt(3) pi r^3)."""
        return 8.0 / (math.sqrt(3.0) * math.pi * self.radius ** 3)

    def eta(self, d: np.ndarray) -> np.ndarray:
        """Kernel at displacements d of shape (..., 2)."""
        gap = np.maximum(0.0, self.radius ** 2 - (d ** 2).sum(axis=-1))
        return self.normalization * gap ** 2

    def grad_eta(self, d: np.ndarray) -> np.ndarray:
        gap = np.maximum(0.0, self.radius ** 2 - (d ** 2).sum(axis=-1))
        return (-4.0 * self.normalization * gap)[..., None] * d

    def discrete_mass(self, grid: GridSpec) -> float:
        """Midpoint-rule integral of eta on the grid, centered on a cell center."""
        nx = int(math.ceil(self.radius / grid.dx)) + 1
        ny = int(math.ceil(self.radius / grid.dy)) + 1
        xs = np.arange(-nx, nx + 1) * grid.dx
        ys = np.arange(-ny, ny + 1) * grid.dy
        xx, yy = np.meshgrid(xs, ys)
        return float(self.eta(np.stack([xx, yy], axis=-1)).sum() * grid.cell_area)


def _window(field: DensityField, kernel: MollifierKernel, point: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Density values and point-minus-center displacements of the cells the kernel can reach."""
    grid = field.grid
    if 2 * kernel.radius >= min(grid.nx * grid.dx, grid.ny * grid.dy):
        raise ValueError(
            f"Kernel radius {kernel.radius} must be below half the domain extent"
        )
    px, py = float(point[0]), float(point[1])
    i_lo = max(0, int(math.floor((px - kernel.radius - grid.x0) / grid.dx)))
    i_hi = min(grid.nx, int(math.ceil((px + kernel.radius - grid.x0) / grid.dx)) + 1)
    j_lo = max(0, int(math.floor((py - kernel.radius - grid.y0) / grid.dy)))
    j_hi = min(grid.ny, int(math.ceil((py + kernel.radius - grid.y0) / grid.dy)) + 1)
    if i_lo >= i_hi or j_lo >= j_hi:
        return np.zeros((0, 0)), np.zeros((0, 0, 2))
    xs = grid.x0 + (np.arange(i_lo, i_hi) + 0.5) * grid.dx
    ys = grid.y0 + (np.arange(j_lo, j_hi) + 0.5) * grid.dy
    xx, yy = np.meshgrid(xs, ys)
    d = np.stack([px - xx, py - yy], axis=-1)
    return field.values[j_lo:j_hi, i_lo:i_hi], d


def convolve_at(field: DensityField, kernel: MollifierKernel, point) -> float:
    """(rho * eta)(point) by the midpoint rule."""
    rho, d = _window(field, kernel, np.asarray(point, dtype=float))
    if rho.size == 0:
        return 0.0
    return float((rho * kernel.eta(d)).sum() * field.grid.cell_area)


def convolve_grad_at(field: DensityField, kernel: MollifierKernel, point) -> np.ndarray:
    """(rho * grad eta)(point) with the analytic kernel gradient."""
    rho, d = _window(field, kernel, np.asarray(point, dtype=float))
    if rho.size == 0:
        return np.zeros(2)
    g = kernel.grad_eta(d)
    return (rho[..., None] * g).sum(axis=(0, 1)) * field.grid.cell_area


def stack_at(field: DensityField, kernel: MollifierKernel, points: Iterable, mode: AveragingMode) -> np.ndarray:
    """Per-point convolutions concatenated into one vector (1 or 2 entries per point)."""
    mode = AveragingMode(mode)
    parts = []
    for point in points:
        if mode is AveragingMode.value:
            parts.append(np.array([convolve_at(field, kernel, point)]))
        else:
            parts.append(convolve_grad_at(field, kernel, point))
    if not parts:
        return np.zeros(0)
    return np.concatenate(parts)


def kernel_leaves_grid(grid: GridSpec, kernel: MollifierKernel, point) -> bool:
    px, py = float(point[0]), float(point[1])
    r = kernel.radius
    return not (px - r >= grid.x0 and px + r <= grid.x1 and py - r >= grid.y0 and py + r <= grid.y1)
