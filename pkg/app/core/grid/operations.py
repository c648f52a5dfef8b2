"""Norms and set operations on density fields."""
from __future__ import annotations

import numpy as np
from scipy import ndimage

from core.errors import GridMismatchError
from core.grid.models import DensityField

DEFAULT_SUPPORT_THRESHOLD = 1e-10  # relative to rho_max


def mass(field: DensityField) -> float:
    """Discrete integral of the density."""
    return float(field.values.sum() * field.grid.cell_area)


def l1_distance(a: DensityField, b: DensityField) -> float:
    if a.grid != b.grid:
        raise GridMismatchError(f"Cannot compare fields on different grids: {a.grid} vs {b.grid}")
    return float(np.abs(a.values - b.values).sum() * a.grid.cell_area)


def total_variation(field: DensityField) -> float:
    """Jumps across every cell face, zero ghost cells outside the domain.

    x-jumps are weighted by the face length dy and y-jumps by dx, so a blob of
    value 1 contributes its perimeter.
    """
    padded = np.pad(field.values, 1)
    jumps_x = np.abs(np.diff(padded[1:-1, :], axis=1)).sum()
    jumps_y = np.abs(np.diff(padded[:, 1:-1], axis=0)).sum()
    return float(jumps_x * field.grid.dy + jumps_y * field.grid.dx)


def support_radius(field: DensityField, threshold: float) -> float:
    """Largest distance from the origin to a cell center whose value exceeds threshold."""
    if threshold < 0:
        raise ValueError(f"threshold must be nonnegative, got {threshold}")
    mask = field.values > threshold
    if not mask.any():
        return 0.0
    centers = field.grid.cell_centers()[mask]
    return float(np.sqrt((centers ** 2).sum(axis=-1)).max())


def connected_components(field: DensityField, threshold: float) -> int:
    """Number of 4-connected components of the cells above threshold."""
    if threshold < 0:
        raise ValueError(f"threshold must be nonnegative, got {threshold}")
    # scipy's default 2D structuring element is the 4-neighbourhood cross
    _, count = ndimage.label(field.values > threshold)
    return int(count)


def mass_in_box(field: DensityField, xmin: float, xmax: float, ymin: float, ymax: float) -> float:
    """Mass of the cells whose centers lie in the closed box."""
    centers = field.grid.cell_centers()
    inside = (
        (centers[..., 0] >= xmin) & (centers[..., 0] <= xmax)
        & (centers[..., 1] >= ymin) & (centers[..., 1] <= ymax)
    )
    return float(field.values[inside].sum() * field.grid.cell_area)


def boundary_band_max(field: DensityField, cells: int) -> float:
    """Largest value within `cells` cells of the domain boundary."""
    v = field.values
    band = np.concatenate([
        v[:cells, :].ravel(), v[-cells:, :].ravel(),
        v[:, :cells].ravel(), v[:, -cells:].ravel(),
    ])
    return float(band.max())
