"""Initial density shapes and their rasterization onto a grid."""
from __future__ import annotations

import logging
from typing import Literal, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from core.errors import DomainTooSmallError
from core.grid.models import DensityField, GridSpec

logger = logging.getLogger(__name__)

SUBSAMPLES = 4
MARGIN_CELLS = 2


class InitialShape(BaseModel):
    """Region filled with density R at t = 0.

    Text form (config files): ``rectangle xmin xmax ymin ymax``,
    ``disc cx cy radius`` or ``empty``.
    """

    model_config = ConfigDict(frozen=True)

    kind: Literal["rectangle", "disc", "empty"]
    numbers: Tuple[float, ...] = ()

    @model_validator(mode="before")
    @classmethod
    def _from_text(cls, data):
        if isinstance(data, str):
            parts = data.replace(",", " ").split()
            if not parts:
                raise ValueError("empty shape description")
            try:
                numbers = tuple(float(x) for x in parts[1:])
            except ValueError:
                raise ValueError(f"malformed number in shape '{data}'")
            return {"kind": parts[0].lower(), "numbers": numbers}
        return data

    @model_validator(mode="after")
    def _check_numbers(self):
        expected = {"rectangle": 4, "disc": 3, "empty": 0}[self.kind]
        if len(self.numbers) != expected:
            raise ValueError(f"{self.kind} takes {expected} numbers, got {len(self.numbers)}")
        if self.kind == "rectangle":
            xmin, xmax, ymin, ymax = self.numbers
            if xmax <= xmin or ymax <= ymin:
                raise ValueError(f"degenerate rectangle {self.numbers}")
        if self.kind == "disc" and self.numbers[2] <= 0:
            raise ValueError(f"disc radius must be positive, got {self.numbers[2]}")
        return self

    def to_text(self) -> str:
        return " ".join([self.kind] + [repr(float(x)) for x in self.numbers])

    def bounding_box(self) -> Tuple[float, float, float, float] | None:
        """(xmin, xmax, ymin, ymax), or None for the empty shape."""
        if self.kind == "rectangle":
            return tuple(self.numbers)
        if self.kind == "disc":
            cx, cy, r = self.numbers
            return (cx - r, cx + r, cy - r, cy + r)
        return None

    def contains(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        if self.kind == "rectangle":
            xmin, xmax, ymin, ymax = self.numbers
            return (x >= xmin) & (x <= xmax) & (y >= ymin) & (y <= ymax)
        if self.kind == "disc":
            cx, cy, r = self.numbers
            return (x - cx) ** 2 + (y - cy) ** 2 <= r ** 2
        return np.zeros(np.broadcast(x, y).shape, dtype=bool)

    def cell_fractions(self, grid: GridSpec) -> np.ndarray:
        """Fraction of every cell inside the shape, by SUBSAMPLES x SUBSAMPLES sampling."""
        offsets = (np.arange(SUBSAMPLES) + 0.5) / SUBSAMPLES - 0.5
        xc, yc = grid.x_centers(), grid.y_centers()
        total = np.zeros(grid.shape)
        for oy in offsets:
            for ox in offsets:
                xx, yy = np.meshgrid(xc + ox * grid.dx, yc + oy * grid.dy)
                total += self.contains(xx, yy)
        return total / SUBSAMPLES ** 2


def rasterize(
    shape: InitialShape,
    grid: GridSpec,
    rho_max: float,
    transport_margin: float = 0.0,
    strict: bool = False,
) -> DensityField:
    """Cell values R * (fraction of the cell inside the shape).

    The shape must sit inside the grid with MARGIN_CELLS cells to spare. The
    transport margin (kernel radius plus maximal travel distance) is enforced
    only when ``strict``; otherwise a shortfall is logged.
    """
    box = shape.bounding_box()
    if box is not None:
        xmin, xmax, ymin, ymax = box
        cell_margin = MARGIN_CELLS * grid.h
        if not grid.contains_box(xmin, xmax, ymin, ymax, margin=cell_margin):
            raise DomainTooSmallError(
                f"Initial {shape.kind} {box} does not fit in [{grid.x0}, {grid.x1}] x "
                f"[{grid.y0}, {grid.y1}] with {MARGIN_CELLS} cells margin; required extent "
                f"[{xmin - cell_margin}, {xmax + cell_margin}] x [{ymin - cell_margin}, {ymax + cell_margin}]"
            )
        if transport_margin > 0 and not grid.contains_box(xmin, xmax, ymin, ymax, margin=transport_margin):
            required = (
                f"[{xmin - transport_margin:.4g}, {xmax + transport_margin:.4g}] x "
                f"[{ymin - transport_margin:.4g}, {ymax + transport_margin:.4g}]"
            )
            if strict:
                raise DomainTooSmallError(
                    f"Domain too small for transport margin {transport_margin:.4g}: required extent {required}"
                )
            logger.warning(
                f"Speed-bound margin {transport_margin:.4g} exceeds the domain (required extent {required}); "
                f"relying on the in-run margin guard"
            )
    return DensityField(grid=grid, values=rho_max * shape.cell_fractions(grid), rho_max=rho_max)
