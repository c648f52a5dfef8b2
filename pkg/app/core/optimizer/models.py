"""Piper route parameterization and optimization results."""
from __future__ import annotations

import math
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

FEASIBILITY_TOLERANCE = 1e-9

Box = Tuple[float, float, float, float]


class ObjectiveSpec(BaseModel):
    """Target region K = [xmin, xmax] x [ymin, ymax] and horizon T_max."""

    model_config = ConfigDict(frozen=True)

    target: Box
    horizon: float = Field(gt=0)

    @field_validator("target")
    @classmethod
    def _check_box(cls, box):
        xmin, xmax, ymin, ymax = box
        if xmax <= xmin or ymax <= ymin:
            raise ValueError(f"degenerate target region {box}")
        return box

    @classmethod
    def around(cls, box: Box, horizon: float, pad: float = 0.25) -> "ObjectiveSpec":
        xmin, xmax, ymin, ymax = box
        return cls(target=(xmin - pad, xmax + pad, ymin - pad, ymax + pad), horizon=horizon)


class RouteParam(BaseModel):
    """Start point and piecewise-linear heading with nodes every `spacing` time units.

    Past the last node the heading keeps its last value; nodes beyond the
    horizon are never reached by a run.
    """

    model_config = ConfigDict(frozen=True)

    start: Tuple[float, float]
    nodes: Tuple[Tuple[float, float], ...]
    spacing: float = Field(gt=0)

    @field_validator("nodes")
    @classmethod
    def _at_least_two(cls, nodes):
        if len(nodes) < 2:
            raise ValueError("a route needs at least two heading nodes")
        return nodes

    @property
    def node_array(self) -> np.ndarray:
        return np.array(self.nodes, dtype=float)

    @property
    def node_times(self) -> np.ndarray:
        return np.arange(len(self.nodes)) * self.spacing

    def heading(self, t: float) -> np.ndarray:
        nodes, times = self.node_array, self.node_times
        return np.array([np.interp(t, times, nodes[:, 0]), np.interp(t, times, nodes[:, 1])])

    def to_vector(self) -> np.ndarray:
        return np.concatenate([np.array(self.start, dtype=float), self.node_array.ravel()])

    @classmethod
    def from_vector(cls, x: np.ndarray, spacing: float) -> "RouteParam":
        x = np.asarray(x, dtype=float)
        nodes = x[2:].reshape(-1, 2)
        return cls(start=(x[0], x[1]), nodes=tuple(map(tuple, nodes)), spacing=spacing)

    def violations(self, target: Optional[Box] = None) -> List[str]:
        found = []
        nodes = self.node_array
        norms = np.linalg.norm(nodes, axis=1)
        if norms.max() > 1 + FEASIBILITY_TOLERANCE:
            found.append(f"heading norm {norms.max():.6g} > 1")
        slopes = np.linalg.norm(np.diff(nodes, axis=0), axis=1) / self.spacing
        if slopes.max() > 1 + FEASIBILITY_TOLERANCE:
            found.append(f"heading slope {slopes.max():.6g} > 1")
        if target is not None:
            xmin, xmax, ymin, ymax = target
            x, y = self.start
            if not (xmin <= x <= xmax and ymin <= y <= ymax):
                found.append(f"start {self.start} outside target region {target}")
        return found

    def is_feasible(self, target: Optional[Box] = None) -> bool:
        return not self.violations(target)

    @classmethod
    def circular(cls, start: Tuple[float, float], omega: float, horizon: float, nodes: int) -> "RouteParam":
        """Samples of the default heading (cos wt, -sin wt) at uniform times over [0, horizon]."""
        spacing = horizon / (nodes - 1)
        times = np.arange(nodes) * spacing
        points = tuple((math.cos(omega * t), -math.sin(omega * t)) for t in times)
        return cls(start=tuple(start), nodes=points, spacing=spacing)


class OptimizationResult(BaseModel):
    best_route: RouteParam
    best_value: float
    baseline_value: float
    history: List[float]
    evaluations: int
    full_resolution_value: Optional[float] = None
