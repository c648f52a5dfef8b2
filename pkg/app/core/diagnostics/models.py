"""Diagnostics records."""
from __future__ import annotations

from typing import List, Optional

from pydantic import BaseModel


class StepRecord(BaseModel):
    step: int
    time: float
    min: float
    max: float
    mass: float
    clipped_mass: float = 0.0


class SnapshotRecord(BaseModel):
    time: float
    step: int
    mass: float
    total_variation: float
    tv_bound: Optional[float] = None  # None when the scenario supplies no constants
    support_radius: float
    support_bound: float
    agent_norm: float
    agent_bound: float
    components: int
    watched_mass: float


class DiagnosticsReport(BaseModel):
    scenario: str
    rho_max: float
    initial_mass: float
    initial_tv: float
    initial_support_radius: float
    support_threshold: float
    component_threshold: float
    watch_box: Optional[tuple[float, float, float, float]] = None
    steps: List[StepRecord] = []
    snapshots: List[SnapshotRecord] = []
    kernel_clip_events: int = 0

    @property
    def min_density(self) -> float:
        return min((s.min for s in self.steps), default=0.0)

    @property
    def max_density(self) -> float:
        return max((s.max for s in self.steps), default=0.0)

    @property
    def mass_drift(self) -> float:
        """Largest relative mass change over all steps (absolute when the initial mass is 0)."""
        scale = self.initial_mass if self.initial_mass > 0 else 1.0
        return max((abs(s.mass - self.initial_mass) / scale for s in self.steps), default=0.0)

    @property
    def clipped_mass(self) -> float:
        return sum(s.clipped_mass for s in self.steps)


class Finding(BaseModel):
    check: str
    passed: bool
    detail: str = ""


class StabilityRow(BaseModel):
    delta: float
    l1_drift: float
    agent_drift: float
    l1_ratio: float
    agent_ratio: float


class StabilityTable(BaseModel):
    scenario: str
    t_end: float
    rows: List[StabilityRow] = []
    flags: List[str] = []

    @property
    def passed(self) -> bool:
        return not self.flags
