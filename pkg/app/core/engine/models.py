"""Run results."""
from __future__ import annotations

from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict

from core.diagnostics.models import DiagnosticsReport
from core.grid.models import DensityField


class Snapshot(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    time: float
    step: int
    field: DensityField
    agents: np.ndarray


class Trajectory(BaseModel):
    """Agent states at every step boundary plus density snapshots at requested times."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    scenario: str
    state_size: int
    times: List[float] = []
    agent_states: List[np.ndarray] = []
    snapshots: List[Snapshot] = []
    diagnostics: Optional[DiagnosticsReport] = None

    @property
    def steps(self) -> int:
        return max(0, len(self.times) - 1)

    @property
    def final_state(self) -> np.ndarray:
        return self.agent_states[-1]

    @property
    def final_snapshot(self) -> Snapshot:
        return self.snapshots[-1]

    def snapshot_at(self, time: float) -> Snapshot:
        for snap in self.snapshots:
            if snap.time == time:
                return snap
        raise KeyError(f"No snapshot recorded at t={time}")


class PerturbationResult(BaseModel):
    """Drift between a run and the same run with initial density scaled by (1 - delta)."""

    delta: float
    times: List[float]
    l1_drift: List[float]
    agent_drift: List[float]
    initial_gap: float
