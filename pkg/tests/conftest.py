import sys
from pathlib import Path

import numpy as np
import pytest

APP_DIR = Path(__file__).resolve().parent.parent / "app"
if str(APP_DIR) not in sys.path:
    sys.path.insert(0, str(APP_DIR))

from core.grid.models import DensityField, GridSpec  # noqa: E402
from core.models.base import ScenarioModel, ScenarioParams  # noqa: E402
from core.models.shapes import InitialShape  # noqa: E402


class DriftModel(ScenarioModel):
    """f = rho (1 - rho) (a, b), independent of x and of the agent; the agent never moves."""

    name = "drift"

    def __init__(self, direction=(1.0, 0.0)):
        super().__init__(ScenarioParams(rho_max=1.0, v_max=1.0, r_p=0.1, initial=InitialShape(kind="empty")))
        self.direction = np.asarray(direction, dtype=float)

    @property
    def initial_state(self):
        return np.zeros(2)

    def flux(self, t, x, rho, p):
        return (rho * (1.0 - rho))[..., None] * self.direction

    def speed(self, t, p, r):
        return np.zeros(2)

    def agent_positions(self, p):
        return self.check_state(p).reshape(1, 2)

    @property
    def v_cfl(self):
        return float(np.abs(self.direction).max())

    def c_phi(self, mass):
        return 0.0


@pytest.fixture
def drift_model():
    return DriftModel()


@pytest.fixture
def unit_grid():
    """3 x 3 cells of size 1."""
    return GridSpec(x0=0.0, y0=0.0, nx=3, ny=3, dx=1.0, dy=1.0)


@pytest.fixture
def piper_grid():
    """Coarse version of the piper domain; cell edges line up with the initial rectangle."""
    return GridSpec.from_extent(-2.0, 2.0, -2.0, 2.0, nx=80, ny=80)


@pytest.fixture
def blob_field():
    grid = GridSpec.from_extent(-1.0, 1.0, -1.0, 1.0, nx=40, ny=40)
    rng = np.random.default_rng(7)
    values = np.zeros(grid.shape)
    values[15:25, 12:28] = rng.uniform(0.1, 0.9, size=(10, 16))
    return DensityField(grid=grid, values=values)


@pytest.fixture
def write_config(tmp_path):
    def _write(text, name="run.cfg"):
        path = tmp_path / name
        path.write_text(text)
        return path
    return _write
