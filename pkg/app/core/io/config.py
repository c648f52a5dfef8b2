"""Run configuration in flat ``key = value`` form.

Example::

    # pied piper, coarse grid
    scenario = piper
    grid.nx = 200
    grid.ny = 200
    t_end = 1.93
    piper.v_max = 4.5
    piper.initial = disc 0 0 0.3

Lines are ``key = value``; ``#`` starts a comment. Scenario parameters are
overridden with ``<scenario>.<parameter>`` keys.
"""
from __future__ import annotations

from pathlib import Path
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from core.config.settings import get_settings
from core.errors import ConfigError
from core.grid.models import GridSpec
from core.models.base import ScenarioModel, ScenarioParams
from core.models.registry import SCENARIO_DEFAULTS, SCENARIOS, build_model, params_class, resolve_scenario
from core.optimizer.models import Box, ObjectiveSpec
from core.solver.pde import SolverConfig

FORMATS = ("csv", "pgm")

# config key -> SolverConfig field
SOLVER_KEYS = {
    "solver.cfl_factor": "cfl_factor",
    "solver.clamp": "clamp_to_range",
    "solver.enforce_cfl": "enforce_cfl",
    "solver.margin_cells": "margin_cells",
    "solver.margin_threshold": "margin_threshold",
    "solver.mass_tolerance": "mass_tolerance",
    "solver.max_dt": "max_dt",
    "solver.strict_margin": "strict_margin",
}
GRID_KEYS = ("grid.x0", "grid.y0", "grid.nx", "grid.ny", "grid.dx", "grid.dy", "grid.extent")
OPTIMIZER_KEYS = (
    "optimizer.budget", "optimizer.nodes", "optimizer.seed", "optimizer.restarts",
    "optimizer.target", "optimizer.horizon", "optimizer.cells",
)
TOP_KEYS = ("scenario", "t_end", "snapshot_times", "output.dir", "output.formats")


class OptimizerConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    budget: int = Field(default=200, ge=1)
    nodes: int = Field(default=8, ge=2)
    seed: int = 0
    restarts: int = Field(default=2, ge=0)
    target: Optional[Box] = None  # default: initial support box padded by 0.25
    horizon: Optional[float] = Field(default=None, gt=0)  # default: t_end
    cells: int = Field(default=100, ge=3)  # coarse grid used while searching


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    scenario: str
    grid: GridSpec
    t_end: float = Field(ge=0)
    snapshot_times: Tuple[float, ...]
    solver: SolverConfig = SolverConfig()
    overrides: Dict[str, str] = {}
    output_dir: str = "out"
    formats: Tuple[str, ...] = ("csv",)
    optimizer: OptimizerConfig = OptimizerConfig()

    @field_validator("formats")
    @classmethod
    def _check_formats(cls, formats):
        unknown = [f for f in formats if f not in FORMATS]
        if unknown:
            raise ValueError(f"unknown output formats {unknown}; valid: {', '.join(FORMATS)}")
        return formats

    def params(self) -> ScenarioParams:
        return params_class(self.scenario)(**self.overrides)

    def build_model(self) -> ScenarioModel:
        return build_model(self.scenario, self.params())

    def objective_spec(self, model: ScenarioModel) -> ObjectiveSpec:
        horizon = self.optimizer.horizon or self.t_end
        if self.optimizer.target is not None:
            return ObjectiveSpec(target=self.optimizer.target, horizon=horizon)
        box = model.initial_shape.bounding_box()
        if box is None:
            raise ConfigError("optimizer.target is required when the initial density is empty")
        return ObjectiveSpec.around(box, horizon)

    def coarse_grid(self) -> GridSpec:
        cells = self.optimizer.cells
        return GridSpec.from_extent(self.grid.x0, self.grid.x1, self.grid.y0, self.grid.y1, nx=cells, ny=cells)


def _number(value: str, line: int, key: str, kind=float):
    try:
        return kind(value)
    except ValueError:
        raise ConfigError(f"malformed number for '{key}': '{value}'", line)


def _numbers(value: str, line: int, key: str) -> List[float]:
    return [_number(v, line, key) for v in value.replace(",", " ").split()]


def _flag(value: str, line: int, key: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"expected true/false for '{key}', got '{value}'", line)


def _read_lines(text: str) -> Dict[str, Tuple[str, int]]:
    entries: Dict[str, Tuple[str, int]] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got '{line}'", number)
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lower()
        if not key:
            raise ConfigError("empty key", number)
        if key in entries:
            raise ConfigError(f"duplicate key '{key}' (first set on line {entries[key][1]})", number)
        entries[key] = (value, number)
    return entries


def parse_config(text: str) -> RunConfig:
    """Parse config text, filling scenario defaults; unknown keys are errors."""
    entries = _read_lines(text)
    if "scenario" not in entries:
        raise ConfigError("missing 'scenario' key", 1)
    value, line = entries["scenario"]
    try:
        scenario = resolve_scenario(value)
    except ConfigError as e:
        raise ConfigError(e.reason, line)
    defaults = SCENARIO_DEFAULTS[scenario]
    params_cls = params_class(scenario)

    overrides: Dict[str, str] = {}
    override_lines: Dict[str, int] = {}
    for key, (value, line) in entries.items():
        prefix, _, name = key.partition(".")
        if key in TOP_KEYS or key in GRID_KEYS or key in SOLVER_KEYS or key in OPTIMIZER_KEYS:
            continue
        if prefix == scenario and name in params_cls.model_fields:
            overrides[name] = value
            override_lines[name] = line
            continue
        raise ConfigError(f"unknown key '{key}'", line)

    def get(key: str):
        return entries.get(key, (None, None))

    # Grid: scenario extent and resolution, then explicit overrides
    extent = defaults["extent"]
    value, line = get("grid.extent")
    if value is not None:
        extent = tuple(_numbers(value, line, "grid.extent"))
        if len(extent) != 4:
            raise ConfigError("grid.extent takes xmin, xmax, ymin, ymax", line)
    grid_values = {}
    for axis, lo, hi in (("x", 0, 1), ("y", 2, 3)):
        value, line = get(f"grid.n{axis}")
        cells = _number(value, line, f"grid.n{axis}", int) if value is not None else defaults["cells"]
        grid_values[f"n{axis}"] = cells
        grid_values[f"{axis}0"] = extent[lo]
        grid_values[f"d{axis}"] = (extent[hi] - extent[lo]) / cells if cells > 0 else 0.0
    for name in ("x0", "y0", "dx", "dy"):
        value, line = get(f"grid.{name}")
        if value is not None:
            grid_values[name] = _number(value, line, f"grid.{name}")
    try:
        grid = GridSpec(**grid_values)
    except ValidationError as e:
        lines = [entries[k][1] for k in GRID_KEYS if k in entries]
        raise ConfigError(f"invalid grid: {e.errors()[0]['msg']}", min(lines) if lines else None)

    value, line = get("t_end")
    t_end = _number(value, line, "t_end") if value is not None else defaults["t_end"]
    value, line = get("snapshot_times")
    if value is not None:
        snapshot_times = tuple(_numbers(value, line, "snapshot_times"))
    else:
        snapshot_times = tuple(t for t in defaults["snapshot_times"] if t <= t_end)

    solver_values = {}
    for key, field in SOLVER_KEYS.items():
        value, line = get(key)
        if value is None:
            continue
        if field in ("clamp_to_range", "enforce_cfl", "strict_margin"):
            solver_values[field] = _flag(value, line, key)
        elif field == "margin_cells":
            solver_values[field] = _number(value, line, key, int)
        else:
            solver_values[field] = _number(value, line, key)
    try:
        solver = SolverConfig(**solver_values)
    except ValidationError as e:
        lines = [entries[k][1] for k in SOLVER_KEYS if k in entries]
        raise ConfigError(f"invalid solver settings: {e.errors()[0]['msg']}", min(lines) if lines else None)

    optimizer_values = {}
    for key in OPTIMIZER_KEYS:
        value, line = get(key)
        if value is None:
            continue
        name = key.split(".", 1)[1]
        if name == "target":
            box = _numbers(value, line, key)
            if len(box) != 4:
                raise ConfigError("optimizer.target takes xmin, xmax, ymin, ymax", line)
            optimizer_values[name] = tuple(box)
        elif name == "horizon":
            optimizer_values[name] = _number(value, line, key)
        else:
            optimizer_values[name] = _number(value, line, key, int)
    try:
        optimizer = OptimizerConfig(**optimizer_values)
    except ValidationError as e:
        lines = [entries[k][1] for k in OPTIMIZER_KEYS if k in entries]
        raise ConfigError(f"invalid optimizer settings: {e.errors()[0]['msg']}", min(lines) if lines else None)

    try:
        params_cls(**overrides)
    except ValidationError as e:
        error = e.errors()[0]
        field = str(error["loc"][0]) if error["loc"] else None
        raise ConfigError(f"invalid {scenario} parameter: {error['msg']}", override_lines.get(field))

    value, _ = get("output.dir")
    output_dir = value if value is not None else str(get_settings().output_dir)
    value, line = get("output.formats")
    formats = tuple(f.strip().lower() for f in value.split(",") if f.strip()) if value is not None else ("csv",)

    try:
        return RunConfig(
            scenario=scenario,
            grid=grid,
            t_end=t_end,
            snapshot_times=snapshot_times,
            solver=solver,
            overrides=overrides,
            output_dir=output_dir,
            formats=formats,
            optimizer=optimizer,
        )
    except ValidationError as e:
        error = e.errors()[0]
        key = {"t_end": "t_end", "formats": "output.formats"}.get(str(error["loc"][0]) if error["loc"] else "")
        raise ConfigError(f"invalid configuration: {error['msg']}", entries[key][1] if key in entries else None)


def emit_config(config: RunConfig) -> str:
    """Serialize so that parse_config(emit_config(c)) == c."""
    g = config.grid
    lines = [
        f"scenario = {config.scenario}",
        f"t_end = {config.t_end!r}",
        f"snapshot_times = {', '.join(repr(t) for t in config.snapshot_times)}",
        f"grid.x0 = {g.x0!r}",
        f"grid.y0 = {g.y0!r}",
        f"grid.nx = {g.nx}",
        f"grid.ny = {g.ny}",
        f"grid.dx = {g.dx!r}",
        f"grid.dy = {g.dy!r}",
    ]
    for key, field in SOLVER_KEYS.items():
        value = getattr(config.solver, field)
        if value is None:
            continue
        lines.append(f"{key} = {str(value).lower() if isinstance(value, bool) else repr(value)}")
    lines.append(f"output.dir = {config.output_dir}")
    lines.append(f"output.formats = {', '.join(config.formats)}")
    opt = config.optimizer
    lines += [
        f"optimizer.budget = {opt.budget}",
        f"optimizer.nodes = {opt.nodes}",
        f"optimizer.seed = {opt.seed}",
        f"optimizer.restarts = {opt.restarts}",
        f"optimizer.cells = {opt.cells}",
    ]
    if opt.target is not None:
        lines.append(f"optimizer.target = {', '.join(repr(v) for v in opt.target)}")
    if opt.horizon is not None:
        lines.append(f"optimizer.horizon = {opt.horizon!r}")
    for name in sorted(config.overrides):
        lines.append(f"{config.scenario}.{name} = {config.overrides[name]}")
    return "\n".join(lines) + "\n"


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e.strerror or e}")
    return parse_config(text)
