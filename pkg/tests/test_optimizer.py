import math

import numpy as np
import pytest
from pydantic import ValidationError

from core.grid import operations as ops
from core.grid.models import GridSpec
from core.models.piper import PiperModel
from core.optimizer.models import ObjectiveSpec, RouteParam
from core.optimizer.search import objective, optimize, project, random_route
from core.solver.pde import SolverConfig


@pytest.fixture
def spec():
    return ObjectiveSpec.around((-0.5, 0.0, 0.35, 0.85), horizon=0.2)


def test_objective_spec_validation():
    assert ObjectiveSpec.around((0, 1, 0, 1), 1.0).target == (-0.25, 1.25, -0.25, 1.25)
    with pytest.raises(ValidationError):
        ObjectiveSpec(target=(1, 0, 0, 1), horizon=1.0)
    with pytest.raises(ValidationError):
        ObjectiveSpec(target=(0, 1, 0, 1), horizon=0.0)


def test_circular_route_is_feasible():
    route = RouteParam.circular((-0.5, 0.5), omega=1.0, horizon=1.93, nodes=8)
    assert route.is_feasible()
    assert route.spacing == pytest.approx(1.93 / 7)
    np.testing.assert_allclose(route.heading(0.0), [1.0, 0.0])
    np.testing.assert_allclose(route.heading(route.spacing), [math.cos(route.spacing), -math.sin(route.spacing)])


def test_heading_holds_after_last_node():
    route = RouteParam(start=(0.0, 0.0), nodes=((1.0, 0.0), (0.0, 1.0)), spacing=2.0)
    np.testing.assert_allclose(route.heading(1.0), [0.5, 0.5])
    np.testing.assert_allclose(route.heading(10.0), [0.0, 1.0])


def test_vector_form():
    route = RouteParam(start=(0.1, 0.2), nodes=((1.0, 0.0), (0.5, 0.5), (0.0, 1.0)), spacing=0.5)
    vector = route.to_vector()
    assert vector.shape == (8,)
    assert RouteParam.from_vector(vector, 0.5) == route


def test_violations_are_named(spec):
    route = RouteParam(start=(1.0, 1.0), nodes=((2.0, 0.0), (-1.0, 0.0)), spacing=0.5)
    problems = route.violations(spec.target)
    assert len(problems) == 3
    assert any("norm" in p for p in problems)
    assert any("slope" in p for p in problems)
    assert any("outside target" in p for p in problems)


def test_projection_makes_routes_feasible(spec):
    rng = np.random.default_rng(3)
    for _ in range(20):
        nodes = tuple(map(tuple, rng.normal(scale=3.0, size=(6, 2))))
        route = RouteParam(start=tuple(rng.normal(scale=3.0, size=2)), nodes=nodes, spacing=0.1)
        projected = project(route, spec)
        assert projected.is_feasible(spec.target), projected.violations(spec.target)


def test_projection_keeps_feasible_routes(spec):
    route = RouteParam.circular((-0.5, 0.5), omega=1.0, horizon=0.2, nodes=4)
    np.testing.assert_allclose(project(route, spec).to_vector(), route.to_vector())


def test_random_routes_are_feasible(spec):
    rng = np.random.default_rng(0)
    for _ in range(10):
        assert random_route(rng, spec, 8).is_feasible(spec.target)


def test_objective_rejects_infeasible_route(spec):
    grid = GridSpec.from_extent(-2, 2, -2, 2, nx=60, ny=60)
    route = RouteParam(start=(5.0, 5.0), nodes=((1.0, 0.0), (1.0, 0.0)), spacing=0.1)
    with pytest.raises(ValueError, match="Infeasible"):
        objective(route, spec, PiperModel(), grid, SolverConfig())


def test_objective_is_mass_left_in_target(spec):
    grid = GridSpec.from_extent(-2, 2, -2, 2, nx=60, ny=60)
    route = RouteParam.circular((-0.75, 0.5), omega=1.0, horizon=0.2, nodes=4)
    model = PiperModel()
    value = objective(route, spec, model, grid, SolverConfig())
    assert 0.0 < value <= ops.mass(model.initial_density(grid)) * (1 + 1e-9)


def test_optimize_never_worse_than_baseline(spec):
    grid = GridSpec.from_extent(-2, 2, -2, 2, nx=60, ny=60)
    result = optimize(spec, PiperModel(), grid, SolverConfig(), budget=12, seed=1, nodes=4, restarts=1)
    assert 1 <= result.evaluations <= 12
    assert len(result.history) == result.evaluations
    assert result.history[0] == result.baseline_value
    assert all(b <= a for a, b in zip(result.history, result.history[1:]))
    assert result.best_value <= result.baseline_value
    assert result.best_route.is_feasible(spec.target)


def test_optimize_is_reproducible(spec):
    grid = GridSpec.from_extent(-2, 2, -2, 2, nx=40, ny=40)
    first = optimize(spec, PiperModel(), grid, SolverConfig(), budget=6, seed=5, nodes=3, restarts=1)
    second = optimize(spec, PiperModel(), grid, SolverConfig(), budget=6, seed=5, nodes=3, restarts=1)
    assert first.history == second.history
    assert first.best_route == second.best_route


def test_optimize_budget_must_be_positive(spec):
    grid = GridSpec.from_extent(-2, 2, -2, 2, nx=40, ny=40)
    with pytest.raises(ValueError):
        optimize(spec, PiperModel(), grid, SolverConfig(), budget=0, seed=0)
