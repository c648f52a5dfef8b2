"""Derivative-free search for the piper route leaving the least density in K at T_max."""
from __future__ import annotations

import logging
import math
from typing import Dict, List

import numpy as np
from scipy.optimize import minimize

from core.engine.runner import run
from core.errors import HerdflowError
from core.grid import operations as ops
from core.grid.models import GridSpec
from core.models.piper import PiperModel
from core.optimizer.models import ObjectiveSpec, OptimizationResult, RouteParam
from core.solver.pde import SolverConfig

logger = logging.getLogger(__name__)

SIMPLEX_STEP = 0.1


class _BudgetExhausted(Exception):
    pass


def objective(route: RouteParam, spec: ObjectiveSpec, model: PiperModel, grid: GridSpec, config: SolverConfig) -> float:
    """Density mass inside K at T_max when the piper follows `route`; inf if the run aborts."""
    problems = route.violations(spec.target)
    if problems:
        raise ValueError(f"Infeasible route: {'; '.join(problems)}")
    routed = model.with_heading(route.heading).with_start(route.start)
    try:
        trajectory = run(routed, grid, config, spec.horizon, [spec.horizon])
    except HerdflowError as e:
        logger.warning(f"Route evaluation aborted: {e}")
        return math.inf
    return ops.mass_in_box(trajectory.final_snapshot.field, *spec.target)


def project(route: RouteParam, spec: ObjectiveSpec) -> RouteParam:
    """Feasible version of `route`.

    Headings are clipped to the unit disc, then a forward and a backward pass
    pull each node towards its neighbour until consecutive nodes differ by at
    most `spacing` (unit slope). The start is clamped into K.
    """
    nodes = route.node_array.copy()
    norms = np.linalg.norm(nodes, axis=1)
    over = norms > 1.0
    nodes[over] /= norms[over, None]

    limit = route.spacing
    for k in range(1, len(nodes)):
        nodes[k] = _limit_step(nodes[k - 1], nodes[k], limit)
    for k in range(len(nodes) - 2, -1, -1):
        nodes[k] = _limit_step(nodes[k + 1], nodes[k], limit)

    xmin, xmax, ymin, ymax = spec.target
    start = (float(np.clip(route.start[0], xmin, xmax)), float(np.clip(route.start[1], ymin, ymax)))
    return RouteParam(start=start, nodes=tuple(map(tuple, nodes)), spacing=route.spacing)


def _limit_step(anchor: np.ndarray, point: np.ndarray, limit: float) -> np.ndarray:
    step = point - anchor
    length = float(np.linalg.norm(step))
    if length <= limit:
        return point
    return anchor + step * (limit / length)


def random_route(rng: np.random.Generator, spec: ObjectiveSpec, nodes: int) -> RouteParam:
    spacing = spec.horizon / (nodes - 1)
    xmin, xmax, ymin, ymax = spec.target
    start = (float(rng.uniform(xmin, xmax)), float(rng.uniform(ymin, ymax)))
    angle = rng.uniform(0.0, 2.0 * math.pi)
    points = [np.array([math.cos(angle), math.sin(angle)]) * math.sqrt(rng.uniform())]
    for _ in range(nodes - 1):
        turn = rng.normal(size=2)
        turn *= spacing * rng.uniform() / max(np.linalg.norm(turn), 1e-12)
        points.append(points[-1] + turn)
    route = RouteParam(start=start, nodes=tuple(map(tuple, points)), spacing=spacing)
    return project(route, spec)


def optimize(
    spec: ObjectiveSpec,
    model: PiperModel,
    grid: GridSpec,
    config: SolverConfig,
    budget: int,
    seed: int,
    nodes: int = 8,
    restarts: int = 2,
) -> OptimizationResult:
    """Projected Nelder-Mead from the default circular route plus `restarts` random routes."""
    if budget < 1:
        raise ValueError(f"budget must be at least 1, got {budget}")
    if nodes < 2:
        raise ValueError(f"need at least 2 route nodes, got {nodes}")
    rng = np.random.default_rng(seed)
    baseline_route = project(
        RouteParam.circular(tuple(model.params.p0), model.params.omega, spec.horizon, nodes), spec
    )
    starts = [baseline_route] + [random_route(rng, spec, nodes) for _ in range(restarts)]
    spacing = baseline_route.spacing

    history: List[float] = []
    best = {"route": baseline_route, "value": math.inf}
    seen: Dict[tuple, float] = {}

    def evaluate(route: RouteParam) -> float:
        key = tuple(route.to_vector())
        if key in seen:
            return seen[key]
        if len(history) >= budget:
            raise _BudgetExhausted
        value = objective(route, spec, model, grid, config)
        seen[key] = value
        if value < best["value"]:
            best["route"], best["value"] = route, value
            logger.info(f"Evaluation {len(history) + 1}: new best {value:.6g}")
        history.append(best["value"])
        return value

    def fun(x: np.ndarray) -> float:
        return evaluate(project(RouteParam.from_vector(x, spacing), spec))

    baseline_value = evaluate(baseline_route)
    for index, start in enumerate(starts):
        remaining = budget - len(history)
        if remaining <= 0:
            break
        share = max(1, remaining // (len(starts) - index))
        x0 = start.to_vector()
        simplex = np.vstack([x0] + [x0 + SIMPLEX_STEP * e for e in np.eye(x0.size)])
        try:
            minimize(
                fun, x0, method="Nelder-Mead",
                options={"maxfev": share, "initial_simplex": simplex, "xatol": 1e-4, "fatol": 1e-9},
            )
        except _BudgetExhausted:
            break
        logger.debug(f"Restart {index} done after {len(history)} evaluations")

    logger.info(f"Optimizer finished: {len(history)} evaluations, best {best['value']:.6g} (baseline {baseline_value:.6g})")
    return OptimizationResult(
        best_route=best["route"],
        best_value=best["value"],
        baseline_value=baseline_value,
        history=history,
        evaluations=len(history),
    )
