import math

import numpy as np
import pytest

from core.diagnostics.bounds import agent_norm_bound, sphere_weight, support_growth_bound, tv_bound, tv_growth_rate
from core.diagnostics.checks import check_run, refinement_study, stability_report, support_overshoot
from core.diagnostics.models import DiagnosticsReport, StabilityTable, StepRecord
from core.engine.runner import run
from core.grid.models import GridSpec
from core.models.dogs import DogsModel
from core.models.piper import PiperModel
from core.solver.pde import SolverConfig

from conftest import DriftModel


def test_sphere_weights():
    assert sphere_weight(1) == pytest.approx(1.0)
    assert sphere_weight(2) == pytest.approx(math.pi / 4)
    assert sphere_weight(3) == pytest.approx(2.0 / 3.0)


def test_bounds_at_time_zero():
    model = PiperModel()
    assert tv_bound(model, 0.0, 2.0, 1.2) == pytest.approx(2.0)
    assert agent_norm_bound(1.5, 7.0, 0.0) == pytest.approx(1.5)
    assert tv_growth_rate(model) == pytest.approx(5 * 9.0 * math.sqrt(2.0), rel=1e-6)


def test_bounds_grow_with_time():
    model = DogsModel()
    assert tv_bound(model, 0.1, 1.0, 0.7) < tv_bound(model, 0.2, 1.0, 0.7)
    assert math.isinf(agent_norm_bound(1.0, 1e6, 1e3))


def test_tv_bound_unavailable_without_constants():
    assert tv_bound(DriftModel(), 0.5, 1.0, 0.0) is None


def test_support_growth_bound():
    grid = GridSpec(x0=0, y0=0, nx=10, ny=10, dx=0.3, dy=0.4)
    assert support_growth_bound(1.0, 4, grid) == pytest.approx(1.0 + 4 * 0.5 + 1.2)


def test_report_summaries():
    report = DiagnosticsReport(
        scenario="piper", rho_max=1.0, initial_mass=2.0, initial_tv=1.0, initial_support_radius=1.0,
        support_threshold=1e-10, component_threshold=0.01,
        steps=[
            StepRecord(step=0, time=0.0, min=0.0, max=1.0, mass=2.0),
            StepRecord(step=1, time=0.1, min=-1e-3, max=1.01, mass=2.002, clipped_mass=1e-9),
        ],
    )
    assert report.min_density == -1e-3
    assert report.max_density == 1.01
    assert report.mass_drift == pytest.approx(1e-3)
    assert report.clipped_mass == pytest.approx(1e-9)


@pytest.fixture(scope="module")
def short_piper_run():
    model = PiperModel()
    grid = GridSpec.from_extent(-2.0, 2.0, -2.0, 2.0, nx=80, ny=80)
    return model, run(model, grid, SolverConfig(), 0.3, [0.0, 0.1, 0.3])


def test_checks_pass_on_a_short_run(short_piper_run):
    model, trajectory = short_piper_run
    findings = {f.check: f for f in check_run(trajectory, model)}
    assert set(findings) >= {"finite", "range", "mass", "tv_bound", "support", "agent_bound"}
    assert all(f.passed for f in findings.values()), findings


def test_snapshot_records(short_piper_run):
    _, trajectory = short_piper_run
    records = trajectory.diagnostics.snapshots
    assert [r.time for r in records] == [0.0, 0.1, 0.3]
    assert records[0].components == 1
    assert records[0].watched_mass == pytest.approx(0.25)
    assert records[-1].watched_mass < records[0].watched_mass
    assert all(r.tv_bound is not None for r in records)


def test_support_overshoot(short_piper_run):
    model, trajectory = short_piper_run
    overshoot = support_overshoot(trajectory, model)
    assert [t for t, _ in overshoot] == [0.0, 0.1, 0.3]
    assert overshoot[0][1] == 0.0
    assert all(cells >= 0 for _, cells in overshoot)


def test_violated_range_is_reported(piper_grid):
    model = PiperModel()
    unstable = SolverConfig(cfl_factor=1.8, enforce_cfl=False)
    trajectory = run(model, piper_grid, unstable, 0.3, [0.3])
    findings = {f.check: f for f in check_run(trajectory, model)}
    assert not findings["range"].passed


def test_stability_table_flags():
    table = StabilityTable(scenario="piper", t_end=0.1)
    assert table.passed
    table.flags.append("l1 drift not monotone")
    assert not table.passed


def test_stability_report(piper_grid):
    table = stability_report(PiperModel(), piper_grid, SolverConfig(), 0.05, [0.0, 0.02, 0.01])
    assert [r.delta for r in table.rows] == [0.0, 0.02, 0.01]
    assert table.rows[0].l1_drift == 0.0
    assert table.rows[1].l1_ratio == pytest.approx(0.25, rel=0.05)
    assert table.passed


def test_stability_report_rejects_large_deltas(piper_grid):
    with pytest.raises(ValueError):
        stability_report(PiperModel(), piper_grid, SolverConfig(), 0.05, [0.5])


def test_refinement_study_shape():
    rows = refinement_study(PiperModel(), (-2.0, 2.0, -2.0, 2.0), [40, 80], 0.05, SolverConfig())
    assert [cells for cells, _ in rows] == [40, 80]
    assert all(overshoot >= 0 for _, overshoot in rows)
