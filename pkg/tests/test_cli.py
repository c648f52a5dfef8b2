from main import EXIT_ABORT, EXIT_CONFIG, EXIT_DIAGNOSTIC, EXIT_OK, main

SMALL_PIPER = """\
scenario = piper
grid.nx = 60
grid.ny = 60
t_end = 0.1
snapshot_times = 0, 0.05, 0.1
output.formats = csv, pgm
"""


def test_missing_config_file(tmp_path):
    assert main(["simulate", "--config", str(tmp_path / "missing.cfg")]) == EXIT_CONFIG


def test_bad_config(write_config):
    path = write_config("scenario = piper\nwhatever = 3\n")
    assert main(["simulate", "--config", str(path)]) == EXIT_CONFIG


def test_unknown_command():
    assert main(["explode"]) == EXIT_CONFIG


def test_simulate_writes_outputs(write_config, tmp_path):
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(write_config(SMALL_PIPER)), "--out", str(out)]) == EXIT_OK
    for name in ("rho_t000.csv", "rho_t001.csv", "rho_t002.csv", "rho_t002.pgm", "agents.csv", "report.txt"):
        assert (out / name).exists(), name
    report = (out / "report.txt").read_text()
    assert "check.mass = pass" in report
    assert (out / "rho_t002.csv").read_text().startswith("# t=0.1 nx=60 ny=60")


def test_simulate_twice_rewrites_trajectory(write_config, tmp_path):
    out = tmp_path / "out"
    config = str(write_config(SMALL_PIPER))
    main(["simulate", "--config", config, "--out", str(out)])
    first = (out / "agents.csv").read_text()
    main(["simulate", "--config", config, "--out", str(out)])
    assert (out / "agents.csv").read_text() == first


def test_domain_too_small_is_a_runtime_abort(write_config, tmp_path):
    path = write_config("scenario = piper\ngrid.nx = 40\ngrid.ny = 40\nt_end = 0.1\npiper.initial = rectangle -1.95 0 0.35 0.85\n")
    assert main(["simulate", "--config", str(path), "--out", str(tmp_path)]) == EXIT_ABORT


def test_diagnose_passes_on_a_stable_run(write_config, tmp_path):
    out = tmp_path / "diag"
    path = write_config(SMALL_PIPER.replace("t_end = 0.1", "t_end = 0.05").replace("0, 0.05, 0.1", "0, 0.05"))
    assert main(["diagnose", "--config", str(path), "--out", str(out), "--deltas", "0.02,0.01"]) == EXIT_OK
    assert (out / "stability.csv").exists()
    assert "stability = pass" in (out / "report.txt").read_text()


def test_diagnose_fails_with_cfl_violated(write_config, tmp_path):
    path = write_config(
        "scenario = piper\ngrid.nx = 80\ngrid.ny = 80\nt_end = 0.3\n"
        "solver.cfl_factor = 1.8\nsolver.enforce_cfl = false\n"
    )
    assert main(["diagnose", "--config", str(path), "--out", str(tmp_path / "d")]) == EXIT_DIAGNOSTIC


def test_optimize_needs_piper(write_config, tmp_path):
    path = write_config("scenario = prey\n")
    assert main(["optimize", "--config", str(path), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_optimize_writes_route(write_config, tmp_path):
    out = tmp_path / "opt"
    path = write_config(
        "scenario = piper\ngrid.nx = 60\ngrid.ny = 60\nt_end = 0.2\n"
        "optimizer.budget = 5\noptimizer.nodes = 3\noptimizer.restarts = 0\noptimizer.cells = 40\n"
    )
    assert main(["optimize", "--config", str(path), "--out", str(out)]) == EXIT_OK
    assert (out / "route.csv").read_text().startswith("# start=")
    assert len((out / "history.csv").read_text().splitlines()) <= 6
    report = (out / "optimize.txt").read_text()
    assert "full_resolution_value = " in report
    assert "coarse_cells = 40" in report
