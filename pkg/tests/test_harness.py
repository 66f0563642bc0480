import numpy as np
import pytest

from taylorvi import harness as H
from taylorvi.harness import ConfigError, RunSpec


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(method="rk4"),
        dict(method="tvi", h=0.0),
        dict(method="tvi", h=-0.1),
        dict(method="tvi", steps=0),
        dict(method="tvi", tol=0.0),
        dict(method="sym_tvi", quadrature="rect_left"),
        dict(method="sym_tvi", r=0),
        dict(method="taylor", r=0),
        dict(method="tvi", quadrature="boole"),
    ],
)
def test_runspec_validation(kwargs):
    with pytest.raises(ConfigError):
        RunSpec("pendulum", **kwargs)


def test_unknown_problem():
    with pytest.raises(ConfigError):
        RunSpec("lorenz", "tvi")


@pytest.mark.parametrize("method", H.METHODS)
def test_free_particle_conserves_energy_exactly(method):
    traj = H.run_trajectory(RunSpec("free_particle", method, steps=20))
    assert traj.ok
    assert np.max(np.abs(traj.energy_error)) <= 1e-13


def test_trajectory_columns_and_time(tmp_path):
    out = tmp_path / "run.csv"
    traj = H.run_trajectory(RunSpec("kepler2d", "tvi", r=1, steps=5, out=str(out)))
    header, rows, _ = H.read_csv(out)
    assert header == ["step", "t", "q0", "q1", "p0", "p1", "energy", "energy_error", "newton_iters", "residual"]
    assert len(rows) == 6
    for k, row in enumerate(rows):
        assert int(row[0]) == k and float(row[1]) == k * 0.25
    assert float(rows[0][7]) == 0.0
    assert np.allclose([float(r[7]) for r in rows], traj.energy_error, rtol=0, atol=0)
    assert traj.summary["newton_iters"] == sum(int(r[8]) for r in rows)


def test_csv_is_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        H.run_trajectory(RunSpec("henon_heiles", "sym_tvi", r=3, quadrature="gauss2", steps=10, seed=7, out=str(path)))
    assert a.read_bytes() == b.read_bytes()


def test_seed_changes_henon_heiles_initial_state():
    a = RunSpec("henon_heiles", "tvi", seed=1).instance()
    b = RunSpec("henon_heiles", "tvi", seed=2).instance()
    assert not np.allclose(a.p0, b.p0)
    assert a.energy0 == pytest.approx(1 / 12) and b.energy0 == pytest.approx(1 / 12)


def test_failure_truncates_and_reports_step():
    # the fourth-order Taylor method blows up on Kepler at this step size
    traj = H.run_trajectory(RunSpec("kepler2d", "tvi", r=3, quadrature="gauss2", h=2.0, steps=50, tol=1e-14))
    assert not traj.ok
    assert traj.failed_step is not None and len(traj.energy) == traj.failed_step
    assert traj.summary["failed_step"] == traj.failed_step


def test_energy_drift_detects_trend():
    spec = RunSpec("pendulum", "euler_a", steps=10)
    traj = H.run_trajectory(spec)
    traj.energy = np.linspace(0.0, 1.0, 11) + traj.energy[0]
    slope, lo, hi = H.energy_drift(traj)
    assert slope == pytest.approx(1.0) and lo > 0


def test_convergence_study_and_csv(tmp_path):
    (res,) = H.convergence_study("harmonic", [RunSpec("harmonic", "stormer_verlet")], [0.2, 0.1, 0.05], T=1.0)
    assert abs(res.slope - 2) < 0.2
    path = tmp_path / "conv.csv"
    H.write_convergence_csv(res, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "h,global_error" and lines[-1].startswith("# slope=")
    assert float(lines[-1].split("=")[1]) == pytest.approx(res.slope)


def test_convergence_study_rejects_bad_grid():
    with pytest.raises(ConfigError):
        H.convergence_study("harmonic", [RunSpec("harmonic", "euler_a")], [0.3], T=1.0)


def test_euler_a_first_order_on_pendulum():
    (res,) = H.convergence_study("pendulum", [RunSpec("pendulum", "euler_a")], [0.2, 0.1, 0.05, 0.025], T=1.0)
    assert abs(res.slope - 1) <= 0.2


def test_compare_records_failures_inline(tmp_path):
    specs = [
        RunSpec("kepler2d", "stormer_verlet", h=0.25, steps=8),
        RunSpec("kepler2d", "tvi", r=3, quadrature="gauss2", h=2.0, steps=50, tol=1e-14),
        RunSpec("kepler2d", "taylor", r=4, h=0.25, steps=8),
    ]
    rows, trajs = H.compare("kepler2d", specs, reference=True, workers=2)
    assert [r["status"] for r in rows] == ["ok", "failed", "ok"]
    assert np.isfinite(rows[0]["global_error"]) and np.isfinite(rows[2]["global_error"])
    path = tmp_path / "cmp.csv"
    H.write_comparison_csv(rows, path)
    header, body, _ = H.read_csv(path)
    assert header[:5] == ["method", "h", "mean_energy_error", "max_energy_error", "global_error"]
    assert len(body) == 3


def test_sym_tvi_iteration_economy():
    traj = H.run_trajectory(RunSpec("pendulum", "sym_tvi", r=3, quadrature="gauss2", h=0.1, steps=200))
    assert np.mean(traj.newton_iters[1:]) <= 2.0
