"""Experiment harness: trajectory runs, convergence studies and method comparisons.

Everything here is plain plumbing around the step maps.  A :class:`RunSpec`
names a problem, a method and its settings; :func:`run_trajectory` steps it
and records one row per step, :func:`convergence_study` measures global
error against a fine high-order Taylor reference, and :func:`compare` runs
several specs on one problem side by side.
"""
from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from . import baselines, hamiltonian, symmetric
from .lagrangian import StepError, TviConfig, step as tvi_step
from .problems import PROBLEMS, ProblemInstance, make_problem
from .quadrature import QuadratureConfigError, make_rule
from .solver import JacobianCache, NewtonConfig, NonConvergenceError, SingularJacobianError

__all__ = [
    "METHODS",
    "ConfigError",
    "ReferenceRunError",
    "RunSpec",
    "Trajectory",
    "ConvergenceResult",
    "run_trajectory",
    "reference_solution",
    "convergence_study",
    "compare",
    "energy_drift",
    "write_trajectory_csv",
    "write_convergence_csv",
    "write_comparison_csv",
    "read_csv",
]

METHODS = (
    "tvi",
    "htvi_plus",
    "htvi_minus",
    "svhd",
    "sym_tvi",
    "taylor",
    "euler_a",
    "euler_b",
    "stormer_verlet",
)
_CLOSED_FORM = {"euler_a", "euler_b", "stormer_verlet"}

# per-method order and rule used when a spec leaves them out
DEFAULT_ORDER = {"tvi": 1, "htvi_plus": 1, "htvi_minus": 1, "svhd": 0, "sym_tvi": 1, "taylor": 4}
DEFAULT_RULE = "trapezoid"


class ConfigError(ValueError):
    """Invalid run configuration (bad method, rule, step size or problem)."""


class ReferenceRunError(RuntimeError):
    """The reference run of a convergence study did not finish."""


@dataclass(frozen=True)
class RunSpec:
    """One configured run.

    ``h`` and ``steps`` default to the problem's step size and horizon.
    ``seed`` randomises initial conditions where the problem has a free
    parameter (the Henon-Heiles momentum split); other problems ignore it.
    ``reuse_jacobian`` switches the implicit methods to simplified Newton.
    """

    problem: str
    method: str
    r: Optional[int] = None
    quadrature: Optional[str] = None
    h: Optional[float] = None
    steps: Optional[int] = None
    tol: float = 1e-12
    out: Optional[str] = None
    seed: Optional[int] = None
    reuse_jacobian: bool = False

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise ConfigError(f"unknown problem {self.problem!r}; choose from {sorted(PROBLEMS)}")
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; choose from {list(METHODS)}")
        if self.h is not None and not (math.isfinite(self.h) and self.h > 0):
            raise ConfigError("h must be positive")
        if self.steps is not None and self.steps < 1:
            raise ConfigError("steps must be at least 1")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        r = self.order
        if r < 0:
            raise ConfigError("order must be non-negative")
        if self.method == "taylor" and r < 1:
            raise ConfigError("the Taylor method needs order >= 1")
        if self.method == "sym_tvi" and r < 1:
            raise ConfigError("sym_tvi needs order >= 1")
        try:
            rule = make_rule(self.rule_name)
        except QuadratureConfigError as exc:
            raise ConfigError(str(exc)) from exc
        if self.method == "sym_tvi" and not rule.symmetric:
            raise ConfigError(f"sym_tvi needs a symmetric quadrature rule, got {rule.name}")

    @property
    def order(self) -> int:
        return DEFAULT_ORDER.get(self.method, 0) if self.r is None else int(self.r)

    @property
    def rule_name(self) -> str:
        return DEFAULT_RULE if self.quadrature is None else self.quadrature

    @property
    def label(self) -> str:
        if self.method in _CLOSED_FORM:
            return self.method
        if self.method == "taylor":
            return f"taylor_r{self.order}"
        return f"{self.method}_r{self.order}_{make_rule(self.rule_name).name}"

    def instance(self) -> ProblemInstance:
        if self.problem == "henon_heiles" and self.seed is not None:
            rng = np.random.default_rng(self.seed)
            H0 = 1.0 / 12.0
            p2 = float(rng.uniform(-0.5, 0.5) * math.sqrt(2.0 * H0))
            return make_problem(self.problem, H0=H0, p2=p2)
        return make_problem(self.problem)

    def resolved(self, inst: Optional[ProblemInstance] = None):
        """``(h, steps)`` with problem defaults filled in."""
        inst = self.instance() if inst is None else inst
        h = inst.h if self.h is None else float(self.h)
        steps = self.steps if self.steps is not None else max(1, int(round(inst.horizon / h)))
        return h, steps


def make_stepper(spec: RunSpec, system) -> Callable:
    """``stepper(q, p, h) -> (q1, p1, newton_iters, residual)`` for ``spec``."""
    m, r = spec.method, spec.order
    if m in _CLOSED_FORM:
        def stepper(q, p, h):
            q1, p1 = baselines.closed_form_step(system, q, p, h, m)
            return q1, p1, 0, 0.0
        return stepper
    if m == "taylor":
        def stepper(q, p, h):
            q1, p1 = baselines.taylor_phase_step(system, q, p, h, r)
            return q1, p1, 0, 0.0
        return stepper

    cfg = TviConfig(r, make_rule(spec.rule_name), NewtonConfig(tol=spec.tol))
    fn = {
        "tvi": tvi_step,
        "htvi_plus": hamiltonian.step_right,
        "htvi_minus": hamiltonian.step_left,
        "sym_tvi": symmetric.step_sym,
    }.get(m)
    if m == "svhd":
        cache = (JacobianCache(), JacobianCache()) if spec.reuse_jacobian else None

        def stepper(q, p, h):
            q1, p1, rep = hamiltonian.step_svhd(system, q, p, h, cfg, cache)
            return q1, p1, rep.iterations, rep.final_residual
        return stepper

    cache = JacobianCache() if spec.reuse_jacobian else None

    def stepper(q, p, h):
        q1, p1, rep = fn(system, q, p, h, cfg, cache)
        return q1, p1, rep.iterations, rep.final_residual
    return stepper


@dataclass
class Trajectory:
    """Per-step record of a run; row ``k`` is the state after ``k`` steps."""

    spec: RunSpec
    h: float
    q: np.ndarray
    p: np.ndarray
    energy: np.ndarray
    newton_iters: np.ndarray
    residual: np.ndarray
    wall_time: float = 0.0
    status: str = "ok"
    failed_step: Optional[int] = None
    message: str = ""

    @property
    def steps(self) -> np.ndarray:
        return np.arange(len(self.energy))

    @property
    def t(self) -> np.ndarray:
        return self.steps * self.h

    @property
    def energy_error(self) -> np.ndarray:
        return self.energy - self.energy[0]

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    @property
    def summary(self) -> dict:
        err = np.abs(self.energy_error)
        return {
            "method": self.spec.label,
            "h": self.h,
            "steps": len(self.energy) - 1,
            "mean_abs_energy_error": float(np.mean(err)),
            "max_abs_energy_error": float(np.max(err)),
            "wall_time": self.wall_time,
            "newton_iters": int(np.sum(self.newton_iters)),
            "status": self.status,
            "failed_step": self.failed_step,
        }

    def final_state(self):
        return self.q[-1], self.p[-1]


_STEP_FAILURES = (StepError, NonConvergenceError, SingularJacobianError, np.linalg.LinAlgError, FloatingPointError)


def run_trajectory(spec: RunSpec, instance: Optional[ProblemInstance] = None) -> Trajectory:
    """Step ``spec`` and record the trajectory.

    A failed step stops the run: the trajectory is truncated after the last
    good state, ``status`` becomes ``"failed"`` (or ``"diverged"`` for a
    non-finite state) and ``failed_step`` holds the index of the step that
    could not be taken.  The wall time covers the stepping loop only.
    """
    inst = spec.instance() if instance is None else instance
    system = inst.system
    h, n_steps = spec.resolved(inst)
    stepper = make_stepper(spec, system)
    n = system.dim
    q = np.empty((n_steps + 1, n))
    p = np.empty((n_steps + 1, n))
    iters = np.zeros(n_steps + 1, dtype=int)
    res = np.zeros(n_steps + 1)
    q[0], p[0] = inst.q0, inst.p0
    status, failed, message = "ok", None, ""
    done = n_steps
    t0 = time.perf_counter()
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(n_steps):
            try:
                q1, p1, it, rn = stepper(q[k], p[k], h)
            except _STEP_FAILURES as exc:
                status, failed, message, done = "failed", k + 1, str(exc), k
                break
            if not (np.all(np.isfinite(q1)) and np.all(np.isfinite(p1))):
                status, failed, message, done = "diverged", k + 1, "non-finite state", k
                break
            q[k + 1], p[k + 1], iters[k + 1], res[k + 1] = q1, p1, it, rn
    wall = time.perf_counter() - t0
    q, p = q[: done + 1], p[: done + 1]
    energy = np.asarray(system.energy(q, p), dtype=float)
    traj = Trajectory(spec, h, q, p, energy, iters[: done + 1], res[: done + 1], wall, status, failed, message)
    if spec.out:
        write_trajectory_csv(traj, spec.out)
    return traj


def energy_drift(traj: Trajectory, z: float = 1.96):
    """Least-squares slope of ``|energy_error|`` against ``t``.

    Returns ``(slope, lower, upper)`` with a two-sided normal-approximation
    confidence interval at quantile ``z`` (1.96 for 95%).
    """
    t = traj.t
    y = np.abs(traj.energy_error)
    if len(t) < 3:
        raise ValueError("need at least three rows for a trend")
    A = np.vstack([t, np.ones_like(t)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    s2 = resid @ resid / (len(t) - 2)
    se = math.sqrt(s2 / np.sum((t - t.mean()) ** 2))
    return float(coef[0]), float(coef[0] - z * se), float(coef[0] + z * se)


# ---------------------------------------------------------------------------
# convergence


@dataclass
class ConvergenceResult:
    spec: RunSpec
    h: np.ndarray
    error: np.ndarray
    slope: float
    failures: dict = field(default_factory=dict)


def reference_solution(problem: str, T: float, h_ref: float, ref_order: int = 8, seed: Optional[int] = None):
    """Final state of a Taylor run of order ``ref_order`` with step ``h_ref``."""
    steps = int(round(T / h_ref))
    if steps < 1 or abs(steps * h_ref - T) > 1e-9 * max(1.0, T):
        raise ConfigError(f"horizon {T} is not a multiple of the reference step {h_ref}")
    spec = RunSpec(problem, "taylor", r=ref_order, h=h_ref, steps=steps, seed=seed)
    traj = run_trajectory(spec)
    if not traj.ok:
        raise ReferenceRunError(f"reference run failed at step {traj.failed_step}: {traj.message}")
    return traj.final_state()


def _slope(h, err):
    h, err = np.asarray(h, float), np.asarray(err, float)
    keep = np.isfinite(err) & (err > 0)
    if keep.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(h[keep]), np.log(err[keep]), 1)[0])


def convergence_study(
    problem: str,
    specs: Sequence[RunSpec],
    hs: Sequence[float],
    T: float = 1.0,
    ref_order: int = 8,
    ref_refine: int = 20,
    seed: Optional[int] = None,
) -> list:
    """Global error at time ``T`` for each spec and step size.

    The reference is a Taylor run of order ``ref_order`` at step
    ``min(hs) / ref_refine``; the error is the phase-space max-norm at ``T``
    and the slope is the least-squares fit of ``log error`` on ``log h``.
    Failed runs get a NaN error and are left out of the fit.
    """
    hs = np.asarray(sorted(hs, reverse=True), dtype=float)
    if ref_refine < 20:
        raise ConfigError("the reference step must be at most min(h)/20")
    for h in hs:
        if abs(round(T / h) * h - T) > 1e-9 * max(1.0, T):
            raise ConfigError(f"T={T} is not a multiple of h={h}")
    q_ref, p_ref = reference_solution(problem, T, hs.min() / ref_refine, ref_order, seed)
    out = []
    for base in specs:
        errs, failures = [], {}
        for h in hs:
            spec = replace(base, problem=problem, h=float(h), steps=int(round(T / h)), seed=seed)
            traj = run_trajectory(spec)
            if not traj.ok:
                failures[float(h)] = traj.message
                errs.append(float("nan"))
                continue
            q, p = traj.final_state()
            errs.append(float(max(np.max(np.abs(q - q_ref)), np.max(np.abs(p - p_ref)))))
        errs = np.array(errs)
        out.append(ConvergenceResult(base, hs, errs, _slope(hs, errs), failures))
    return out


# ---------------------------------------------------------------------------
# comparison

COMPARE_COLUMNS = (
    "method",
    "h",
    "mean_energy_error",
    "max_energy_error",
    "global_error",
    "wall_time",
    "newton_iters",
    "status",
    "message",
)


def compare(problem: str, specs: Sequence[RunSpec], reference: bool = False, ref_order: int = 8, workers: int = 1):
    """Run every spec on ``problem`` and tabulate one row per spec.

    A spec that fails keeps its row with the failure in ``status`` and
    ``message``; the other rows are unaffected.  With ``reference`` the
    global error at the final time is measured against a Taylor run of
    order ``ref_order`` at a twentieth of each step size.  Runs are
    independent and may use ``workers`` threads.
    """
    specs = [replace(s, problem=problem) for s in specs]

    def one(spec):
        row = dict.fromkeys(COMPARE_COLUMNS, "")
        row["method"] = spec.label
        try:
            traj = run_trajectory(spec)
        except (ConfigError, ValueError) as exc:
            row.update(status="error", message=str(exc))
            return row, None
        s = traj.summary
        row.update(
            h=traj.h,
            mean_energy_error=s["mean_abs_energy_error"],
            max_energy_error=s["max_abs_energy_error"],
            wall_time=s["wall_time"],
            newton_iters=s["newton_iters"],
            status=traj.status,
            message=traj.message,
            global_error=float("nan"),
        )
        if reference and traj.ok:
            T = traj.t[-1]
            try:
                q_ref, p_ref = reference_solution(problem, T, traj.h / 20, ref_order, spec.seed)
                q, p = traj.final_state()
                row["global_error"] = float(max(np.max(np.abs(q - q_ref)), np.max(np.abs(p - p_ref))))
            except ReferenceRunError as exc:
                row["message"] = f"reference failed: {exc}"
        return row, traj

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(one, specs))
    else:
        results = [one(s) for s in specs]
    return [r for r, _ in results], [t for _, t in results]


# ---------------------------------------------------------------------------
# CSV


def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % x
    return str(x)


def trajectory_header(n: int):
    return (
        ["step", "t"]
        + [f"q{i}" for i in range(n)]
        + [f"p{i}" for i in range(n)]
        + ["energy", "energy_error", "newton_iters", "residual"]
    )


def write_trajectory_csv(traj: Trajectory, path):
    n = traj.q.shape[1]
    err = traj.energy_error
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(trajectory_header(n))
        for k in range(len(traj.energy)):
            row = [k, k * traj.h, *traj.q[k], *traj.p[k], traj.energy[k], err[k], traj.newton_iters[k], traj.residual[k]]
            w.writerow([_fmt(x) for x in row])


def write_convergence_csv(result: ConvergenceResult, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["h", "global_error"])
        for h, e in zip(result.h, result.error):
            w.writerow([_fmt(float(h)), _fmt(float(e))])
        fh.write(f"# slope={_fmt(result.slope)}\n")


def write_comparison_csv(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COMPARE_COLUMNS)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in COMPARE_COLUMNS])


def read_csv(path):
    """``(header, rows, comments)`` of a harness CSV; comment lines start with ``#``."""
    with open(path, newline="") as fh:
        text = fh.read()
    lines = text.splitlines()
    comments = [ln for ln in lines if ln.startswith("#")]
    body = [ln for ln in lines if ln and not ln.startswith("#")]
    reader = csv.reader(io.StringIO("\n".join(body)))
    rows = list(reader)
    if not rows:
        return [], [], comments
    return rows[0], rows[1:], comments
