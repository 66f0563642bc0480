"""Damped Newton iteration for the implicit step equations."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

__all__ = [
    "NewtonConfig",
    "SolveReport",
    "NonConvergenceError",
    "SingularJacobianError",
    "newton_solve",
    "complex_step_jacobian",
    "finite_difference_jacobian",
    "JacobianCache",
]


@dataclass(frozen=True)
class NewtonConfig:
    tol: float = 1e-12
    max_iters: int = 50
    damping: float = 0.5
    max_halvings: int = 20

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not 0 < self.damping < 1:
            raise ValueError("damping must lie in (0, 1)")

    def with_tol(self, tol):
        return replace(self, tol=tol)


@dataclass
class SolveReport:
    iterations: int
    final_residual: float
    converged: bool
    jacobian: str = "analytic"


class NonConvergenceError(RuntimeError):
    """Newton failed to reach the tolerance; carries the best iterate."""

    def __init__(self, message, x=None, report=None):
        super().__init__(message)
        self.x = x
        self.report = report


class SingularJacobianError(np.linalg.LinAlgError):
    pass


@dataclass
class JacobianCache:
    """Holds the last Jacobian so consecutive solves can reuse it.

    A reused Jacobian is kept while each update shrinks the residual by at
    least ``contraction``; otherwise it is recomputed at the current iterate.
    """

    contraction: float = 0.25
    matrix: Optional[np.ndarray] = None
    evaluations: int = 0


def _norm(r):
    return float(np.max(np.abs(r))) if np.size(r) else 0.0


def complex_step_jacobian(residual: Callable, step: float = 1e-30) -> Callable:
    """Jacobian of a real-analytic, batch-aware residual by the complex step.

    ``residual`` must accept an array of shape ``(..., m)``; all ``m``
    perturbed points are evaluated in one batched call.
    """

    def jac(x):
        x = np.asarray(x, dtype=float)
        m = x.shape[-1]
        pts = x + 1j * step * np.eye(m)
        return np.imag(residual(pts)).T / step

    jac.kind = "complex-step"
    return jac


def finite_difference_jacobian(residual: Callable, eps: float = 1e-7) -> Callable:
    """Central-difference fallback; reports flag its use."""

    def jac(x):
        x = np.asarray(x, dtype=float)
        m = x.shape[-1]
        h = eps * np.maximum(1.0, np.abs(x))
        pts = np.concatenate([x + np.diag(h), x - np.diag(h)])
        vals = np.asarray(residual(pts), dtype=float)
        return ((vals[:m] - vals[m:]) / (2 * h[:, None])).T

    jac.kind = "finite-difference"
    return jac


def _trial(residual, x):
    try:
        r = np.asarray(residual(x))
    except (ValueError, ZeroDivisionError, FloatingPointError):
        return None
    return r if np.all(np.isfinite(r)) else None


def newton_solve(
    residual: Callable,
    jacobian: Optional[Callable],
    x0,
    cfg: NewtonConfig = NewtonConfig(),
    cache: Optional[JacobianCache] = None,
):
    """Solve ``residual(x) = 0`` starting from ``x0``.

    Returns ``(x, SolveReport)``.  Steps are damped with the natural
    monotonicity test: a trial point is accepted when the Newton correction
    it would produce under the current Jacobian is shorter than the one just
    taken.  That test is insensitive to how the residual components are
    scaled, which matters when positions and momenta differ by many orders
    of magnitude.  Raises :class:`NonConvergenceError` after ``max_iters``
    and :class:`SingularJacobianError` if the linear solve fails.  With a
    ``cache`` the previous Jacobian is reused (simplified Newton) while its
    corrections shrink by at least ``cache.contraction``.
    """
    if jacobian is None:
        jacobian = finite_difference_jacobian(residual)
    kind = getattr(jacobian, "kind", "analytic")
    x = np.array(x0, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("initial guess must be finite")
    r = np.asarray(residual(x))
    nr = _norm(r)
    it = 0
    stale = cache is not None and cache.matrix is not None
    while nr > cfg.tol:
        if it >= cfg.max_iters:
            rep = SolveReport(it, nr, False, kind)
            raise NonConvergenceError(f"Newton stalled at residual {nr:.3e} after {it} iterations", x, rep)
        if stale:
            J = cache.matrix
        else:
            J = np.atleast_2d(jacobian(x))
            if cache is not None:
                cache.matrix = J
                cache.evaluations += 1
        try:
            dx = np.linalg.solve(J, -np.atleast_1d(r)).reshape(x.shape)
        except np.linalg.LinAlgError as exc:
            if stale:
                stale = False
                continue
            raise SingularJacobianError(str(exc)) from exc
        if not np.all(np.isfinite(dx)):
            if stale:
                stale = False
                continue
            raise SingularJacobianError("non-finite Newton step")
        ndx = _norm(dx)
        if stale:
            # chord step: keep the old Jacobian only while it contracts
            r_new = _trial(residual, x + dx)
            if r_new is not None:
                nbar = _norm(np.linalg.solve(J, -np.atleast_1d(r_new)))
                if nbar <= cache.contraction * ndx or _norm(r_new) <= cfg.tol:
                    x, r, nr = x + dx, r_new, _norm(r_new)
                    it += 1
                    continue
            stale = False
            continue
        alpha = 1.0
        for _ in range(cfg.max_halvings + 1):
            x_new = x + alpha * dx
            r_new = _trial(residual, x_new)
            if r_new is not None:
                nr_new = _norm(r_new)
                if nr_new <= cfg.tol:
                    break
                nbar = _norm(np.linalg.solve(J, -np.atleast_1d(r_new)))
                if nbar < (1.0 - 0.5 * alpha) * ndx or (nbar <= ndx and nr_new <= nr):
                    break
            alpha *= cfg.damping
        else:
            if r_new is None:
                rep = SolveReport(it + 1, nr, False, kind)
                raise NonConvergenceError("line search left the domain of the residual", x, rep)
            nr_new = _norm(r_new)
        x, r, nr = x_new, r_new, nr_new
        it += 1
        stale = cache is not None
    return x, SolveReport(it, nr, True, kind if cache is None else kind + " (reused)")
