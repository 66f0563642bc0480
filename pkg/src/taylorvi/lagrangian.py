"""Lagrangian Taylor variational integrator.

Given boundary positions ``(q0, q1)`` the initial velocity ``v~0`` is the
solution of the shooting problem

    q1 = X(q0, v~0; h) = sum_{k=0}^{r+1} Q_k(q0, v~0) h^k,

quadrature nodes are read off the order-``r`` Taylor map started at
``(q0, v~0)`` and the discrete Lagrangian is

    L_d(q0, q1; h) = h sum_i b_i L(q(c_i h), v(c_i h)).

Derivatives of ``L_d`` follow from implicit differentiation of the shooting
problem.  Write ``G(q0, q1, v)`` for the quadrature sum with ``v`` left
free; with ``lam = X_v^{-T} G_v``

    D1 L_d = G_q0 - X_q^T lam,        D2 L_d = G_q1 + lam.

The step map solves ``p0 = -D1 L_d(q0, q1)`` jointly with the shooting
problem for the unknowns ``(q1, v~0)`` and sets ``p1 = D2 L_d(q0, q1)``.

Every internal routine broadcasts over leading batch axes and accepts
complex input, which is how the Newton Jacobians are formed (complex step
through the analytic residual).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import jets
from .quadrature import QuadratureRule, make_rule
from .solver import (
    JacobianCache,
    NewtonConfig,
    NonConvergenceError,
    SingularJacobianError,
    SolveReport,
    complex_step_jacobian,
    newton_solve,
)

__all__ = [
    "TviConfig",
    "BoundaryVelocity",
    "StepError",
    "solve_initial_velocity",
    "nodal_states",
    "discrete_lagrangian",
    "d1_Ld",
    "d2_Ld",
    "step",
]


class StepError(RuntimeError):
    """A step failed; wraps the underlying solver error."""

    def __init__(self, message, report: Optional[SolveReport] = None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class TviConfig:
    """Taylor order ``r`` (position order), quadrature rule and Newton settings."""

    r: int
    rule: QuadratureRule = field(default_factory=lambda: make_rule("trapezoid"))
    newton: NewtonConfig = field(default_factory=NewtonConfig)

    def __post_init__(self):
        if isinstance(self.rule, str):
            object.__setattr__(self, "rule", make_rule(self.rule))
        if int(self.r) != self.r or self.r < 0:
            raise ValueError("Taylor order r must be a non-negative integer")
        if self.rule.order < 1:
            raise ValueError("quadrature rule must have order at least 1")


@dataclass
class BoundaryVelocity:
    v_tilde0: np.ndarray
    dv_dq0: np.ndarray
    dv_dq1: np.ndarray
    coeffs: jets.TaylorCoeffs
    report: Optional[SolveReport] = None


def _check_h(h):
    if h == 0:
        raise ValueError("step size must be non-zero")


# ---------------------------------------------------------------------------
# polynomial weights


def _power_weights(t, K, pos_order, vel_order):
    """Weights turning coefficients ``Q_0..Q_K`` into position and velocity at ``t``.

    Position sums ``Q_k t^k`` for ``k <= pos_order``; velocity sums
    ``k Q_k t^(k-1)`` for ``1 <= k <= vel_order``.  ``t`` may be an array
    of node times; the result has shape ``t.shape + (K+1,)``.
    """
    t = np.asarray(t, dtype=float)
    k = np.arange(K + 1)
    tp = t[..., None] ** k
    wq = np.where(k <= pos_order, tp, 0.0)
    tm = np.concatenate([np.zeros(t.shape + (1,)), tp[..., :-1]], axis=-1)
    wv = np.where((k >= 1) & (k <= vel_order), k * tm, 0.0)
    return wq, wv


def _shoot(coeffs, h, order):
    """Position polynomial of degree ``order`` at ``h`` and its partials."""
    w = np.asarray(float(h)) ** np.arange(order + 1)
    K = coeffs.order
    w = np.concatenate([w, np.zeros(K - order)])
    X = coeffs.Q @ w
    Xq = np.einsum("...kij,k->...ij", coeffs.dQdq0, w)
    Xv = np.einsum("...kij,k->...ij", coeffs.dQdv0, w)
    return X, Xq, Xv


def _node_states(coeffs, c, h, r):
    """Nodal positions/velocities and their partials w.r.t. ``(q0, v0)``.

    Shapes: ``q, v`` are ``(..., m, n)``; partials ``(..., m, n, n)``.
    """
    wq, wv = _power_weights(np.asarray(c) * h, coeffs.order, r, r + 1)
    q = np.einsum("...nk,mk->...mn", coeffs.Q, wq)
    v = np.einsum("...nk,mk->...mn", coeffs.Q, wv)
    dq = (np.einsum("...kij,mk->...mij", coeffs.dQdq0, wq), np.einsum("...kij,mk->...mij", coeffs.dQdv0, wq))
    dv = (np.einsum("...kij,mk->...mij", coeffs.dQdq0, wv), np.einsum("...kij,mk->...mij", coeffs.dQdv0, wv))
    return q, v, dq, dv


def _lagrangian_terms(system, q, v):
    """``L``, ``dL/dq`` and ``dL/dv`` at a batch of states."""
    Mv = system.mass_apply(v)
    L = 0.5 * np.sum(v * Mv, axis=-1) - system.potential(q)
    return L, -system.grad_potential(q), Mv


def _weighted_pullback(b, h, A, g):
    """``h sum_m b_m A_m^T g_m`` for ``A`` of shape ``(..., m, n, k)``."""
    return h * np.einsum("m,...mij,...mi->...j", b, A, g)


def _action(system, q0, q1, v, h, r, rule):
    """Quadrature action ``G`` with its partials; ``v`` is not constrained.

    Returns ``G, G_q0, G_q1, G_v, X, X_q, X_v, coeffs``.  With ``q1=None``
    the end node sits at the shooting position ``X`` and ``G_q1`` is the
    partial with respect to that node position.
    """
    coeffs = jets.prolong(system, q0, v, r + 1, with_sensitivities=True)
    X, Xq, Xv = _shoot(coeffs, h, r + 1)
    if q1 is None:
        q1 = X
    c, b = rule.c, rule.b
    q, vn, (dq0, dqv), (dv0, dvv) = _node_states(coeffs, c, h, r)
    end = c == 1.0
    n = q0.shape[-1]
    dq1 = np.zeros(q.shape[:-1] + (n, n), dtype=q.dtype)
    if np.any(end):
        q = q.copy()
        q[..., end, :] = q1[..., None, :]
        dq0 = dq0.copy()
        dqv = dqv.copy()
        dq0[..., end, :, :] = 0.0
        dqv[..., end, :, :] = 0.0
        dq1[..., end, :, :] = np.eye(n)
    L, Lq, Lv = _lagrangian_terms(system, q, vn)
    G = h * np.einsum("m,...m->...", b, L)
    G_q0 = _weighted_pullback(b, h, dq0, Lq) + _weighted_pullback(b, h, dv0, Lv)
    G_v = _weighted_pullback(b, h, dqv, Lq) + _weighted_pullback(b, h, dvv, Lv)
    G_q1 = _weighted_pullback(b, h, dq1, Lq)
    return G, G_q0, G_q1, G_v, X, Xq, Xv, coeffs


def _velocity_at(coeffs, h, r):
    """Velocity polynomial (through ``q^(r+1)``) at ``h`` and its partials."""
    K = coeffs.order
    k = np.arange(K + 1)
    w = np.where((k >= 1) & (k <= r + 1), k * np.asarray(float(h)) ** np.maximum(k - 1, 0), 0.0)
    V = coeffs.Q @ w
    return V, np.einsum("...kij,k->...ij", coeffs.dQdq0, w), np.einsum("...kij,k->...ij", coeffs.dQdv0, w)


def _solve_T(A, g):
    """``A^{-T} g`` batched."""
    return np.linalg.solve(np.swapaxes(A, -1, -2), g[..., None])[..., 0]


def _gradients(system, q0, q1, v, h, r, rule):
    """``(L_d, D1, D2, X)`` with ``v`` free; exact derivatives once ``X = q1``."""
    G, G_q0, G_q1, G_v, X, Xq, Xv, _ = _action(system, q0, q1, v, h, r, rule)
    lam = _solve_T(Xv, G_v)
    D1 = G_q0 - np.einsum("...ij,...i->...j", Xq, lam)
    D2 = G_q1 + lam
    return G, D1, D2, X


# ---------------------------------------------------------------------------
# public operations


def solve_initial_velocity(system, q0, q1, h, cfg: TviConfig) -> BoundaryVelocity:
    """Solve the shooting problem ``X(q0, v~0; h) = q1`` for ``v~0``."""
    _check_h(h)
    q0 = np.asarray(q0, dtype=float)
    q1 = np.asarray(q1, dtype=float)
    K = cfg.r + 1

    def residual(v):
        X, _, _ = _shoot(jets.prolong(system, q0, v, K, True), h, K)
        return q1 - X

    def jacobian(v):
        _, _, Xv = _shoot(jets.prolong(system, q0, v, K, True), h, K)
        return -Xv

    v, report = newton_solve(residual, jacobian, (q1 - q0) / h, cfg.newton)
    coeffs = jets.prolong(system, q0, v, K, with_sensitivities=True)
    _, Xq, Xv = _shoot(coeffs, h, K)
    Xv_inv = np.linalg.inv(Xv)
    return BoundaryVelocity(v, -Xv_inv @ Xq, Xv_inv, coeffs, report)


def nodal_states(bv: BoundaryVelocity, rule: QuadratureRule, h, r: int, q1=None):
    """Quadrature-node states ``[(q_c, v_c), ...]`` from the order-``r`` Taylor map.

    If the rule contains ``c = 1`` and ``q1`` is given, that node takes the
    boundary position ``q1``.
    """
    rule = make_rule(rule)
    q, v, _, _ = _node_states(bv.coeffs, rule.c, h, r)
    out = []
    for i, c in enumerate(rule.c):
        qi = np.asarray(q1, dtype=float) if (c == 1.0 and q1 is not None) else q[..., i, :]
        out.append((qi, v[..., i, :]))
    return out


def discrete_lagrangian(system, q0, q1, h, cfg: TviConfig):
    bv = solve_initial_velocity(system, q0, q1, h, cfg)
    G = _action(system, np.asarray(q0, float), np.asarray(q1, float), bv.v_tilde0, h, cfg.r, cfg.rule)[0]
    return float(G)


def d1_Ld(system, q0, q1, h, cfg: TviConfig):
    bv = solve_initial_velocity(system, q0, q1, h, cfg)
    return _gradients(system, np.asarray(q0, float), np.asarray(q1, float), bv.v_tilde0, h, cfg.r, cfg.rule)[1]


def d2_Ld(system, q0, q1, h, cfg: TviConfig):
    bv = solve_initial_velocity(system, q0, q1, h, cfg)
    return _gradients(system, np.asarray(q0, float), np.asarray(q1, float), bv.v_tilde0, h, cfg.r, cfg.rule)[2]


def taylor_guess(system, q0, v0, h, order):
    """Position of the order-``order`` Taylor polynomial at ``h``."""
    coeffs = jets.prolong(system, q0, v0, max(order, 1))
    w = np.asarray(float(h)) ** np.arange(coeffs.order + 1)
    w[order + 1 :] = 0.0
    return coeffs.Q @ w


def step(system, q0, p0, h, cfg: TviConfig, cache: Optional[JacobianCache] = None):
    """One step ``(q0, p0) -> (q1, p1)``; returns ``(q1, p1, SolveReport)``.

    Pass a :class:`~taylorvi.solver.JacobianCache` to reuse Newton
    Jacobians across consecutive steps.
    """
    _check_h(h)
    q0 = np.asarray(q0, dtype=float)
    p0 = np.asarray(p0, dtype=float)
    if not (np.all(np.isfinite(q0)) and np.all(np.isfinite(p0))):
        raise ValueError("state must be finite")
    n = q0.shape[-1]
    r, rule = cfg.r, cfg.rule

    def residual(x):
        q1, v = x[..., :n], x[..., n:]
        _, D1, _, X = _gradients(system, q0, q1, v, h, r, rule)
        return np.concatenate([q1 - X, p0 + D1], axis=-1)

    v0 = system.mass_inv_apply(p0)
    x0 = np.concatenate([taylor_guess(system, q0, v0, h, r + 1), v0])
    x, report = _newton(residual, x0, cfg.newton, cache)
    q1, v = x[:n], x[n:]
    p1 = _gradients(system, q0, q1, v, h, r, rule)[2]
    return q1, p1, report


def _newton(residual, x0, newton_cfg, cache=None):
    try:
        return newton_solve(residual, complex_step_jacobian(residual), x0, newton_cfg, cache)
    except (NonConvergenceError, SingularJacobianError) as exc:
        raise StepError(f"step failed: {exc}", getattr(exc, "report", None)) from exc
