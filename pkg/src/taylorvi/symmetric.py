"""Symmetric Taylor variational integrator.

Two shooting problems fix the boundary velocities,

    q1 = Xf(q0, v~0; h),        q0 = Xb(q1, v~1; -h),

both order-``r`` position polynomials.  Interior nodes blend the forward
expansion from ``(q0, v~0)`` with the backward one from ``(q1, v~1)``:

    q_c = c qf(c h) + (1 - c) qb(-(1 - c) h),

and likewise for velocities (velocity polynomials through ``q^(r)``).  The
end nodes are ``(q0, v~0)`` and ``(q1, v~1)``.  With a symmetric rule the
resulting discrete Lagrangian satisfies ``L_d(q0, q1; h) = -L_d(q1, q0; -h)``,
and for odd ``r`` the method has order ``r + 1``.

With ``lam0 = Xf_v^{-T} G_v0`` and ``lam1 = Xb_v^{-T} G_v1``

    D1 L_d = G_q0 - Xf_q^T lam0 + lam1,
    D2 L_d = G_q1 + lam0 - Xb_q^T lam1.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import jets
from .lagrangian import (
    TviConfig,
    _check_h,
    _lagrangian_terms,
    _newton,
    _power_weights,
    _solve_T,
    _velocity_at,
    _weighted_pullback,
    taylor_guess,
)
from .quadrature import QuadratureConfigError, QuadratureRule, make_rule
from .solver import JacobianCache, NewtonConfig, SolveReport, newton_solve

__all__ = [
    "TwoPointVelocities",
    "solve_boundary_velocities",
    "blended_nodes",
    "discrete_lagrangian_sym",
    "sym_gradients",
    "step_sym",
    "sv4_config",
]


@dataclass
class TwoPointVelocities:
    v_tilde0: np.ndarray
    v_tilde1: np.ndarray
    forward: jets.TaylorCoeffs
    backward: jets.TaylorCoeffs
    dv0_dq0: np.ndarray
    dv0_dq1: np.ndarray
    dv1_dq0: np.ndarray
    dv1_dq1: np.ndarray
    report: Optional[SolveReport] = None


def _check(cfg_r, rule):
    if cfg_r < 1:
        raise ValueError("symmetric scheme needs r >= 1")
    if not rule.symmetric:
        raise QuadratureConfigError(f"symmetric scheme needs a symmetric rule, got {rule.name}")


def _expansion(system, q, v, r):
    return jets.prolong(system, q, v, r, with_sensitivities=True)


def _position(coeffs, t, r):
    w = np.asarray(float(t)) ** np.arange(r + 1)
    return (
        coeffs.Q @ w,
        np.einsum("...kij,k->...ij", coeffs.dQdq0, w),
        np.einsum("...kij,k->...ij", coeffs.dQdv0, w),
    )


def _side_nodes(coeffs, t, r):
    """Positions/velocities (velocity through ``q^(r)``) at node times ``t``."""
    wq, wv = _power_weights(t, coeffs.order, r, r)

    def ev(w, A):
        return np.einsum("...kij,mk->...mij", A, w)

    q = np.einsum("...nk,mk->...mn", coeffs.Q, wq)
    v = np.einsum("...nk,mk->...mn", coeffs.Q, wv)
    return q, v, (ev(wq, coeffs.dQdq0), ev(wq, coeffs.dQdv0)), (ev(wv, coeffs.dQdq0), ev(wv, coeffs.dQdv0))


def _sym_action(system, q0, q1, v0, v1, h, r, rule):
    """``G`` and partials in ``(q0, q1, v0, v1)`` plus both shooting maps."""
    fw = _expansion(system, q0, v0, r)
    bw = _expansion(system, q1, v1, r)
    Xf = _position(fw, h, r)
    Xb = _position(bw, -h, r)
    c, b = rule.c, rule.b
    cf = c[:, None, None]
    qf, vf, (qf_q, qf_v), (vf_q, vf_v) = _side_nodes(fw, c * h, r)
    qb, vb, (qb_q, qb_v), (vb_q, vb_v) = _side_nodes(bw, -(1.0 - c) * h, r)
    q = c[:, None] * qf + (1.0 - c[:, None]) * qb
    v = c[:, None] * vf + (1.0 - c[:, None]) * vb
    # partials of nodal q and v w.r.t. q0, v0 (forward) and q1, v1 (backward)
    Aq = [cf * qf_q, cf * qf_v, (1 - cf) * qb_q, (1 - cf) * qb_v]
    Av = [cf * vf_q, cf * vf_v, (1 - cf) * vb_q, (1 - cf) * vb_v]
    n = q0.shape[-1]
    eye = np.eye(n)
    start, end = c == 0.0, c == 1.0
    if np.any(start | end):
        q, v = q.copy(), v.copy()
        Aq = [a.copy() for a in Aq]
        Av = [a.copy() for a in Av]
        for mask, qe, ve, iq, iv in ((start, q0, v0, 0, 1), (end, q1, v1, 2, 3)):
            if not np.any(mask):
                continue
            q[..., mask, :] = qe[..., None, :]
            v[..., mask, :] = ve[..., None, :]
            for k in range(4):
                Aq[k][..., mask, :, :] = eye if k == iq else 0.0
                Av[k][..., mask, :, :] = eye if k == iv else 0.0
    L, Lq, Lv = _lagrangian_terms(system, q, v)
    G = h * np.einsum("m,...m->...", b, L)
    grads = [_weighted_pullback(b, h, Aq[k], Lq) + _weighted_pullback(b, h, Av[k], Lv) for k in range(4)]
    return G, grads, Xf, Xb, (fw, bw)


def _sym_gradients(system, q0, q1, v0, v1, h, r, rule):
    G, (G_q0, G_v0, G_q1, G_v1), (Xf, Xf_q, Xf_v), (Xb, Xb_q, Xb_v), _ = _sym_action(
        system, q0, q1, v0, v1, h, r, rule
    )
    lam0 = _solve_T(Xf_v, G_v0)
    lam1 = _solve_T(Xb_v, G_v1)
    D1 = G_q0 - np.einsum("...ij,...i->...j", Xf_q, lam0) + lam1
    D2 = G_q1 + lam0 - np.einsum("...ij,...i->...j", Xb_q, lam1)
    return G, D1, D2, Xf, Xb


# ---------------------------------------------------------------------------


def solve_boundary_velocities(system, q0, q1, h, r: int, newton: NewtonConfig = NewtonConfig()) -> TwoPointVelocities:
    """Solve both one-sided shooting problems (guess ``(q1 - q0)/h`` for each)."""
    _check_h(h)
    if r < 1:
        raise ValueError("symmetric scheme needs r >= 1")
    q0 = np.asarray(q0, dtype=float)
    q1 = np.asarray(q1, dtype=float)
    guess = (q1 - q0) / h

    def side(qa, qb, t):
        def residual(v):
            return qb - _position(_expansion(system, qa, v, r), t, r)[0]

        def jacobian(v):
            return -_position(_expansion(system, qa, v, r), t, r)[2]

        return newton_solve(residual, jacobian, guess, newton)

    v0, rep0 = side(q0, q1, h)
    v1, rep1 = side(q1, q0, -h)
    fw, bw = _expansion(system, q0, v0, r), _expansion(system, q1, v1, r)
    _, Ff_q, Ff_v = _position(fw, h, r)
    _, Fb_q, Fb_v = _position(bw, -h, r)
    Ff_inv, Fb_inv = np.linalg.inv(Ff_v), np.linalg.inv(Fb_v)
    report = SolveReport(rep0.iterations + rep1.iterations, max(rep0.final_residual, rep1.final_residual), True, "analytic")
    return TwoPointVelocities(v0, v1, fw, bw, -Ff_inv @ Ff_q, Ff_inv, Fb_inv, -Fb_inv @ Fb_q, report)


def blended_nodes(tp: TwoPointVelocities, rule: QuadratureRule, h, r: int, q0=None, q1=None):
    """Nodal states ``[(q_c, v_c), ...]`` blending the two one-sided expansions."""
    rule = make_rule(rule)
    _check(r, rule)
    c = rule.c
    qf, vf, _, _ = _side_nodes(tp.forward, c * h, r)
    qb, vb, _, _ = _side_nodes(tp.backward, -(1.0 - c) * h, r)
    q0 = tp.forward.Q[..., 0] if q0 is None else np.asarray(q0, dtype=float)
    q1 = tp.backward.Q[..., 0] if q1 is None else np.asarray(q1, dtype=float)
    out = []
    for i, ci in enumerate(c):
        if ci == 0.0:
            out.append((q0, tp.v_tilde0))
        elif ci == 1.0:
            out.append((q1, tp.v_tilde1))
        else:
            out.append((ci * qf[..., i, :] + (1 - ci) * qb[..., i, :], ci * vf[..., i, :] + (1 - ci) * vb[..., i, :]))
    return out


def sym_gradients(system, q0, q1, h, cfg: TviConfig):
    """``(L_d, D1 L_d, D2 L_d)`` of the symmetric discrete Lagrangian."""
    _check(cfg.r, cfg.rule)
    q0 = np.asarray(q0, dtype=float)
    q1 = np.asarray(q1, dtype=float)
    tp = solve_boundary_velocities(system, q0, q1, h, cfg.r, cfg.newton)
    G, D1, D2, _, _ = _sym_gradients(system, q0, q1, tp.v_tilde0, tp.v_tilde1, h, cfg.r, cfg.rule)
    return G, D1, D2


def discrete_lagrangian_sym(system, q0, q1, h, cfg: TviConfig) -> float:
    return float(sym_gradients(system, q0, q1, h, cfg)[0])


def step_sym(system, q0, p0, h, cfg: TviConfig, cache: Optional[JacobianCache] = None):
    """One step of the symmetric scheme; unknowns ``(q1, v~0, v~1)``."""
    _check_h(h)
    _check(cfg.r, cfg.rule)
    q0 = np.asarray(q0, dtype=float)
    p0 = np.asarray(p0, dtype=float)
    n = q0.shape[-1]
    r, rule = cfg.r, cfg.rule

    def residual(x):
        q1, v0, v1 = x[..., :n], x[..., n : 2 * n], x[..., 2 * n :]
        _, D1, _, Xf, Xb = _sym_gradients(system, q0, q1, v0, v1, h, r, rule)
        return np.concatenate([q1 - Xf, q0 - Xb, p0 + D1], axis=-1)

    v0 = system.mass_inv_apply(p0)
    pred = jets.prolong(system, q0, v0, r + 1, with_sensitivities=True)
    q1g = taylor_guess(system, q0, v0, h, r + 1)
    v1g = _velocity_at(pred, h, r)[0]
    x, report = _newton(residual, np.concatenate([q1g, v0, v1g]), cfg.newton, cache)
    q1, v0, v1 = x[:n], x[n : 2 * n], x[2 * n :]
    p1 = _sym_gradients(system, q0, q1, v0, v1, h, r, rule)[2]
    return q1, p1, report


def sv4_config(newton: NewtonConfig = NewtonConfig()) -> TviConfig:
    """Fourth-order symmetric scheme: r = 3 with two-point Gauss."""
    return TviConfig(3, make_rule("gauss", 2), newton)
