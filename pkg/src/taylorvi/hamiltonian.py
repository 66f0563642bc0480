"""Hamiltonian Taylor variational integrators from discrete right/left Hamiltonians.

For ``H = 1/2 p^T M^{-1} p + V(q)`` the Taylor map on phase space is the
Taylor map on ``(q, v)`` with ``p = M v``: positions are summed through
``t^r`` and momenta through ``p^(r)``, i.e. velocities through ``q^(r+1)``.
The integrand ``p^T qdot - H`` at a node equals ``L(q, M^{-1} p)``, so both
generating functions reuse the Lagrangian quadrature action.

Right Hamiltonian ``H+(q0, p1)``: solve ``p1 = P(q0, p~0; h)`` for ``p~0``,
take nodes from ``(q0, p~0)``, the end-node position ``q~1`` from the
order ``r+1`` position polynomial, and set

    H+ = p1^T q~1 - h sum_i b_i L(q_ci, M^{-1} p_ci).

The step solves ``p0 = D1 H+(q0, p1)`` and sets ``q1 = D2 H+(q0, p1)``.

Left Hamiltonian ``H-(q1, p0)``: solve ``q1 = X(q~0, M^{-1} p0; h)`` for
``q~0``, take nodes from ``(q~0, p0)`` with the end node at ``q1``, and set

    H- = -p0^T q~0 - h sum_i b_i L(q_ci, M^{-1} p_ci).

The step solves ``q0 = -dH-/dp0`` for ``q1`` and sets ``p1 = -dH-/dq1``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import jets
from .lagrangian import (
    TviConfig,
    _action,
    _check_h,
    _newton,
    _shoot,
    _solve_T,
    _velocity_at,
    taylor_guess,
)
from .quadrature import make_rule
from .solver import JacobianCache, NewtonConfig, SolveReport, newton_solve

__all__ = [
    "InitialMomentum",
    "solve_initial_momentum",
    "discrete_right_hamiltonian",
    "discrete_left_hamiltonian",
    "right_hamiltonian_gradients",
    "left_hamiltonian_gradients",
    "step_right",
    "step_left",
    "step_svhd",
    "svhd_config",
]


def _mtv(A, x):
    return np.einsum("...ij,...i->...j", A, x)


@dataclass
class InitialMomentum:
    p_tilde0: np.ndarray
    dp_dq0: np.ndarray
    dp_dp1: np.ndarray
    coeffs: jets.TaylorCoeffs
    report: Optional[SolveReport] = None


def _momentum_map(system, q0, p_tilde0, h, r):
    """``P(q0, p~0; h)`` and its partials with respect to ``q0`` and ``p~0``."""
    v = system.mass_inv_apply(p_tilde0)
    coeffs = jets.prolong(system, q0, v, r + 1, with_sensitivities=True)
    V, Vq, Vv = _velocity_at(coeffs, h, r)
    M, Minv = system.mass, system.mass_inv
    return system.mass_apply(V), M @ Vq, M @ Vv @ Minv, coeffs


def solve_initial_momentum(system, q0, p1, h, cfg: TviConfig) -> InitialMomentum:
    """Solve ``p1 = P(q0, p~0; h)`` for ``p~0`` (guess ``p~0 = p1``)."""
    _check_h(h)
    q0 = np.asarray(q0, dtype=float)
    p1 = np.asarray(p1, dtype=float)

    def residual(pt):
        return p1 - _momentum_map(system, q0, pt, h, cfg.r)[0]

    def jacobian(pt):
        return -_momentum_map(system, q0, pt, h, cfg.r)[2]

    pt, report = newton_solve(residual, jacobian, p1, cfg.newton)
    _, Pq, Pp, coeffs = _momentum_map(system, q0, pt, h, cfg.r)
    Pp_inv = np.linalg.inv(Pp)
    return InitialMomentum(pt, -Pp_inv @ Pq, Pp_inv, coeffs, report)


# ---------------------------------------------------------------------------
# right Hamiltonian


def _right(system, q0, p1, pt, h, r, rule):
    """``(H+, D1, D2, P)`` with ``p~0`` free; exact once ``P = p1``."""
    v = system.mass_inv_apply(pt)
    G, G_q0, G_qe, G_v, X, Xq, Xv, coeffs = _action(system, q0, None, v, h, r, rule)
    V, Vq, Vv = _velocity_at(coeffs, h, r)
    # total derivatives of G through the end node q~1 = X(q0, v)
    dG_q0 = G_q0 + _mtv(Xq, G_qe)
    dG_v = G_v + _mtv(Xv, G_qe)
    H = np.sum(p1 * X, axis=-1) - G
    Phi_q0 = _mtv(Xq, p1) - dG_q0
    Phi_v = _mtv(Xv, p1) - dG_v
    mu = _solve_T(Vv, Phi_v)
    D1 = Phi_q0 - _mtv(Vq, mu)
    D2 = X + system.mass_inv_apply(mu)
    return H, D1, D2, system.mass_apply(V)


def right_hamiltonian_gradients(system, q0, p1, h, cfg: TviConfig):
    """``(H+, D1 H+, D2 H+)`` at ``(q0, p1)``."""
    q0 = np.asarray(q0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    im = solve_initial_momentum(system, q0, p1, h, cfg)
    H, D1, D2, _ = _right(system, q0, p1, im.p_tilde0, h, cfg.r, cfg.rule)
    return H, D1, D2


def discrete_right_hamiltonian(system, q0, p1, h, cfg: TviConfig) -> float:
    return float(right_hamiltonian_gradients(system, q0, p1, h, cfg)[0])


def step_right(system, q0, p0, h, cfg: TviConfig, cache: Optional[JacobianCache] = None):
    """Solve ``p0 = D1 H+(q0, p1)`` for ``p1``; ``q1 = D2 H+(q0, p1)``."""
    _check_h(h)
    q0 = np.asarray(q0, dtype=float)
    p0 = np.asarray(p0, dtype=float)
    n = q0.shape[-1]
    r, rule = cfg.r, cfg.rule

    def residual(x):
        p1, pt = x[..., :n], x[..., n:]
        _, D1, _, P = _right(system, q0, p1, pt, h, r, rule)
        return np.concatenate([p1 - P, p0 - D1], axis=-1)

    P0 = _momentum_map(system, q0, p0, h, r)[0]
    x, report = _newton(residual, np.concatenate([P0, p0]), cfg.newton, cache)
    p1, pt = x[:n], x[n:]
    q1 = _right(system, q0, p1, pt, h, r, rule)[2]
    return q1, p1, report


# ---------------------------------------------------------------------------
# left Hamiltonian


def _left(system, q1, p0, qt, h, r, rule):
    """``(H-, dH-/dq1, dH-/dp0, X)`` with ``q~0`` free; exact once ``X = q1``."""
    v = system.mass_inv_apply(p0)
    G, G_qt, G_q1, G_v, X, Xq, Xv, _ = _action(system, qt, q1, v, h, r, rule)
    H = -np.sum(p0 * qt, axis=-1) - G
    Phi_q1 = -G_q1
    Phi_qt = -p0 - G_qt
    Phi_p0 = -qt - system.mass_inv_apply(G_v)
    mu = _solve_T(Xq, Phi_qt)
    dH_dq1 = Phi_q1 + mu
    # X depends on p0 through v = M^{-1} p0
    dH_dp0 = Phi_p0 - system.mass_inv_apply(_mtv(Xv, mu))
    return H, dH_dq1, dH_dp0, X


def _solve_initial_position(system, q1, p0, h, cfg):
    v = system.mass_inv_apply(p0)
    K = cfg.r + 1

    def residual(qt):
        return q1 - _shoot(jets.prolong(system, qt, v, K, True), h, K)[0]

    def jacobian(qt):
        return -_shoot(jets.prolong(system, qt, v, K, True), h, K)[1]

    return newton_solve(residual, jacobian, q1 - h * v, cfg.newton)


def left_hamiltonian_gradients(system, q1, p0, h, cfg: TviConfig):
    """``(H-, dH-/dq1, dH-/dp0)`` at ``(q1, p0)``."""
    _check_h(h)
    q1 = np.asarray(q1, dtype=float)
    p0 = np.asarray(p0, dtype=float)
    qt, _ = _solve_initial_position(system, q1, p0, h, cfg)
    H, dq1, dp0, _ = _left(system, q1, p0, qt, h, cfg.r, cfg.rule)
    return H, dq1, dp0


def discrete_left_hamiltonian(system, q1, p0, h, cfg: TviConfig) -> float:
    return float(left_hamiltonian_gradients(system, q1, p0, h, cfg)[0])


def step_left(system, q0, p0, h, cfg: TviConfig, cache: Optional[JacobianCache] = None):
    """Solve ``q0 = -dH-/dp0(q1, p0)`` for ``q1``; ``p1 = -dH-/dq1(q1, p0)``."""
    _check_h(h)
    q0 = np.asarray(q0, dtype=float)
    p0 = np.asarray(p0, dtype=float)
    n = q0.shape[-1]
    r, rule = cfg.r, cfg.rule

    def residual(x):
        q1, qt = x[..., :n], x[..., n:]
        _, _, dp0, X = _left(system, q1, p0, qt, h, r, rule)
        return np.concatenate([q1 - X, q0 + dp0], axis=-1)

    q1g = taylor_guess(system, q0, system.mass_inv_apply(p0), h, r + 1)
    x, report = _newton(residual, np.concatenate([q1g, q0]), cfg.newton, cache)
    q1, qt = x[:n], x[n:]
    p1 = -_left(system, q1, p0, qt, h, r, rule)[1]
    return q1, p1, report


# ---------------------------------------------------------------------------


def svhd_config(newton: NewtonConfig = NewtonConfig()) -> TviConfig:
    """The r = 0 trapezoid configuration used by the SVHd composition."""
    return TviConfig(0, make_rule("trapezoid"), newton)


def step_svhd(
    system,
    q0,
    p0,
    h,
    cfg: Optional[TviConfig] = None,
    cache: Optional[tuple] = None,
    right_first: bool = True,
):
    """Symmetric composition of half steps of the right and left methods.

    By default the right half step runs first, then the left one.  A
    ``cache`` is a pair of Jacobian caches, one per half step.
    """
    cfg = svhd_config() if cfg is None else cfg
    first, second = (step_right, step_left) if right_first else (step_left, step_right)
    c1, c2 = cache if cache is not None else (None, None)
    qm, pm, rep1 = first(system, q0, p0, 0.5 * h, cfg, c1)
    q1, p1, rep2 = second(system, qm, pm, 0.5 * h, cfg, c2)
    report = SolveReport(
        rep1.iterations + rep2.iterations,
        max(rep1.final_residual, rep2.final_residual),
        rep1.converged and rep2.converged,
        rep1.jacobian,
    )
    return q1, p1, report
