"""Reference integrators: the classical Taylor method and closed-form symplectic schemes.

These are written out directly, without going through the variational
machinery, so they serve as independent oracles for it.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import jets

__all__ = ["BaselineKind", "Baseline", "taylor_step", "closed_form_step", "taylor_phase_step"]


class BaselineKind(enum.Enum):
    TAYLOR = "taylor"
    EULER_A = "euler_a"
    EULER_B = "euler_b"
    STORMER_VERLET = "stormer_verlet"


@dataclass(frozen=True)
class Baseline:
    kind: BaselineKind
    r: int = 0

    def __post_init__(self):
        if self.kind is BaselineKind.TAYLOR and self.r < 1:
            raise ValueError("Taylor method needs r >= 1")


def taylor_step(system, q0, v0, h, r: int):
    """Order-``r`` Taylor method on ``(q, v)``.

    Position is summed through ``h^r`` and velocity through the
    ``(r+1)``-th derivative, both from one prolongation of degree ``r+1``.
    """
    if r < 1:
        raise ValueError("Taylor method needs r >= 1")
    Q = jets.prolong(system, np.asarray(q0, dtype=float), np.asarray(v0, dtype=float), r + 1).Q
    q1 = Q[..., r]
    v1 = (r + 1) * Q[..., r + 1]
    for k in range(r, 0, -1):  # Horner
        q1 = q1 * h + Q[..., k - 1]
        v1 = v1 * h + k * Q[..., k]
    return q1, v1


def taylor_phase_step(system, q0, p0, h, r: int):
    """Taylor method expressed on ``(q, p)`` with ``p = M v``."""
    q1, v1 = taylor_step(system, q0, system.mass_inv_apply(np.asarray(p0, dtype=float)), h, r)
    return q1, system.mass_apply(v1)


def closed_form_step(system, q0, p0, h, kind):
    """Symplectic Euler-A/B or Stormer-Verlet for ``H = p^T M^{-1} p / 2 + V(q)``."""
    kind = BaselineKind(kind)
    q0 = np.asarray(q0, dtype=float)
    p0 = np.asarray(p0, dtype=float)
    Minv = system.mass_inv
    dV = system.grad_potential
    if kind is BaselineKind.EULER_A:
        p1 = p0 - h * dV(q0)
        return q0 + h * p1 @ Minv.T, p1
    if kind is BaselineKind.EULER_B:
        q1 = q0 + h * p0 @ Minv.T
        return q1, p0 - h * dV(q1)
    if kind is BaselineKind.STORMER_VERLET:
        ph = p0 - 0.5 * h * dV(q0)
        q1 = q0 + h * ph @ Minv.T
        return q1, ph - 0.5 * h * dV(q1)
    raise ValueError(f"{kind.value} is not a closed-form scheme")
