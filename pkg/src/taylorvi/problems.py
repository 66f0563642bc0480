"""Benchmark mechanical systems and their initial data.

Every system has a constant mass matrix and a potential ``V``; the
Lagrangian is ``L = 1/2 v^T M v - V(q)`` and the Hamiltonian
``H = 1/2 p^T M^{-1} p + V(q)``.  The second-order field
``f(q) = -M^{-1} grad V(q)`` is written with the dispatching functions of
:mod:`taylorvi.jets` so it can be prolonged to arbitrary order.

All numeric callables broadcast over leading batch axes: ``q`` has shape
``(..., n)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from importlib import resources
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import jets

__all__ = [
    "MechSystem",
    "ProblemInstance",
    "PROBLEMS",
    "make_problem",
    "energy",
    "pendulum",
    "kepler2d",
    "henon_heiles",
    "fpu",
    "outer_solar",
    "free_particle",
    "harmonic_oscillator",
    "damped_oscillator",
    "fpu_to_oscillator",
    "fpu_from_oscillator",
    "fpu_oscillatory_energy",
    "kepler_invariants",
    "load_outer_solar",
    "barycentric",
    "GRAVITATIONAL_CONSTANT",
]

GRAVITATIONAL_CONSTANT = 2.95912208286e-4  # AU^3 / (solar mass day^2)


class UnknownProblemError(KeyError):
    pass


class DataFileError(OSError):
    pass


@dataclass(frozen=True, eq=False)
class MechSystem:
    """Mechanical system ``L(q, v) = 1/2 v^T M v - V(q)``.

    ``force`` must equal ``-grad V`` and be expressed with jet-aware
    operations.  ``accel`` optionally overrides the whole second-order
    field ``f(q, v)`` (used for non-mechanical test fields).
    """

    name: str
    mass: np.ndarray
    potential: Callable
    grad_potential: Callable
    hess_potential: Callable
    force: Callable
    accel: Optional[Callable] = None
    params: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        M = np.atleast_2d(np.asarray(self.mass, dtype=float))
        object.__setattr__(self, "mass", M)
        object.__setattr__(self, "mass_inv", np.linalg.inv(M))
        object.__setattr__(self, "_diagonal", bool(np.all(M == np.diag(np.diag(M)))))

    @property
    def dim(self):
        return self.mass.shape[0]

    @property
    def velocity_free(self):
        return self.accel is None

    def field(self, q, v):
        if self.accel is not None:
            return self.accel(q, v)
        F = self.force(q)
        if self._diagonal:
            return F * np.diag(self.mass_inv)
        return jets.matvec(self.mass_inv, F)

    def mass_apply(self, v):
        return v @ self.mass.T

    def mass_inv_apply(self, p):
        return p @ self.mass_inv.T

    def lagrangian(self, q, v):
        return 0.5 * np.sum(v * self.mass_apply(v), axis=-1) - self.potential(q)

    def energy(self, q, p):
        return 0.5 * np.sum(p * self.mass_inv_apply(p), axis=-1) + self.potential(q)


def energy(system: MechSystem, q, p):
    """Hamiltonian ``1/2 p^T M^{-1} p + V(q)``."""
    return system.energy(np.asarray(q, dtype=float), np.asarray(p, dtype=float))


@dataclass
class ProblemInstance:
    system: MechSystem
    q0: np.ndarray
    p0: np.ndarray
    h: float
    horizon: float
    metadata: dict = dc_field(default_factory=dict)

    @property
    def energy0(self):
        return float(self.system.energy(self.q0, self.p0))


# ---------------------------------------------------------------------------
# systems


def pendulum(g: float = 9.8) -> MechSystem:
    """Simple pendulum, ``V = g (1 - cos q)`` so that ``q'' = -g sin q``."""
    return MechSystem(
        name="pendulum",
        mass=np.eye(1),
        potential=lambda q: g * (1.0 - np.cos(q[..., 0])),
        grad_potential=lambda q: g * np.sin(q),
        hess_potential=lambda q: (g * np.cos(q))[..., None],
        force=lambda q: -g * jets.sin(q),
        params={"g": g},
    )


def _kepler_force(q):
    x, y = q[..., 0], q[..., 1]
    s = jets.power(x * x + y * y, -1.5)
    return jets.stack([-x * s, -y * s])


def _kepler_hess(q):
    r2 = np.sum(q * q, axis=-1)[..., None, None]
    outer = q[..., :, None] * q[..., None, :]
    return np.eye(2) / r2**1.5 - 3.0 * outer / r2**2.5


def kepler2d() -> MechSystem:
    """Planar Kepler problem with unit gravitational parameter."""
    return MechSystem(
        name="kepler2d",
        mass=np.eye(2),
        potential=lambda q: -1.0 / np.sqrt(np.sum(q * q, axis=-1)),
        grad_potential=lambda q: q / np.sum(q * q, axis=-1, keepdims=True) ** 1.5,
        hess_potential=_kepler_hess,
        force=_kepler_force,
    )


def _hh_potential(q):
    x, y = q[..., 0], q[..., 1]
    return 0.5 * (x * x + y * y) + x * x * y - y**3 / 3.0


def _hh_grad(q):
    x, y = q[..., 0], q[..., 1]
    return np.stack([x + 2 * x * y, y + x * x - y * y], axis=-1)


def _hh_hess(q):
    x, y = q[..., 0], q[..., 1]
    H = np.empty(q.shape[:-1] + (2, 2), dtype=np.result_type(q, float))
    H[..., 0, 0] = 1 + 2 * y
    H[..., 0, 1] = H[..., 1, 0] = 2 * x
    H[..., 1, 1] = 1 - 2 * y
    return H


def _hh_force(q):
    x, y = q[..., 0], q[..., 1]
    return jets.stack([-x - 2.0 * x * y, -y - x * x + y * y])


def henon_heiles() -> MechSystem:
    return MechSystem(
        name="henon_heiles",
        mass=np.eye(2),
        potential=_hh_potential,
        grad_potential=_hh_grad,
        hess_potential=_hh_hess,
        force=_hh_force,
    )


# FPU: six masses, stiff linear springs (1,2), (3,4), (5,6) and soft quartic
# springs (0,1), (2,3), (4,5), (6,7); positions 0 and 7 are the fixed walls.
_FPU_STIFF = ((1, 2), (3, 4), (5, 6))
_FPU_SOFT = ((0, 1), (2, 3), (4, 5), (6, 7))


def _fpu_padded(q):
    zero = np.zeros(q.shape[:-1] + (1,), dtype=q.dtype)
    return np.concatenate([zero, q, zero], axis=-1)


def fpu(omega: float = 50.0) -> MechSystem:
    """Modified Fermi-Pasta-Ulam chain, fixed at both ends."""
    w2 = omega * omega

    def potential(q):
        qe = _fpu_padded(q)
        V = sum(0.25 * w2 * (qe[..., b] - qe[..., a]) ** 2 for a, b in _FPU_STIFF)
        return V + sum((qe[..., b] - qe[..., a]) ** 4 for a, b in _FPU_SOFT)

    def grad(q):
        qe = _fpu_padded(q)
        g = np.zeros_like(qe)
        for a, b in _FPU_STIFF:
            t = 0.5 * w2 * (qe[..., b] - qe[..., a])
            g[..., b] += t
            g[..., a] -= t
        for a, b in _FPU_SOFT:
            t = 4.0 * (qe[..., b] - qe[..., a]) ** 3
            g[..., b] += t
            g[..., a] -= t
        return g[..., 1:7]

    def hess(q):
        qe = _fpu_padded(q)
        H = np.zeros(q.shape[:-1] + (8, 8), dtype=np.result_type(q, float))
        for pairs, k in ((_FPU_STIFF, None), (_FPU_SOFT, 1)):
            for a, b in pairs:
                s = 0.5 * w2 if k is None else 12.0 * (qe[..., b] - qe[..., a]) ** 2
                H[..., a, a] += s
                H[..., b, b] += s
                H[..., a, b] -= s
                H[..., b, a] -= s
        return H[..., 1:7, 1:7]

    def force(q):
        comps = [q[..., i] for i in range(6)]
        out = [0.0] * 8
        ext = [None] + comps + [None]

        def diff(a, b):
            if ext[a] is None:
                return ext[b]
            if ext[b] is None:
                return -ext[a]
            return ext[b] - ext[a]

        for a, b in _FPU_STIFF:
            t = (0.5 * w2) * diff(a, b)
            out[b] = out[b] - t
            out[a] = out[a] + t
        for a, b in _FPU_SOFT:
            d = diff(a, b)
            t = 4.0 * (d * d * d)
            out[b] = out[b] - t
            out[a] = out[a] + t
        return jets.stack(out[1:7])

    return MechSystem("fpu", np.eye(6), potential, grad, hess, force, params={"omega": omega})


def fpu_to_oscillator(q, p):
    """Map FPU ``(q, p)`` to ``(x0, x1, y0, y1)``, each of shape ``(..., 3)``."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    qo, qe = q[..., 0::2], q[..., 1::2]  # q_{2i-1}, q_{2i}
    po, pe = p[..., 0::2], p[..., 1::2]
    r = math.sqrt(2.0)
    return (qe + qo) / r, (qe - qo) / r, (pe + po) / r, (pe - po) / r


def fpu_from_oscillator(x0, x1, y0, y1):
    x0, x1, y0, y1 = (np.asarray(a, dtype=float) for a in (x0, x1, y0, y1))
    if x0.shape[-1] != 3:
        raise ValueError("FPU oscillator coordinates have three components")
    r = math.sqrt(2.0)
    q = np.empty(x0.shape[:-1] + (6,))
    p = np.empty_like(q)
    q[..., 1::2], q[..., 0::2] = (x0 + x1) / r, (x0 - x1) / r
    p[..., 1::2], p[..., 0::2] = (y0 + y1) / r, (y0 - y1) / r
    return q, p


def fpu_oscillatory_energy(q, p, omega: float = 50.0):
    """Stiff-spring energies ``(I1, I2, I3, I)``."""
    q = np.asarray(q, dtype=float)
    if q.shape[-1] != 6 or np.shape(p)[-1] != 6:
        raise ValueError("FPU state must have six positions and six momenta")
    _, x1, _, y1 = fpu_to_oscillator(q, p)
    Ij = 0.5 * (y1**2 + omega**2 * x1**2)
    return Ij[..., 0], Ij[..., 1], Ij[..., 2], Ij.sum(axis=-1)


# ---------------------------------------------------------------------------
# outer solar system


def load_outer_solar(path=None):
    """Read the body table; returns ``(names, masses, positions, velocities)``."""
    try:
        if path is None:
            text = resources.files("taylorvi").joinpath("data/outer_solar.txt").read_text()
        else:
            text = Path(path).read_text()
    except (OSError, FileNotFoundError) as exc:
        raise DataFileError(f"cannot read outer solar system table: {exc}") from exc
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise DataFileError("outer solar system table is empty")
    header, body = rows[0], rows[1:]
    expected = ["body", "mass", "x", "y", "z", "vx", "vy", "vz"]
    if header != expected:
        raise DataFileError(f"unexpected header {header}")
    try:
        names = [r[0] for r in body]
        vals = np.array([[float(x) for x in r[1:]] for r in body])
    except (ValueError, IndexError) as exc:
        raise DataFileError(f"corrupt outer solar system table: {exc}") from exc
    if vals.shape != (len(body), 7) or not np.all(np.isfinite(vals)) or np.any(vals[:, 0] <= 0):
        raise DataFileError("corrupt outer solar system table")
    return names, vals[:, 0], vals[:, 1:4], vals[:, 4:7]


def barycentric(q, p, masses):
    """Shift a flattened N-body state to the centre-of-mass frame."""
    masses = np.asarray(masses, dtype=float)
    N = masses.size
    Q = np.asarray(q, dtype=float).reshape(-1, N, 3)
    P = np.asarray(p, dtype=float).reshape(-1, N, 3)
    mt = masses.sum()
    Qc = Q - (masses[:, None] * Q).sum(axis=-2, keepdims=True) / mt
    Pc = P - masses[:, None] * P.sum(axis=-2, keepdims=True) / mt
    return Qc.reshape(np.shape(q)), Pc.reshape(np.shape(p))


def outer_solar(masses=None, G: float = GRAVITATIONAL_CONSTANT) -> MechSystem:
    """Sun and outer planets with pairwise Newtonian gravity (flattened 3N coordinates)."""
    if masses is None:
        masses = load_outer_solar()[1]
    masses = np.asarray(masses, dtype=float)
    N = masses.size
    I, J = np.triu_indices(N, k=1)
    gm = G * masses[I] * masses[J]
    # incidence: pair quantity d = q_J - q_I pushes I forward and J back
    S = np.zeros((N, I.size))
    S[I, np.arange(I.size)] = 1.0
    S[J, np.arange(I.size)] = -1.0

    def split(q):
        return np.asarray(q).reshape(np.shape(q)[:-1] + (N, 3))

    def potential(q):
        Q = split(q)
        d = Q[..., J, :] - Q[..., I, :]
        return -np.sum(gm / np.sqrt(np.sum(d * d, axis=-1)), axis=-1)

    def grad(q):
        Q = split(q)
        d = Q[..., J, :] - Q[..., I, :]
        w = gm / np.sum(d * d, axis=-1) ** 1.5
        F = np.einsum("ip,...pk->...ik", S, w[..., None] * d)
        return (-F).reshape(np.shape(q))

    def hess(q):
        Q = split(q)
        d = Q[..., J, :] - Q[..., I, :]
        r2 = np.sum(d * d, axis=-1)
        blk = gm[:, None, None] * (
            np.eye(3) / r2[..., None, None] ** 1.5
            - 3.0 * d[..., :, None] * d[..., None, :] / r2[..., None, None] ** 2.5
        )
        # V_pair(d) = -gm / |d| with d = q_J - q_I has Hessian blk in d
        H = np.zeros(np.shape(q)[:-1] + (N, 3, N, 3), dtype=np.result_type(q, float))
        for k, (a, b) in enumerate(zip(I, J)):
            H[..., a, :, a, :] += blk[..., k, :, :]
            H[..., b, :, b, :] += blk[..., k, :, :]
            H[..., a, :, b, :] -= blk[..., k, :, :]
            H[..., b, :, a, :] -= blk[..., k, :, :]
        return H.reshape(np.shape(q)[:-1] + (3 * N, 3 * N))

    def force(q):
        if not isinstance(q, jets.Jet):
            return -grad(q)
        Q = jets.reshape_last(q, (N, 3))
        d = Q.take(J, axis=-2) - Q.take(I, axis=-2)
        w = jets.power((d * d).sum(axis=-1), -1.5) * gm
        F = jets.matvec(S, d * w[..., None], axis=-2)
        c = F.c
        return jets.Jet(c.reshape(c.shape[:-4] + (3 * N,) + c.shape[-2:]))

    mass = np.diag(np.repeat(masses, 3))
    return MechSystem("outer_solar", mass, potential, grad, hess, force, params={"G": G, "masses": masses})


# ---------------------------------------------------------------------------
# test systems


def free_particle(n: int = 1, mass=None) -> MechSystem:
    M = np.eye(n) if mass is None else np.asarray(mass, dtype=float)
    return MechSystem(
        name="free_particle",
        mass=M,
        potential=lambda q: np.zeros(np.shape(q)[:-1]),
        grad_potential=lambda q: np.zeros_like(q),
        hess_potential=lambda q: np.zeros(np.shape(q) + (np.shape(q)[-1],)),
        force=lambda q: 0.0 * q,
    )


def harmonic_oscillator(omega: float = 1.0) -> MechSystem:
    w2 = omega * omega
    return MechSystem(
        name="harmonic",
        mass=np.eye(1),
        potential=lambda q: 0.5 * w2 * q[..., 0] ** 2,
        grad_potential=lambda q: w2 * q,
        hess_potential=lambda q: np.full(np.shape(q) + (1,), w2),
        force=lambda q: -w2 * q,
        params={"omega": omega},
    )


def damped_oscillator(gamma: float = 0.3) -> MechSystem:
    """``q'' = -q - gamma q'``; not variational, only for exercising prolongation."""
    sys = harmonic_oscillator(1.0)
    return MechSystem(
        name="damped",
        mass=sys.mass,
        potential=sys.potential,
        grad_potential=sys.grad_potential,
        hess_potential=sys.hess_potential,
        force=sys.force,
        accel=lambda q, v: -q - gamma * v,
        params={"gamma": gamma},
    )


# ---------------------------------------------------------------------------


def _pendulum_instance():
    return ProblemInstance(pendulum(), np.array([math.pi / 2]), np.array([0.0]), 0.1, 500.0)


def _kepler_instance():
    return ProblemInstance(kepler2d(), np.array([1.0, 0.0]), np.array([0.0, 0.8]), 0.25, 250.0)


def _henon_instance(H0: float = 1.0 / 12.0, p2: float = 0.0):
    p1 = math.sqrt(2.0 * H0 - p2 * p2)
    return ProblemInstance(
        henon_heiles(),
        np.array([0.0, 0.0]),
        np.array([p1, p2]),
        0.1,
        1000.0,
        metadata={"H0": H0, "p2": p2, "ic": "q=(0,0), p1 from energy level"},
    )


def _fpu_instance(omega: float = 50.0):
    q, p = fpu_from_oscillator([1.0, 0.0, 0.0], [1.0 / omega, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 0.0, 0.0])
    return ProblemInstance(fpu(omega), q, p, 0.01, 100.0, metadata={"omega": omega})


def _outer_instance(path=None):
    names, m, x, v = load_outer_solar(path)
    return ProblemInstance(
        outer_solar(m),
        x.reshape(-1),
        (m[:, None] * v).reshape(-1),
        400.0,
        200000.0,
        metadata={"bodies": names},
    )


def _free_instance():
    return ProblemInstance(free_particle(2), np.array([0.3, -1.0]), np.array([1.2, 0.4]), 0.1, 10.0)


def _harmonic_instance():
    return ProblemInstance(harmonic_oscillator(), np.array([1.0]), np.array([0.0]), 0.1, 100.0)


PROBLEMS = {
    "pendulum": _pendulum_instance,
    "kepler2d": _kepler_instance,
    "henon_heiles": _henon_instance,
    "fpu": _fpu_instance,
    "outer_solar": _outer_instance,
    "free_particle": _free_instance,
    "harmonic": _harmonic_instance,
}


def make_problem(name: str, **kwargs) -> ProblemInstance:
    try:
        factory = PROBLEMS[name]
    except KeyError:
        raise UnknownProblemError(f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}") from None
    return factory(**kwargs)


def kepler_invariants(q, p):
    """Energy and angular momentum ``q1 p2 - q2 p1`` of a planar Kepler state."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    if q.shape[-1] != 2:
        raise ValueError("Kepler state is two-dimensional")
    H = 0.5 * np.sum(p * p, axis=-1) - 1.0 / np.sqrt(np.sum(q * q, axis=-1))
    return H, q[..., 0] * p[..., 1] - q[..., 1] * p[..., 0]
