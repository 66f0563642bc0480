import math

import numpy as np
import pytest

from taylorvi import jets
from taylorvi import problems as P

SYSTEMS = ["pendulum", "kepler2d", "henon_heiles", "fpu", "outer_solar"]


def _fd_grad(f, x, eps=1e-6):
    return np.array([(f(x + e) - f(x - e)) / (2 * eps) for e in np.eye(len(x)) * eps])


@pytest.mark.parametrize("name", SYSTEMS)
def test_gradient_hessian_force_consistent(name, rng):
    inst = P.make_problem(name)
    s = inst.system
    scale = 1e-2 if name == "outer_solar" else 1e-1
    q = inst.q0 + rng.uniform(-scale, scale, inst.q0.shape)
    g = s.grad_potential(q)
    eps = 1e-4 if name == "outer_solar" else 1e-6
    assert np.allclose(g, _fd_grad(s.potential, q, eps), rtol=1e-6, atol=1e-10 * max(1.0, np.abs(g).max()))
    Hs = s.hess_potential(q)
    assert np.allclose(Hs, _fd_grad(s.grad_potential, q, eps), rtol=1e-5, atol=1e-9 * max(1.0, np.abs(Hs).max()))
    assert np.allclose(s.force(q), -g)
    # the jet form of the force agrees with the numeric one
    Fj = s.force(jets.Jet.from_coeffs(q[:, None] * np.ones(3)))
    assert np.allclose(Fj.coeffs[:, 0], -g)


def test_reference_energies():
    assert P.make_problem("pendulum").energy0 == pytest.approx(9.8)
    assert P.make_problem("kepler2d").energy0 == pytest.approx(0.32 - 1.0)
    assert P.make_problem("henon_heiles").energy0 == pytest.approx(1 / 12)
    assert P.make_problem("free_particle").energy0 == pytest.approx(0.5 * (1.44 + 0.16))


def test_henon_heiles_potential():
    s = P.henon_heiles()
    q = np.array([0.2, -0.1])
    assert s.potential(q) == pytest.approx(0.5 * (0.04 + 0.01) + 0.04 * -0.1 - (-0.1) ** 3 / 3)


def test_fpu_oscillator_transform_roundtrip(rng):
    q, p = rng.normal(size=6), rng.normal(size=6)
    back = P.fpu_from_oscillator(*P.fpu_to_oscillator(q, p))
    assert np.allclose(back[0], q) and np.allclose(back[1], p)
    inst = P.make_problem("fpu")
    I = P.fpu_oscillatory_energy(inst.q0, inst.p0)
    assert I[3] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        P.fpu_oscillatory_energy(np.zeros(4), np.zeros(4))


def test_outer_solar_table_and_errors(tmp_path):
    names, m, x, v = P.load_outer_solar()
    assert len(names) == 6 and m[0] > 0.99 and x.shape == (6, 3)
    with pytest.raises(P.DataFileError):
        P.load_outer_solar(tmp_path / "missing.txt")
    bad = tmp_path / "bad.txt"
    bad.write_text("body mass x y z vx vy vz\nsun 1 0 0 0 0 0\n")
    with pytest.raises(P.DataFileError):
        P.load_outer_solar(bad)
    bad.write_text("body mass x y z vx vy vz\nsun -1 0 0 0 0 0 0\n")
    with pytest.raises(P.DataFileError):
        P.load_outer_solar(bad)


def test_barycentric_removes_total_momentum():
    _, m, x, v = P.load_outer_solar()
    q, p = P.barycentric(x.reshape(-1), (m[:, None] * v).reshape(-1), m)
    assert np.allclose(p.reshape(6, 3).sum(axis=0), 0.0, atol=1e-18)
    assert np.allclose((m[:, None] * q.reshape(6, 3)).sum(axis=0), 0.0, atol=1e-14)


def test_kepler_invariants():
    H, L = P.kepler_invariants(np.array([1.0, 0.0]), np.array([0.0, 0.8]))
    assert H == pytest.approx(-0.68) and L == pytest.approx(0.8)
    with pytest.raises(ValueError):
        P.kepler_invariants(np.zeros(3), np.zeros(3))


def test_unknown_problem():
    with pytest.raises(P.UnknownProblemError):
        P.make_problem("lorenz")


def test_energy_helper_and_field():
    s = P.pendulum()
    assert P.energy(s, [0.0], [1.0]) == pytest.approx(0.5)
    assert s.field(np.array([math.pi / 2]), np.array([0.0]))[0] == pytest.approx(-9.8)
