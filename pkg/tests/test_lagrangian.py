import numpy as np
import pytest

from taylorvi import lagrangian as lag
from taylorvi import problems as P
from taylorvi.lagrangian import StepError, TviConfig
from taylorvi.solver import NewtonConfig


def exact_ho_lagrangian(q0, q1, h, w=1.0):
    return w / (2 * np.sin(w * h)) * ((q0**2 + q1**2) * np.cos(w * h) - 2 * q0 * q1)


def test_r0_trapezoid_closed_form():
    s = P.pendulum()
    q0, q1, h = np.array([0.4]), np.array([0.47]), 0.1
    v = (q1 - q0) / h
    expect = h / 2 * (s.lagrangian(q0, v) + s.lagrangian(q1, v))
    assert lag.discrete_lagrangian(s, q0, q1, h, TviConfig(0, "trapezoid")) == pytest.approx(float(expect), abs=1e-15)


def test_free_particle_is_exact():
    s = P.free_particle(2)
    q0, q1, h = np.array([0.0, 1.0]), np.array([0.3, 0.8]), 0.2
    exact = np.sum((q1 - q0) ** 2) / (2 * h)
    for r, rule in [(0, "rect_left"), (1, "trapezoid"), (3, "gauss2")]:
        assert lag.discrete_lagrangian(s, q0, q1, h, TviConfig(r, rule)) == pytest.approx(exact, rel=1e-14)


@pytest.mark.parametrize("r, rule", [(1, "trapezoid"), (3, "gauss2"), (5, "gauss3")])
def test_approaches_exact_discrete_lagrangian(r, rule):
    s = P.harmonic_oscillator()
    q0 = np.array([0.5])
    errs = []
    hs = [0.2, 0.1]
    for h in hs:
        q1 = np.array([0.5 * np.cos(h) + 0.3 * np.sin(h)])
        errs.append(abs(lag.discrete_lagrangian(s, q0, q1, h, TviConfig(r, rule)) - exact_ho_lagrangian(q0[0], q1[0], h)))
    order = min(r + 1, TviConfig(r, rule).rule.order)
    # local error of L_d is O(h^(order+1))
    assert np.log2(errs[0] / errs[1]) > order + 1 - 0.5


def test_step_satisfies_discrete_euler_lagrange():
    s = P.kepler2d()
    cfg = TviConfig(3, "gauss2")
    q0, p0, h = np.array([1.0, 0.1]), np.array([0.05, 0.9]), 0.2
    q1, p1, rep = lag.step(s, q0, p0, h, cfg)
    assert rep.converged and rep.jacobian == "complex-step"
    assert np.allclose(-lag.d1_Ld(s, q0, q1, h, cfg), p0, atol=1e-11)
    assert np.allclose(lag.d2_Ld(s, q0, q1, h, cfg), p1, atol=1e-11)


def test_shooting_and_nodes():
    s = P.pendulum()
    cfg = TviConfig(2, "simpson")
    q0, q1, h = np.array([0.3]), np.array([0.35]), 0.1
    bv = lag.solve_initial_velocity(s, q0, q1, h, cfg)
    nodes = lag.nodal_states(bv, cfg.rule, h, cfg.r, q1=q1)
    assert len(nodes) == 3
    assert np.allclose(nodes[0][0], q0) and np.allclose(nodes[-1][0], q1)
    # v~0 sensitivities: X(q0, v~0(q0, q1)) = q1 so dv/dq1 = X_v^{-1}
    eps = 1e-6
    vp = lag.solve_initial_velocity(s, q0, q1 + eps, h, cfg).v_tilde0
    vm = lag.solve_initial_velocity(s, q0, q1 - eps, h, cfg).v_tilde0
    assert np.allclose((vp - vm) / (2 * eps), bv.dv_dq1[:, 0], rtol=1e-6)


def test_taylor_guess_is_taylor_position():
    s = P.harmonic_oscillator()
    g = lag.taylor_guess(s, np.array([1.0]), np.array([0.0]), 0.1, 2)
    assert g[0] == pytest.approx(1 - 0.005)


def test_errors():
    s = P.pendulum()
    with pytest.raises(ValueError):
        TviConfig(-1)
    with pytest.raises(ValueError):
        lag.step(s, np.array([0.1]), np.array([0.0]), 0.0, TviConfig(1))
    with pytest.raises(ValueError):
        lag.step(s, np.array([np.nan]), np.array([0.0]), 0.1, TviConfig(1))
    with pytest.raises(StepError):
        lag.step(P.kepler2d(), np.array([1.0, 0.0]), np.array([0.0, 1.2]), 0.5, TviConfig(3, "gauss2", NewtonConfig(tol=1e-300, max_iters=2)))

