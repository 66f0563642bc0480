import numpy as np
import pytest

from taylorvi import baselines
from taylorvi import problems as P


def _exact_ho(q0, p0, t):
    return q0 * np.cos(t) + p0 * np.sin(t), -q0 * np.sin(t) + p0 * np.cos(t)


def test_closed_forms_on_harmonic_oscillator():
    s = P.harmonic_oscillator()
    q0, p0, h = np.array([1.0]), np.array([0.5]), 0.1
    qa, pa = baselines.closed_form_step(s, q0, p0, h, "euler_a")
    assert pa == pytest.approx(p0 - h * q0)
    assert qa == pytest.approx(q0 + h * pa)
    qb, pb = baselines.closed_form_step(s, q0, p0, h, "euler_b")
    assert qb == pytest.approx(q0 + h * p0)
    assert pb == pytest.approx(p0 - h * qb)
    # Stormer-Verlet is a half step of Euler-A followed by one of Euler-B
    qm, pm = baselines.closed_form_step(s, q0, p0, h / 2, "euler_a")
    qv, pv = baselines.closed_form_step(s, qm, pm, h / 2, "euler_b")
    assert np.allclose(baselines.closed_form_step(s, q0, p0, h, "stormer_verlet"), (qv, pv))


@pytest.mark.parametrize("r", [1, 2, 4, 6])
def test_taylor_order(r):
    s = P.harmonic_oscillator()
    q0, p0 = np.array([0.3]), np.array([-0.8])
    errs = []
    hs = np.array([0.2, 0.1, 0.05])
    for h in hs:
        q, p = q0, p0
        n = int(round(1.0 / h))
        for _ in range(n):
            q, p = baselines.taylor_phase_step(s, q, p, h, r)
        qe, pe = _exact_ho(q0, p0, 1.0)
        errs.append(max(abs(q - qe)[0], abs(p - pe)[0]))
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    assert abs(slope - r) < 0.3


def test_taylor_velocity_uses_one_more_derivative():
    s = P.harmonic_oscillator()
    q1, v1 = baselines.taylor_step(s, np.array([1.0]), np.array([0.0]), 0.1, 1)
    assert q1[0] == pytest.approx(1.0)
    assert v1[0] == pytest.approx(-0.1)


def test_invalid_baselines():
    s = P.pendulum()
    with pytest.raises(ValueError):
        baselines.taylor_step(s, np.zeros(1), np.zeros(1), 0.1, 0)
    with pytest.raises(ValueError):
        baselines.closed_form_step(s, np.zeros(1), np.zeros(1), 0.1, "taylor")
    with pytest.raises(ValueError):
        baselines.closed_form_step(s, np.zeros(1), np.zeros(1), 0.1, "rk4")
    with pytest.raises(ValueError):
        baselines.Baseline(baselines.BaselineKind.TAYLOR, 0)
