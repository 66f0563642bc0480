import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from taylorvi import jets
from taylorvi import problems as P

K = 6
coeff_arrays = arrays(np.float64, K + 1, elements=st.floats(-2, 2, allow_nan=False))


def _truncated_product(a, b):
    full = np.convolve(a, b)
    return full[: K + 1]


@settings(max_examples=60, deadline=None)
@given(coeff_arrays, coeff_arrays)
def test_product_matches_polynomial_multiplication(a, b):
    got = (jets.Jet.from_coeffs(a) * jets.Jet.from_coeffs(b)).coeffs
    assert np.allclose(got, _truncated_product(a, b), atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(coeff_arrays, coeff_arrays)
def test_division_inverts_product(a, b):
    b = b.copy()
    b[0] = 1.0 + abs(b[0])
    prod = jets.Jet.from_coeffs(a) * jets.Jet.from_coeffs(b)
    back = prod / jets.Jet.from_coeffs(b)
    assert np.allclose(back.coeffs, a, atol=1e-9)


@pytest.mark.parametrize(
    "fn, derivs",
    [
        ("exp", lambda x, k: math.exp(x)),
        ("sin", lambda x, k: math.sin(x + k * math.pi / 2)),
        ("cos", lambda x, k: math.cos(x + k * math.pi / 2)),
    ],
)
def test_elementary_series_of_identity(fn, derivs):
    x0 = 0.37
    got = jets.series_elem(jets.Jet.variable(x0, K), fn).coeffs
    expect = [derivs(x0, k) / math.factorial(k) for k in range(K + 1)]
    assert np.allclose(got, expect, atol=1e-14)


def test_log_power_sqrt_series():
    x0 = 1.7
    x = jets.Jet.variable(x0, K)
    k = np.arange(1, K + 1)
    log_expect = np.concatenate([[math.log(x0)], (-1.0) ** (k + 1) / (k * x0**k)])
    assert np.allclose(jets.log(x).coeffs, log_expect, atol=1e-14)
    # (x0 + t)^alpha = sum binom(alpha, k) x0^(alpha-k) t^k
    alpha = -1.5
    binom = [math.prod(alpha - i for i in range(j)) / math.factorial(j) for j in range(K + 1)]
    expect = [b * x0 ** (alpha - j) for j, b in enumerate(binom)]
    assert np.allclose(jets.power(x, alpha).coeffs, expect, rtol=1e-13)
    assert np.allclose(jets.sqrt(x).coeffs, jets.power(x, 0.5).coeffs, rtol=1e-13)
    assert np.allclose(jets.inv_sqrt(x).coeffs, jets.power(x, -0.5).coeffs, rtol=1e-13)


def test_functions_dispatch_on_plain_numbers():
    assert jets.sin(0.3) == pytest.approx(math.sin(0.3))
    assert jets.power(np.array([4.0]), 0.5)[0] == pytest.approx(2.0)


def test_domain_and_singular_errors():
    with pytest.raises(jets.SeriesDomainError):
        jets.log(jets.Jet.variable(-1.0, 3))
    with pytest.raises(jets.SingularSeriesError):
        jets.Jet.variable(0.0, 3) / jets.Jet.variable(0.0, 3)
    with pytest.raises(ValueError):
        jets.series_arith(jets.Jet.variable(1.0, 3), jets.Jet.variable(1.0, 4), "add")
    with pytest.raises(ValueError):
        jets.series_elem(jets.Jet.variable(1.0, 3), "tan")


def test_dual_parts_follow_chain_rule():
    # d/dx of the series of sin(x + t): seed the constant term
    c = np.zeros((K + 1, 2))
    c[0] = [0.4, 1.0]
    c[1, 0] = 1.0
    out = jets.sin(jets.Jet(c))
    # partial of coefficient k w.r.t. x0 is the coefficient k of cos(x0 + t)
    assert np.allclose(out.partials[:, 0], jets.cos(jets.Jet.variable(0.4, K)).coeffs, atol=1e-14)


def test_evaluation_and_horner():
    a = np.array([1.0, -2.0, 0.5, 3.0])
    assert jets.Jet.from_coeffs(a)(0.3) == pytest.approx(np.polynomial.polynomial.polyval(0.3, a))


def test_prolong_harmonic_oscillator_closed_form():
    s = P.harmonic_oscillator(2.0)
    q0, v0 = np.array([0.6]), np.array([-0.2])
    Q = jets.prolong(s, q0, v0, 9).Q[0]
    w = 2.0
    expect = [
        (q0[0] * w**k * math.cos(k * math.pi / 2) + v0[0] * w ** (k - 1) * math.sin(k * math.pi / 2)) / math.factorial(k)
        for k in range(10)
    ]
    assert np.allclose(Q, expect, atol=1e-14)


def test_prolong_free_particle_is_linear():
    s = P.free_particle(2)
    c = jets.prolong(s, np.array([1.0, 2.0]), np.array([0.5, -1.0]), 4)
    assert np.allclose(c.Q[:, 2:], 0.0)


def test_prolong_velocity_dependent_field():
    s = P.damped_oscillator(0.3)
    q0, v0 = np.array([1.0]), np.array([0.0])
    c = jets.prolong(s, q0, v0, 5)
    # q'' = -q - gamma q'
    d = jets.derivatives(c)[0]
    assert d[2] == pytest.approx(-d[0] - 0.3 * d[1])
    assert d[3] == pytest.approx(-d[1] - 0.3 * d[2])
    assert d[4] == pytest.approx(-d[2] - 0.3 * d[3])


def test_prolong_sensitivities_complex_step():
    s = P.kepler2d()
    q0, v0 = np.array([0.9, 0.2]), np.array([-0.1, 1.1])
    c = jets.prolong(s, q0, v0, 6, with_sensitivities=True)
    eps = 1e-30
    for j in range(2):
        e = np.zeros(2)
        e[j] = eps
        dq = np.imag(jets.prolong(s, q0 + 1j * e, v0, 6).Q) / eps
        dv = np.imag(jets.prolong(s, q0, v0 + 1j * e, 6).Q) / eps
        assert np.allclose(c.dQdq0[:, :, j], dq.T, rtol=1e-12, atol=1e-14)
        assert np.allclose(c.dQdv0[:, :, j], dv.T, rtol=1e-12, atol=1e-14)


def test_prolong_batches():
    s = P.pendulum()
    q = np.array([[0.1], [0.5], [1.0]])
    v = np.array([[0.0], [0.3], [-0.2]])
    batched = jets.prolong(s, q, v, 5).Q
    for i in range(3):
        assert np.allclose(batched[i], jets.prolong(s, q[i], v[i], 5).Q)


def test_eval_state_and_errors():
    s = P.harmonic_oscillator()
    c = jets.prolong(s, np.array([1.0]), np.array([0.0]), 4)
    q, v = jets.eval_state(c, 0.1, 3)
    assert q[0] == pytest.approx(1 - 0.01 / 2, abs=1e-12)
    assert v[0] == pytest.approx(-0.1 + 0.001 / 6, abs=1e-12)
    with pytest.raises(ValueError):
        jets.eval_state(c, 0.1, 4)
    with pytest.raises(ValueError):
        jets.prolong(s, np.array([1.0]), np.array([0.0]), 0)


@pytest.mark.parametrize("fn", ["sin", "cos", "exp", "ln", "sqrt", "inv_sqrt"])
def test_dual_parts_match_complex_step(fn):
    # seed the derivative with respect to the constant term of 1.3 + 0.4 t - 0.2 t^2
    base = np.zeros(K + 1)
    base[:3] = [1.3, 0.4, -0.2]
    c = np.zeros((K + 1, 2))
    c[:, 0] = base
    c[0, 1] = 1.0
    dual = jets.series_elem(jets.Jet(c), fn).partials[:, 0]
    pert = base.astype(complex)
    pert[0] += 1e-30j
    cs = np.imag(jets.series_elem(jets.Jet.from_coeffs(pert), fn).coeffs) / 1e-30
    assert np.allclose(dual, cs, rtol=1e-12, atol=1e-14)
