import numpy as np
import pytest

from taylorvi.quadrature import QuadratureConfigError, check_order, gauss_legendre, make_rule

# tabulated Gauss-Legendre nodes on [0, 1]
TABLE = {
    1: ([0.5], [1.0]),
    2: ([0.5 - np.sqrt(3) / 6, 0.5 + np.sqrt(3) / 6], [0.5, 0.5]),
    3: ([0.5 - np.sqrt(15) / 10, 0.5, 0.5 + np.sqrt(15) / 10], [5 / 18, 8 / 18, 5 / 18]),
}


@pytest.mark.parametrize("m", sorted(TABLE))
def test_gauss_matches_table(m):
    c, b = gauss_legendre(m)
    assert np.allclose(c, TABLE[m][0], atol=1e-15)
    assert np.allclose(b, TABLE[m][1], atol=1e-15)


@pytest.mark.parametrize(
    "kind, order, symmetric",
    [
        ("rect_left", 1, False),
        ("rect_right", 1, False),
        ("midpoint", 2, True),
        ("trapezoid", 2, True),
        ("simpson", 4, True),
        ("gauss2", 4, True),
        ("gauss(3)", 6, True),
        ("gauss5", 10, True),
    ],
)
def test_rule_orders(kind, order, symmetric):
    rule = make_rule(kind)
    assert rule.order == order
    assert check_order(rule) == order
    assert rule.symmetric is symmetric
    assert rule.b.sum() == pytest.approx(1.0)


def test_make_rule_spellings_and_passthrough():
    a = make_rule("gauss", 4)
    assert a == make_rule("gauss4") == make_rule("Gauss(4)")
    assert make_rule(a) is a


@pytest.mark.parametrize("bad", ["boole", "gauss", "gauss0", ""])
def test_unknown_rules(bad):
    with pytest.raises(QuadratureConfigError):
        make_rule(bad)
