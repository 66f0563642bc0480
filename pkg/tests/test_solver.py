import numpy as np
import pytest

from taylorvi.solver import (
    JacobianCache,
    NewtonConfig,
    NonConvergenceError,
    SingularJacobianError,
    complex_step_jacobian,
    finite_difference_jacobian,
    newton_solve,
)


def residual(x):
    return np.stack([x[..., 0] ** 2 + x[..., 1] ** 2 - 4.0, x[..., 0] * x[..., 1] - 1.0], axis=-1)


def exact_jacobian(x):
    return np.array([[2 * x[0], 2 * x[1]], [x[1], x[0]]])


def test_newton_converges_quadratically():
    x, rep = newton_solve(residual, exact_jacobian, np.array([2.0, 0.3]))
    assert rep.converged and rep.iterations <= 8
    assert np.max(np.abs(residual(x))) <= 1e-12


def test_complex_step_and_fd_jacobians():
    x = np.array([1.3, -0.7])
    J = exact_jacobian(x)
    assert np.allclose(complex_step_jacobian(residual)(x), J, atol=1e-15)
    assert np.allclose(finite_difference_jacobian(residual)(x), J, atol=1e-7)
    _, rep = newton_solve(residual, None, np.array([2.0, 0.3]))
    assert rep.jacobian == "finite-difference"


def test_badly_scaled_residual_is_not_rejected():
    # components in very different units; the max-norm grows on the first
    # full step although that step is exactly right
    def f(x):
        return np.stack([x[..., 0] - 3.0 + 1e3 * (x[..., 1] - 1.0) ** 2, 1e-9 * (x[..., 1] - 1.0)], axis=-1)

    x, rep = newton_solve(f, complex_step_jacobian(f), np.array([3.0, 1.01]))
    assert rep.converged and rep.iterations <= 6
    assert x == pytest.approx([3.0, 1.0])


def test_nonconvergence_carries_iterate():
    def f(x):
        return np.array([x[0] ** 2 + 1.0])

    with pytest.raises(NonConvergenceError) as info:
        newton_solve(f, lambda x: np.array([[2 * x[0]]]), np.array([0.5]), NewtonConfig(max_iters=5))
    assert info.value.report.iterations == 5
    assert info.value.x is not None


def test_singular_jacobian():
    with pytest.raises(SingularJacobianError):
        newton_solve(lambda x: x - 1.0, lambda x: np.zeros((2, 2)), np.zeros(2))


def test_config_validation():
    with pytest.raises(ValueError):
        NewtonConfig(tol=0)
    with pytest.raises(ValueError):
        NewtonConfig(damping=1.0)
    with pytest.raises(ValueError):
        newton_solve(residual, exact_jacobian, np.array([np.nan, 1.0]))
    assert NewtonConfig().with_tol(1e-6).tol == 1e-6


def test_jacobian_cache_reuses_matrix():
    cache = JacobianCache()
    for shift in np.linspace(0.0, 0.05, 6):
        def f(x, s=shift):
            return residual(x) - s

        x, rep = newton_solve(f, complex_step_jacobian(f), np.array([1.95, 0.52]), cache=cache)
        assert np.max(np.abs(f(x))) <= 1e-12
    assert "reused" in rep.jacobian
    assert cache.evaluations < 6
