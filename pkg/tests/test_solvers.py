import numpy as np
import pytest

from netforge.solvers import SolverError, damped_newton, fd_jacobian


def test_scalar_root():
    x, info = damped_newton(lambda x: np.array([x[0] ** 2 - 4.0]),
                            np.array([3.0]))
    assert info.converged
    assert abs(x[0] - 2.0) < 1e-10


def test_2d_system_with_jacobian():
    def fun(x):
        return np.array([x[0] ** 2 + x[1] ** 2 - 1.0, x[0] - x[1]])

    def jac(x):
        return np.array([[2 * x[0], 2 * x[1]], [1.0, -1.0]])

    x, info = damped_newton(fun, np.array([1.0, 0.2]), jac=jac)
    assert info.converged
    r = 1 / np.sqrt(2)
    assert np.allclose(x, [r, r], atol=1e-10)


def test_fd_jacobian_matches_analytic():
    def fun(x):
        return np.array([np.sin(x[0]) + x[1], x[0] * x[1]])

    x = np.array([0.3, -0.7])
    J = fd_jacobian(fun, x)
    exact = np.array([[np.cos(0.3), 1.0], [-0.7, 0.3]])
    assert np.max(np.abs(J - exact)) < 1e-6


def test_overdetermined_least_squares():
    # three consistent equations in two unknowns
    def fun(x):
        return np.array([x[0] - 1.0, x[1] - 2.0, x[0] + x[1] - 3.0])

    x, info = damped_newton(fun, np.zeros(2))
    assert info.converged
    assert np.allclose(x, [1.0, 2.0], atol=1e-10)


def test_singular_jacobian_raises():
    with pytest.raises(SolverError):
        damped_newton(lambda x: np.array([x[0] + x[1], x[0] + x[1]]),
                      np.array([1.0, 1.0]),
                      jac=lambda x: np.array([[1.0, 1.0], [1.0, 1.0]]))


def test_stall_reports_worst_equation():
    # no root: |f| has a positive floor, Newton must give up
    x, info = damped_newton(lambda x: np.array([x[0] ** 2 + 1.0]),
                            np.array([0.5]), maxiter=50)
    assert not info.converged
    assert info.worst_equation == 0
    assert info.residual >= 1.0


def test_max_step_caps_update():
    trace = []

    def fun(x):
        trace.append(x.copy())
        return np.array([x[0] - 100.0])

    x, info = damped_newton(fun, np.array([0.0]), max_step=1.0, maxiter=200)
    assert info.converged
    steps = np.abs(np.diff([t[0] for t in trace]))
    assert steps.max() <= 1.0 + 1e-12


def test_tol_scale():
    x, info = damped_newton(lambda x: np.array([x[0] - 1.0]),
                            np.array([5.0]), tol=1e-3, scale=10.0)
    assert info.converged
    assert info.residual < 1e-2
