"""Damped Newton iteration for small dense nonlinear systems."""

from dataclasses import dataclass

import numpy as np


class SolverError(RuntimeError):
    pass


@dataclass
class NewtonInfo:
    residual: float
    iterations: int
    converged: bool
    worst_equation: int = -1


def fd_jacobian(fun, x, f0=None, step=1e-7):
    if f0 is None:
        f0 = fun(x)
    n = len(x)
    J = np.empty((len(f0), n))
    for i in range(n):
        h = step * max(1.0, abs(x[i]))
        xp = x.copy()
        xp[i] += h
        J[:, i] = (fun(xp) - f0) / h
    return J


def damped_newton(fun, x0, jac=None, tol=1e-11, scale=1.0, maxiter=100,
                  fd_step=1e-7, max_step=None):
    """Solve fun(x) = 0 by Newton with backtracking line search.

    Convergence: max|fun(x)| < tol * scale. Returns (x, NewtonInfo).
    max_step caps the sup-norm of each Newton step, which keeps the
    iteration inside the basin when the Jacobian has a soft mode.
    """
    x = np.asarray(x0, dtype=float).copy()
    f = fun(x)
    best = float(np.max(np.abs(f))) if f.size else 0.0
    it = 0
    while best >= tol * scale and it < maxiter:
        J = jac(x) if jac is not None else fd_jacobian(fun, x, f, fd_step)
        try:
            if J.shape[0] == J.shape[1]:
                dx = np.linalg.solve(J, -f)
            else:
                dx = np.linalg.lstsq(J, -f, rcond=None)[0]
        except np.linalg.LinAlgError as exc:
            raise SolverError(f"singular Jacobian at iteration {it}") from exc
        frac = 1.0
        if max_step is not None:
            nrm = float(np.max(np.abs(dx)))
            if nrm > max_step:
                frac = max_step / nrm
                dx *= frac
        lam = 1.0
        accepted = False
        for _ in range(40):
            xt = x + lam * dx
            ft = fun(xt)
            if np.max(np.abs(ft)) < best * (1.0 - 0.25 * lam * frac) or \
               np.max(np.abs(ft)) < tol * scale:
                x, f = xt, ft
                best = float(np.max(np.abs(f)))
                accepted = True
                break
            lam *= 0.5
        if not accepted:
            info = NewtonInfo(best, it, False, int(np.argmax(np.abs(f))))
            return x, info
        it += 1
    converged = best < tol * scale
    worst = int(np.argmax(np.abs(f))) if f.size else -1
    return x, NewtonInfo(best, it, converged, worst)
