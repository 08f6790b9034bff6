"""Fully implicit nodal DG step: the fixed point every SDG iteration targets."""

import numpy as np

from .ivp import IvpProblem, numerical_jacobian, state_norm
from .radau import operators
from .schemes import NewtonFailure, NewtonOptions, SchemeConfig, init_predictor


def dg_residual(problem: IvpProblem, p, u_n, t_n, dt, U):
    """L U + dt/2 W F(U) + B, shape (p+1, d)."""
    ops = operators(p)
    U = np.asarray(U)
    times = t_n + 0.5 * (1.0 + ops.nodes) * dt
    F = np.array([np.asarray(problem.rhs(t, u)) for t, u in zip(times, U)])
    B = np.outer(ops.boundary, np.atleast_1d(u_n))
    return ops.L @ U + 0.5 * dt * ops.weights[:, None] * F + B


def dg_step_newton(problem: IvpProblem, p, u_n, t_n, dt, newton=NewtonOptions(),
                   return_iterations=False):
    """Solve the nodal DG system of one step by Newton's method.

    The initial guess is the implicit Euler march through the nodes.
    Returns U of shape (p+1, d) (and the Newton count if requested).
    """
    ops = operators(p)
    u_n = np.atleast_1d(np.asarray(u_n))
    d = u_n.size
    n = p + 1
    cfg = SchemeConfig("ImSDG", p, 0, newton=newton)
    U = init_predictor(problem, cfg, u_n, t_n, dt, ops).U
    times = t_n + 0.5 * (1.0 + ops.nodes) * dt
    big_L = np.kron(ops.L, np.eye(d))
    res = np.inf
    for it in range(newton.max_iter + 1):
        R = dg_residual(problem, p, u_n, t_n, dt, U)
        res = state_norm(R)
        if res <= newton.tol:
            return (U, it) if return_iterations else U
        if it == newton.max_iter or not np.isfinite(res):
            break
        J = big_L.astype(np.result_type(U, float), copy=True)
        for m in range(n):
            Jm = numerical_jacobian(problem, times[m], U[m])
            J[m * d:(m + 1) * d, m * d:(m + 1) * d] += 0.5 * dt * ops.weights[m] * Jm
        delta = np.linalg.solve(J, R.reshape(-1)).reshape(n, d)
        U = U - delta
        if state_norm(delta) <= 8 * np.finfo(float).eps * (1.0 + state_norm(U)):
            return (U, it + 1) if return_iterations else U
    raise NewtonFailure(res, t_n=t_n)


def dg_step_linear(A, p, u_n, dt):
    """Direct solve of (L (x) I + dt/2 M (x) A) U = -B for u' = A u.

    ``A`` may be a scalar (real or complex) or a d x d matrix.  The solve is
    for the deviation V = U - u_n: since L 1 = -boundary, it satisfies
    (L (x) I + dt/2 M (x) A) V = -dt/2 (M (x) A)(1 (x) u_n), so V is exactly
    zero when A = 0.
    """
    ops = operators(p)
    A = np.atleast_2d(np.asarray(A))
    u_n = np.atleast_1d(np.asarray(u_n))
    d = u_n.size
    MA = 0.5 * dt * np.kron(ops.M, A)
    K = np.kron(ops.L, np.eye(d)) + MA
    base = np.tile(u_n, p + 1).astype(np.result_type(K, u_n))
    V = np.linalg.solve(K, -(MA @ base))
    return (base + V).reshape(p + 1, d)


def dg_amplification(p, lam, dt=1.0):
    """One-step multiplier of the exact DG solution on u' = lam u, u(0) = 1."""
    return complex(dg_step_linear(complex(lam), p, np.array([1.0 + 0j]), dt)[-1, 0])


def dg_integrate(problem: IvpProblem, p, n_steps, newton=NewtonOptions()):
    """Endpoint after n_steps uniform fully implicit DG steps."""
    dt = problem.t_end / n_steps
    u = problem.u0
    for n in range(n_steps):
        u = dg_step_newton(problem, p, u, n * dt, dt, newton)[-1]
    return u
