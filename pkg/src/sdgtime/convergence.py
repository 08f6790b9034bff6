"""Convergence studies and classical Runge-Kutta baselines."""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dgref import dg_integrate
from .ivp import IvpProblem
from .schemes import NewtonOptions, SchemeConfig, integrate

REFERENCE_DEGREE = 9
REFERENCE_NEWTON = NewtonOptions(tol=1e-15, max_iter=40)


@dataclass(frozen=True)
class RungeKutta:
    name: str
    A: tuple
    b: tuple
    c: tuple

    @property
    def label(self):
        return self.name


RK4 = RungeKutta(
    "RK4",
    ((), (0.5,), (0.0, 0.5), (0.0, 0.0, 1.0)),
    (1 / 6, 1 / 3, 1 / 3, 1 / 6),
    (0.0, 0.5, 0.5, 1.0),
)
RK3 = RungeKutta(
    "RK3",
    ((), (0.5,), (-1.0, 2.0)),
    (1 / 6, 2 / 3, 1 / 6),
    (0.0, 0.5, 1.0),
)
RK_METHODS = {"RK4": RK4, "RK3": RK3}


def rk_step(problem: IvpProblem, method: RungeKutta, u, t, dt):
    k = []
    for i, ci in enumerate(method.c):
        y = u + dt * sum((a * kj for a, kj in zip(method.A[i], k)), np.zeros_like(u))
        k.append(np.asarray(problem.rhs(t + ci * dt, y)))
    return u + dt * sum(b * kj for b, kj in zip(method.b, k))


def rk_integrate(problem: IvpProblem, method: RungeKutta, n_steps):
    dt = problem.t_end / n_steps
    u = problem.u0.astype(np.result_type(problem.u0, float))
    for n in range(n_steps):
        u = rk_step(problem, method, u, n * dt, dt)
    return u


def endpoint(problem: IvpProblem, method, n_steps):
    """u(T) after n_steps uniform steps of a SchemeConfig or RungeKutta."""
    if isinstance(method, RungeKutta):
        return rk_integrate(problem, method, n_steps)
    return integrate(problem, method, n_steps).states[-1]


def steps_for(t_end, dt):
    n = t_end / dt
    k = int(round(n))
    if k < 1 or abs(n - k) > 1e-9 * max(1.0, n):
        raise ValueError(f"dt={dt} does not divide t_end={t_end}")
    return k


def reference_endpoint(problem: IvpProblem, n_steps, degree=REFERENCE_DEGREE,
                       newton=REFERENCE_NEWTON):
    """Fully converged DG solution of high degree on a fine grid."""
    return dg_integrate(problem, degree, n_steps, newton)


@dataclass
class ConvergenceTable:
    """Endpoint errors (max over time-step endpoint, per component) and orders.

    ``orders[0]`` is all None; later rows hold log(e_prev/e_cur)/log(dt_prev/dt_cur),
    None where an error is zero or not finite.
    """

    method: str
    dts: list
    errors: np.ndarray
    orders: list
    reference: str
    metadata: dict = field(default_factory=dict)

    def order(self, row, comp=0):
        return self.orders[row][comp]

    def rows(self):
        for dt, err, ords in zip(self.dts, self.errors, self.orders):
            yield dt, err, ords


def observed_orders(dts, errors):
    errors = np.asarray(errors, dtype=float)
    out = [[None] * errors.shape[1]]
    for i in range(1, len(dts)):
        row = []
        for c in range(errors.shape[1]):
            a, b = errors[i - 1, c], errors[i, c]
            if a > 0 and b > 0 and math.isfinite(a) and math.isfinite(b):
                row.append(math.log(a / b) / math.log(dts[i - 1] / dts[i]))
            else:
                row.append(None)
        out.append(row)
    return out


def run_convergence(problem: IvpProblem, method, dt_list, reference=None,
                    reference_steps: Optional[int] = None) -> ConvergenceTable:
    """Errors at u(T) for each dt in ``dt_list`` (strictly decreasing).

    ``reference`` may be an array (the true u(T)); by default the analytic
    solution is used when the problem has one, otherwise a degree-9 DG
    solution on ``reference_steps`` steps (default: half the finest dt).
    """
    dts = [float(d) for d in dt_list]
    if not dts or any(a <= b for a, b in zip(dts, dts[1:])):
        raise ValueError("dt_list must be non-empty and strictly decreasing")
    steps = [steps_for(problem.t_end, d) for d in dts]
    if reference is not None:
        ref = np.asarray(reference)
        ref_desc = "given"
    elif problem.exact is not None:
        ref = np.asarray(problem.exact(problem.t_end))
        ref_desc = "analytic"
    else:
        n_ref = reference_steps or 2 * steps[-1]
        ref = reference_endpoint(problem, n_ref)
        ref_desc = f"DG p={REFERENCE_DEGREE}, {n_ref} steps"
    errors = np.array([np.abs(endpoint(problem, method, n) - ref) for n in steps])
    label = method.label
    return ConvergenceTable(label, dts, errors, observed_orders(dts, errors), ref_desc,
                            {"problem": problem.name, "error": "endpoint, per component"})
