"""Iterative DG time stepping: ExDG, ExSDG, ImSDG, SISDG and the theta sweep.

One time step on [t_n, t_n + dt] starts from a predictor (Euler marching
through the Radau nodes, or the constant inflow value) and applies K sweeps.
Every sweep is a preconditioned fixed-point iteration for the quadrature
reduced DG system ``L U + dt/2 W F(U) + B = 0``; with an FAS correction
``tau`` it targets ``U + dt/2 Linv W F(U) + Linv B - tau = 0`` instead.
"""

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .ivp import IvpProblem, MissingSplit, fd_jacobian, state_norm
from .radau import OperatorSet, operators

VARIANTS = ("ExDG", "ExSDG", "ImSDG", "SISDG", "ImSDG-theta")
IMPLICIT_VARIANTS = ("ImSDG", "SISDG", "ImSDG-theta")
INITS = ("euler-march", "constant")
_EPS8 = 8 * np.finfo(float).eps


class NewtonFailure(RuntimeError):
    """An implicit node solve did not converge.

    Location attributes are filled in as the error propagates outwards
    (node by the solver, iteration/t_n by ``step``, step index by
    ``integrate``, level by the multilevel cycle).
    """

    def __init__(self, residual, node=None, t_n=None, iteration=None, step=None, level=None):
        self.residual = residual
        self.node = node
        self.t_n = t_n
        self.iteration = iteration
        self.step = step
        self.level = level
        super().__init__(self._message())

    def _message(self):
        where = [
            f"{k}={v}"
            for k, v in (
                ("step", self.step),
                ("t_n", self.t_n),
                ("iteration", self.iteration),
                ("level", self.level),
                ("node", self.node),
            )
            if v is not None
        ]
        return f"Newton failed ({', '.join(where)}), residual={self.residual:.3e}"

    def annotate(self, **where):
        for k, v in where.items():
            if getattr(self, k) is None:
                setattr(self, k, v)
        self.args = (self._message(),)
        return self


@dataclass(frozen=True)
class NewtonOptions:
    tol: float = 1e-12
    max_iter: int = 25


@dataclass(frozen=True)
class SchemeConfig:
    variant: str
    degree: int
    iterations: int
    theta: float = 1.0
    init: str = "euler-march"
    newton: NewtonOptions = field(default_factory=NewtonOptions)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.init not in INITS:
            raise ValueError(f"unknown init {self.init!r}; expected one of {INITS}")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if not 0.0 < self.theta <= 1.0:
            raise ValueError("theta must lie in (0, 1]")

    @property
    def implicit(self):
        return self.variant in IMPLICIT_VARIANTS

    @property
    def label(self):
        return f"{self.variant}_{self.degree}^{self.iterations}"


@dataclass
class SweepState:
    """Nodal iterate of one time step.

    ``U`` and ``F`` have shape (p+1, d).  ``FN``/``FS`` cache the split
    parts and are only kept by semi-implicit sweeps.
    """

    u_n: np.ndarray
    U: np.ndarray
    F: np.ndarray
    t_n: float
    dt: float
    tau: Optional[np.ndarray] = None
    FN: Optional[np.ndarray] = None
    FS: Optional[np.ndarray] = None

    @property
    def degree(self):
        return self.U.shape[0] - 1

    @property
    def times(self):
        return self.t_n + 0.5 * (1.0 + operators(self.degree).nodes) * self.dt

    @property
    def endpoint(self):
        return self.U[-1]

    def copy(self):
        c = lambda a: None if a is None else a.copy()
        return SweepState(c(self.u_n), c(self.U), c(self.F), self.t_n, self.dt,
                          c(self.tau), c(self.FN), c(self.FS))


def _eval(f, times, U):
    return np.array([np.asarray(f(t, u)) for t, u in zip(times, U)])


def refresh(state, problem, split=False):
    """Recompute the cached right-hand sides from ``state.U`` in place."""
    times = state.times
    if split:
        state.FN = _eval(problem.f_nonstiff, times, state.U)
        state.FS = _eval(problem.f_stiff, times, state.U)
        state.F = state.FN + state.FS
    else:
        state.F = _eval(problem.rhs, times, state.U)
        state.FN = state.FS = None
    return state


def make_state(problem, u_n, U, t_n, dt, split=False, tau=None):
    """Wrap given nodal values into a coherent SweepState."""
    U = np.array(U, dtype=np.result_type(np.asarray(U), np.asarray(u_n)))
    if U.ndim == 1:
        U = U[:, None]
    u_n = np.atleast_1d(np.asarray(u_n))
    state = SweepState(u_n, U, None, t_n, dt, tau)
    return refresh(state, problem, split)


def node_solve(c, coeff, f_impl, t_node, newton=NewtonOptions(), jac=None, guess=None):
    """Solve ``u = c + coeff * f_impl(t_node, u)`` by Newton's method.

    At least one Newton update is always taken, so a linear f is solved to
    rounding accuracy.  Converged when the residual max-norm is below
    ``newton.tol`` or at the rounding level of the terms it is made of,
    or when the update has shrunk to rounding level.
    """
    c = np.atleast_1d(np.asarray(c))
    if coeff == 0:
        return c.copy()
    u = (c if guess is None else np.atleast_1d(np.asarray(guess))).astype(
        np.result_type(c, guess if guess is not None else c), copy=True)
    eye = np.eye(u.size)
    res = np.inf
    for it in range(newton.max_iter + 1):
        fu = np.asarray(f_impl(t_node, u))
        r = u - c - coeff * fu
        res = state_norm(r)
        floor = _EPS8 * (state_norm(u) + state_norm(c) + abs(coeff) * state_norm(fu))
        if it > 0 and res <= max(newton.tol, floor):
            return u
        if it == newton.max_iter or not np.isfinite(res):
            break
        J = jac(t_node, u) if jac is not None else fd_jacobian(f_impl, t_node, u)
        delta = np.linalg.solve(eye - coeff * np.atleast_2d(J), r)
        u = u - delta
        if state_norm(delta) <= _EPS8 * (1.0 + state_norm(u)):
            return u
    raise NewtonFailure(res)


def _quad_term(ops, state):
    """dt/2 * Ltilde @ W F for the current cache."""
    w = ops.weights[:, None]
    return 0.5 * state.dt * (ops.Ltilde @ (w * state.F))


def _tau_term(ops, state):
    if state.tau is None:
        return np.zeros_like(state.U)
    return -(ops.LDelta @ state.tau)


def _solve_at(m, c, coeff, f, jac, t, guess, newton):
    try:
        return node_solve(c, coeff, f, t, newton, jac, guess)
    except NewtonFailure as err:
        raise err.annotate(node=m)


def exdg_sweep(state: SweepState, ops: OperatorSet, problem: IvpProblem) -> SweepState:
    """Plain fixed point U <- -dt/2 Linv W F(U) - Linv B (+ tau)."""
    w = ops.weights[:, None]
    B = np.outer(ops.boundary, state.u_n)
    U = -0.5 * state.dt * (ops.Linv @ (w * state.F)) - ops.Linv @ B
    if state.tau is not None:
        U = U + state.tau
    new = replace(state, U=U)
    return refresh(new, problem)


def exsdg_sweep(state: SweepState, ops: OperatorSet, problem: IvpProblem) -> SweepState:
    dth = 0.5 * state.dt
    w = ops.weights
    times = state.times
    S = _quad_term(ops, state) + _tau_term(ops, state)
    U = np.empty(state.U.shape, dtype=np.result_type(state.U, S))
    F = np.empty_like(U)
    U[0] = state.u_n + S[0]
    F[0] = problem.rhs(times[0], U[0])
    for m in range(ops.degree):
        U[m + 1] = U[m] + dth * w[m] * (F[m] - state.F[m]) + S[m + 1]
        F[m + 1] = problem.rhs(times[m + 1], U[m + 1])
    return replace(state, U=U, F=F, FN=None, FS=None)


def theta_sweep(state: SweepState, ops: OperatorSet, problem: IvpProblem,
                theta=1.0, newton=NewtonOptions()) -> SweepState:
    """Implicit sweep with the correction difference damped by ``theta``."""
    dth = 0.5 * state.dt
    w = ops.weights
    times = state.times
    S = _quad_term(ops, state) + _tau_term(ops, state)
    U = np.empty(state.U.shape, dtype=np.result_type(state.U, S))
    F = np.empty_like(U)
    prev = state.u_n
    for m in range(ops.degree + 1):
        coeff = theta * dth * w[m]
        c = prev - coeff * state.F[m] + S[m]
        U[m] = _solve_at(m, c, coeff, problem.rhs, problem.jacobian, times[m],
                         state.U[m], newton)
        F[m] = problem.rhs(times[m], U[m])
        prev = U[m]
    return replace(state, U=U, F=F, FN=None, FS=None)


def imsdg_sweep(state: SweepState, ops: OperatorSet, problem: IvpProblem,
                newton=NewtonOptions()) -> SweepState:
    return theta_sweep(state, ops, problem, 1.0, newton)


def sisdg_sweep(state: SweepState, ops: OperatorSet, problem: IvpProblem,
                newton=NewtonOptions()) -> SweepState:
    """IMEX sweep: f_N corrected explicitly, f_S implicitly."""
    f_n, f_s = problem.f_nonstiff, problem.f_stiff
    if state.FN is None or state.FS is None:
        state = refresh(state.copy(), problem, split=True)
    dth = 0.5 * state.dt
    w = ops.weights
    times = state.times
    S = _quad_term(ops, state) + _tau_term(ops, state)
    U = np.empty(state.U.shape, dtype=np.result_type(state.U, S))
    FN = np.empty_like(U)
    FS = np.empty_like(U)
    for m in range(ops.degree + 1):
        coeff = dth * w[m]
        if m == 0:
            c = state.u_n - coeff * state.FS[0] + S[0]
        else:
            c = (U[m - 1] + dth * w[m - 1] * (FN[m - 1] - state.FN[m - 1])
                 - coeff * state.FS[m] + S[m])
        U[m] = _solve_at(m, c, coeff, f_s, problem.stiff_jacobian, times[m],
                         state.U[m], newton)
        FN[m] = f_n(times[m], U[m])
        FS[m] = f_s(times[m], U[m])
    return replace(state, U=U, F=FN + FS, FN=FN, FS=FS)


def sweep(state, ops, problem, config: SchemeConfig, theta=None):
    """One sweep of the configured variant (theta only used by the theta scheme)."""
    v = config.variant
    if v == "ExDG":
        return exdg_sweep(state, ops, problem)
    if v == "ExSDG":
        return exsdg_sweep(state, ops, problem)
    if v == "SISDG":
        return sisdg_sweep(state, ops, problem, config.newton)
    return theta_sweep(state, ops, problem, 1.0 if theta is None else theta, config.newton)


def init_predictor(problem: IvpProblem, config: SchemeConfig, u_n, t_n, dt,
                   ops: Optional[OperatorSet] = None) -> SweepState:
    """Initial iterate U^0 for one step.

    ``euler-march`` takes an Euler step from t_n to the first node and then
    from node to node (implicit Euler for implicit variants), ``constant``
    copies u_n to every node.
    """
    ops = ops or operators(config.degree)
    u_n = np.atleast_1d(np.asarray(u_n))
    times = t_n + 0.5 * (1.0 + ops.nodes) * dt
    n = ops.degree + 1
    if config.init == "constant":
        U = np.tile(u_n, (n, 1))
    else:
        U = np.empty((n, u_n.size), dtype=np.result_type(u_n, problem.u0))
        prev_t, prev_u = t_n, u_n
        for m in range(n):
            h = times[m] - prev_t
            if config.implicit:
                try:
                    U[m] = node_solve(prev_u, h, problem.rhs, times[m], config.newton,
                                      problem.jacobian)
                except NewtonFailure as err:
                    raise err.annotate(node=m, iteration=0)
            else:
                U[m] = prev_u + h * np.asarray(problem.rhs(prev_t, prev_u))
            prev_t, prev_u = times[m], U[m]
    state = SweepState(u_n, U, None, t_n, dt)
    return refresh(state, problem, split=config.variant == "SISDG")


def step(problem: IvpProblem, config: SchemeConfig, u_n, t_n, dt):
    """Advance one step; returns (u_{n+1}, final SweepState)."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    if config.variant == "SISDG" and problem.split is None:
        raise MissingSplit(f"SISDG needs a split problem, {problem.name!r} has none")
    ops = operators(config.degree)
    try:
        state = init_predictor(problem, config, u_n, t_n, dt, ops)
        for k in range(config.iterations):
            last = k == config.iterations - 1
            theta = config.theta if (config.variant == "ImSDG-theta" and last) else None
            try:
                state = sweep(state, ops, problem, config, theta)
            except NewtonFailure as err:
                raise err.annotate(iteration=k + 1)
    except NewtonFailure as err:
        raise err.annotate(t_n=t_n)
    return state.endpoint.copy(), state


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    nodal: Optional[list] = None


def integrate(problem: IvpProblem, config: SchemeConfig, n_steps: int,
              keep_nodal=False) -> Trajectory:
    """Uniform steps dt = t_end / n_steps from the initial value."""
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    dt = problem.t_end / n_steps
    u = problem.u0
    times = [0.0]
    states = [u.copy()]
    nodal = [] if keep_nodal else None
    for n in range(n_steps):
        t_n = n * dt
        try:
            u, st = step(problem, config, u, t_n, dt)
        except NewtonFailure as err:
            raise err.annotate(step=n)
        times.append(problem.t_end if n == n_steps - 1 else (n + 1) * dt)
        states.append(u)
        if keep_nodal:
            nodal.append(st)
    return Trajectory(np.array(times), np.array(states), nodal)
