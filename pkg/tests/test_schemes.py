import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy.optimize import brentq

from sdgtime.dgref import dg_step_linear, dg_step_newton
from sdgtime.ivp import IvpProblem, MissingSplit
from sdgtime.problems import make_dahlquist, make_vanderpol
from sdgtime.radau import operators
from sdgtime.schemes import (VARIANTS, NewtonFailure, NewtonOptions, SchemeConfig,
                             exdg_sweep, exsdg_sweep, imsdg_sweep, init_predictor, integrate,
                             make_state, node_solve, sisdg_sweep, step, sweep, theta_sweep)


def zero_problem(d=2):
    return IvpProblem(lambda t, u: 0.0 * u, np.arange(1.0, d + 1), 1.0,
                      split=(lambda t, u: 0.0 * u, lambda t, u: 0.0 * u),
                      jacobian=lambda t, u: np.zeros((d, d)),
                      stiff_jacobian=lambda t, u: np.zeros((d, d)))


def with_split(prob, f_n, f_s, jac_s):
    return IvpProblem(prob.rhs, prob.u0, prob.t_end, (f_n, f_s), prob.jacobian, jac_s,
                      prob.exact, prob.name)


# node_solve

def test_node_solve_linear_one_step():
    lam, c, coeff = -7.0, np.array([0.8]), 0.3
    u = node_solve(c, coeff, lambda t, u: lam * u, 0.0, jac=lambda t, u: np.array([[lam]]))
    assert abs(u[0] - c[0] / (1 - coeff * lam)) <= 1e-15


def test_node_solve_zero_root():
    u = node_solve(np.array([0.0]), 0.5, lambda t, u: u * u, 0.0)
    assert u[0] == 0.0


def test_node_solve_cubic_against_bisection():
    want = brentq(lambda x: x + x**3 - 1.0, 0.0, 1.0, xtol=1e-15)
    u = node_solve(np.array([1.0]), 1.0, lambda t, u: -u**3, 0.0)
    assert abs(u[0] - want) <= 1e-12
    assert abs(want - 0.682327) < 1e-6


def test_node_solve_failure_reports():
    with pytest.raises(NewtonFailure) as info:
        node_solve(np.array([1.0]), 1.0, lambda t, u: np.exp(np.abs(u)) * 1e3, 0.0,
                   NewtonOptions(1e-12, 3))
    assert info.value.residual > 0


def test_newton_failure_annotation():
    err = NewtonFailure(1.5, node=2)
    err.annotate(iteration=3, node=7, step=4)
    assert (err.node, err.iteration, err.step) == (2, 3, 4)
    assert "node=2" in str(err) and "step=4" in str(err)


# config

def test_config_validation():
    with pytest.raises(ValueError):
        SchemeConfig("RK4", 2, 2)
    with pytest.raises(ValueError):
        SchemeConfig("ImSDG", 2, -1)
    with pytest.raises(ValueError):
        SchemeConfig("ImSDG-theta", 2, 2, theta=0.0)
    with pytest.raises(ValueError):
        SchemeConfig("ImSDG", 2, 2, init="linear")
    cfg = SchemeConfig("SISDG", 3, 6)
    assert cfg.implicit and cfg.label == "SISDG_3^6" and cfg.theta == 1.0


# predictor

@pytest.mark.parametrize("variant", VARIANTS)
@pytest.mark.parametrize("init", ["euler-march", "constant"])
def test_predictor_on_zero_rhs(variant, init):
    prob = zero_problem()
    st_ = init_predictor(prob, SchemeConfig(variant, 3, 1, init=init), prob.u0, 0.0, 0.5)
    assert_allclose(st_.U, np.tile(prob.u0, (4, 1)))
    assert_allclose(st_.F, 0.0)


def test_explicit_predictor_first_node():
    prob = make_dahlquist(-1.0)
    st_ = init_predictor(prob, SchemeConfig("ExSDG", 1, 0), np.array([1.0]), 0.0, 1.0)
    assert abs(st_.U[0, 0] - 2.0 / 3.0) <= 1e-15
    assert abs(st_.U[1, 0] - (2 / 3) * (1 - 2 / 3)) <= 1e-15


def test_implicit_predictor_march():
    prob = make_dahlquist(-1.0)
    st_ = init_predictor(prob, SchemeConfig("ImSDG", 1, 0), np.array([1.0]), 0.0, 1.0)
    assert abs(st_.U[0, 0] - 1 / (1 + 1 / 3)) <= 1e-15
    assert abs(st_.U[1, 0] - st_.U[0, 0] / (1 + 2 / 3)) <= 1e-15


def test_constant_predictor():
    prob = make_dahlquist(-1.0)
    st_ = init_predictor(prob, SchemeConfig("ExSDG", 1, 0, init="constant"),
                         np.array([1.0]), 0.0, 1.0)
    assert_allclose(st_.U[:, 0], [1.0, 1.0])
    assert_allclose(st_.F[:, 0], [-1.0, -1.0])


# sweeps

def test_exdg_example_p1():
    prob = make_dahlquist(-1.0)
    ops = operators(1)
    state = make_state(prob, np.array([1.0]), np.ones(2), 0.0, 1.0)
    new = exdg_sweep(state, ops, prob)
    want = 1.0 - 0.5 * np.array([[-5 / 9, 1 / 3], [-1.0, -1.0]]) @ np.array([-1.5, -0.5])
    assert_allclose(new.U[:, 0], want, atol=1e-15)
    assert_allclose(new.F, -new.U)


@pytest.mark.parametrize("fn", [exdg_sweep, exsdg_sweep, imsdg_sweep, sisdg_sweep])
def test_zero_rhs_sweep_gives_constant(fn):
    prob = zero_problem()
    state = make_state(prob, prob.u0, np.random.default_rng(1).normal(size=(4, 2)), 0.0, 0.3,
                       split=fn is sisdg_sweep)
    new = fn(state, operators(3), prob)
    assert_allclose(new.U, np.tile(prob.u0, (4, 1)), atol=1e-14)


def test_p0_explicit_sweep_is_euler_on_iterate():
    prob = make_dahlquist(-3.0)
    state = make_state(prob, np.array([1.0]), np.array([0.4]), 0.0, 0.2)
    new = exsdg_sweep(state, operators(0), prob)
    assert abs(new.U[0, 0] - (1.0 + 0.2 * (-3.0) * 0.4)) <= 1e-15


@settings(max_examples=30, deadline=None)
@given(lam=st.floats(-50, 5), guess=st.floats(-3, 3), dt=st.floats(0.01, 1.0))
def test_p0_implicit_sweep_is_implicit_euler(lam, guess, dt):
    prob = make_dahlquist(lam)
    state = make_state(prob, np.array([1.0]), np.array([guess]), 0.0, dt)
    new = imsdg_sweep(state, operators(0), prob)
    assert abs(new.U[0, 0] - 1.0 / (1.0 - dt * lam)) <= 1e-12 * (1 + abs(new.U[0, 0]))


@settings(max_examples=30, deadline=None)
@given(lam=st.floats(-20, 2), guess=st.floats(-3, 3), theta=st.floats(0.05, 1.0))
def test_p0_theta_sweep_algebra(lam, guess, theta):
    dt = 0.4
    prob = make_dahlquist(lam)
    state = make_state(prob, np.array([1.0]), np.array([guess]), 0.0, dt)
    new = theta_sweep(state, operators(0), prob, theta)
    # u = 1 + dt (theta lam u + (1 - theta) lam guess)
    want = (1.0 + dt * (1 - theta) * lam * guess) / (1 - dt * theta * lam)
    assert abs(new.U[0, 0] - want) <= 1e-12 * (1 + abs(want))


def test_theta_one_equals_imsdg():
    prob = make_vanderpol(0.1)
    cfg = SchemeConfig("ImSDG", 3, 0)
    state = init_predictor(prob, cfg, prob.u0, 0.0, 0.05)
    a = imsdg_sweep(state, operators(3), prob)
    b = theta_sweep(state, operators(3), prob, 1.0)
    assert np.max(np.abs(a.U - b.U)) <= 1e-14


def _recurrence(variant, p, lam, dt, u_n, U0, k):
    """U^{k+1} = G U^k + g written with whole matrices."""
    ops = operators(p)
    n = p + 1
    z = 0.5 * dt * lam
    W = np.diag(ops.weights)
    D = np.eye(n, k=-1)
    e0 = np.eye(n)[0] * u_n
    if variant == "ExSDG":
        A = np.eye(n) - D - z * D @ W
        B = z * (ops.Ltilde @ W - D @ W)
    else:
        A = np.eye(n) - D - z * W
        B = z * (ops.Ltilde @ W - W)
    U = U0.copy()
    for _ in range(k):
        U = np.linalg.solve(A, B @ U + e0)
    return U


@pytest.mark.parametrize("variant", ["ExSDG", "ImSDG"])
@pytest.mark.parametrize("lam", [-1.0, -4.0 + 2.0j, 0.5j])
def test_linear_recurrence_consistency(variant, lam):
    p, dt, K = 4, 0.3, 5
    prob = make_dahlquist(lam)
    cfg = SchemeConfig(variant, p, 0)
    state = init_predictor(prob, cfg, np.array([1.0 + 0j]), 0.0, dt)
    U0 = state.U[:, 0].copy()
    for _ in range(K):
        state = sweep(state, operators(p), prob, cfg)
    want = _recurrence(variant, p, lam, dt, 1.0, U0, K)
    assert np.max(np.abs(state.U[:, 0] - want)) <= 1e-12


def test_sisdg_degenerate_explicit_split():
    vdp = make_vanderpol(0.1)
    prob = with_split(vdp, vdp.rhs, lambda t, u: 0.0 * u, lambda t, u: np.zeros((2, 2)))
    ops = operators(3)
    state = init_predictor(prob, SchemeConfig("ExSDG", 3, 0), prob.u0, 0.0, 0.02)
    a = exsdg_sweep(state, ops, prob)
    b = sisdg_sweep(make_state(prob, prob.u0, state.U, 0.0, 0.02, split=True), ops, prob)
    assert np.max(np.abs(a.U - b.U)) <= 1e-13


def test_sisdg_degenerate_implicit_split():
    vdp = make_vanderpol(0.1)
    prob = with_split(vdp, lambda t, u: 0.0 * u, vdp.rhs, vdp.jacobian)
    ops = operators(3)
    newton = NewtonOptions()
    state = init_predictor(prob, SchemeConfig("ImSDG", 3, 0), prob.u0, 0.0, 0.02)
    a = imsdg_sweep(state, ops, prob, newton)
    b = sisdg_sweep(make_state(prob, prob.u0, state.U, 0.0, 0.02, split=True), ops, prob,
                    newton)
    assert np.max(np.abs(a.U - b.U)) <= newton.tol


@pytest.mark.parametrize("variant", VARIANTS)
def test_dg_solution_is_fixed_point_linear(variant):
    lam, p, dt = -3.0, 5, 0.4
    prob = make_dahlquist(lam)
    U = dg_step_linear(lam, p, np.array([1.0]), dt)
    state = make_state(prob, np.array([1.0]), U, 0.0, dt, split=variant == "SISDG")
    new = sweep(state, operators(p), prob, SchemeConfig(variant, p, 1, theta=0.7), theta=0.7)
    assert np.max(np.abs(new.U - U)) <= 10 * 1e-12


@pytest.mark.parametrize("variant", VARIANTS)
def test_dg_solution_is_fixed_point_nonlinear(variant):
    prob = make_vanderpol(0.1)
    p, dt = 4, 0.05
    U = dg_step_newton(prob, p, prob.u0, 0.0, dt, NewtonOptions(1e-14, 40))
    state = make_state(prob, prob.u0, U, 0.0, dt, split=variant == "SISDG")
    cfg = SchemeConfig(variant, p, 1)
    new = sweep(state, operators(p), prob, cfg)
    assert np.max(np.abs(new.U - U)) <= 10 * cfg.newton.tol


def test_cache_coherence_after_sweeps():
    prob = make_vanderpol(0.1)
    for variant in VARIANTS:
        _, state = step(prob, SchemeConfig(variant, 3, 3), prob.u0, 0.0, 0.02)
        F = np.array([prob.rhs(t, u) for t, u in zip(state.times, state.U)])
        assert_allclose(state.F, F, atol=1e-12)


# step / integrate

@pytest.mark.parametrize("variant", VARIANTS)
def test_k0_endpoint_is_predictor(variant):
    prob = make_vanderpol(0.1)
    cfg = SchemeConfig(variant, 3, 0)
    u, state = step(prob, cfg, prob.u0, 0.0, 0.02)
    pred = init_predictor(prob, cfg, prob.u0, 0.0, 0.02)
    assert_allclose(u, pred.U[-1])


@pytest.mark.parametrize("variant", VARIANTS)
def test_converged_p1_endpoint_is_4_over_11(variant):
    prob = make_dahlquist(-1.0)
    u, _ = step(prob, SchemeConfig(variant, 1, 40), np.array([1.0]), 0.0, 1.0)
    assert abs(u[0] - 4 / 11) <= 1e-10
    assert abs(4 / 11 - math.exp(-1)) == pytest.approx(4.2e-3, abs=1e-4)


def test_step_rejects_bad_input():
    prob = make_dahlquist(-1.0)
    with pytest.raises(ValueError):
        step(prob, SchemeConfig("ImSDG", 1, 1), prob.u0, 0.0, 0.0)
    bare = IvpProblem(prob.rhs, prob.u0, 1.0)
    with pytest.raises(MissingSplit):
        step(bare, SchemeConfig("SISDG", 1, 1), prob.u0, 0.0, 0.1)


def test_integrate_zero_rhs_constant():
    prob = zero_problem()
    traj = integrate(prob, SchemeConfig("ExSDG", 2, 3), 5)
    assert_allclose(traj.states, np.tile(prob.u0, (6, 1)))
    assert_allclose(traj.times, np.linspace(0, 1, 6))
    with pytest.raises(ValueError):
        integrate(prob, SchemeConfig("ExSDG", 2, 3), 0)


def test_integrate_failure_has_location():
    prob = make_vanderpol(1e-3, split="literal")
    with pytest.raises(NewtonFailure) as info, np.errstate(all="ignore"):
        integrate(prob, SchemeConfig("SISDG", 3, 6), 200)
    err = info.value
    assert err.step is not None and err.node is not None and err.iteration is not None


@pytest.mark.parametrize("p,K", [(1, 1), (2, 2), (2, 4), (3, 3)])
def test_order_trend_dahlquist(p, K):
    prob = make_dahlquist(-1.0)
    errs = [abs(integrate(prob, SchemeConfig("ImSDG", p, K), n).states[-1][0] - math.exp(-1))
            for n in (4, 8, 16)]
    order = math.log2(errs[1] / errs[2])
    assert order >= min(2 * p + 1, K + 1) - 0.4


def test_iterations_gain_orders():
    # ImSDG from K = 1; the explicit errors change sign at some K, which
    # makes their two-point orders erratic at these step sizes
    prob = make_dahlquist(-1.0)
    orders = []
    for K in (1, 2, 3, 4, 5):
        e = [abs(integrate(prob, SchemeConfig("ImSDG", 3, K), n).states[-1][0] - math.exp(-1))
             for n in (8, 16)]
        orders.append(math.log2(e[0] / e[1]))
    assert all(abs((b - a) - 1.0) <= 0.5 for a, b in zip(orders, orders[1:]))


def test_exsdg_error_drops_per_iteration():
    lam, p = -1.0, 5
    prob = make_dahlquist(lam)
    dg = dg_step_linear(lam, p, np.array([1.0]), 1.0)[-1, 0]
    gaps = [abs(step(prob, SchemeConfig("ExSDG", p, K), prob.u0, 0.0, 1.0)[0][0] - dg)
            for K in range(0, 3 * p + 1)]
    assert gaps[-1] <= 1e-12
    assert all(b < a for a, b in zip(gaps[:8], gaps[1:9]))
