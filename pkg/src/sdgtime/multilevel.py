"""FAS p-multilevel cycles built from SDG sweeps.

Level 0 is the finest (degree p); coarser levels lower the polynomial
degree.  Transfers are Lagrange interpolation between Radau node sets, and
each coarse level solves the FAS-shifted system
``U + dt/2 Linv W F(U) + Linv B - tau = 0``.
"""

from dataclasses import dataclass

import numpy as np

from .ivp import IvpProblem, state_norm
from .radau import interpolation_matrix, operators
from .schemes import (NewtonFailure, SchemeConfig, SweepState, init_predictor,
                      make_state, sweep)


@dataclass(frozen=True)
class LevelHierarchy:
    """Degrees (strictly decreasing), operators and transfer matrices.

    ``restrict[l]`` maps level l nodal values to level l+1 and
    ``prolong[l]`` maps level l+1 back to level l.
    """

    degrees: tuple
    ops: tuple
    restrict: tuple
    prolong: tuple

    @property
    def n_levels(self):
        return len(self.degrees)


def halving_degrees(p, n_levels=2):
    """Default schedule p, p//2, p//4, ... (stops early at degree 0)."""
    degrees = [int(p)]
    while len(degrees) < n_levels and degrees[-1] > 0:
        degrees.append(degrees[-1] // 2)
    return degrees


def build_hierarchy(degrees) -> LevelHierarchy:
    degrees = tuple(int(d) for d in degrees)
    if not degrees:
        raise ValueError("need at least one level")
    if degrees[-1] < 0:
        raise ValueError("degrees must be non-negative")
    if any(a <= b for a, b in zip(degrees, degrees[1:])):
        raise ValueError(f"degrees must be strictly decreasing, got {list(degrees)}")
    ops = tuple(operators(d) for d in degrees)
    restrict, prolong = [], []
    for fine, coarse in zip(ops, ops[1:]):
        R = interpolation_matrix(fine.nodes, coarse.nodes)
        P = interpolation_matrix(coarse.nodes, fine.nodes)
        R.setflags(write=False)
        P.setflags(write=False)
        restrict.append(R)
        prolong.append(P)
    return LevelHierarchy(degrees, ops, tuple(restrict), tuple(prolong))


def _linv_wf(ops, F, dt):
    return 0.5 * dt * (ops.Linv @ (ops.weights[:, None] * F))


def fas_tau(hierarchy: LevelHierarchy, level, fine: SweepState, coarse: SweepState):
    """tau for ``level + 1`` from a fine iterate and its restriction.

    Both states must carry fresh F.  ``fine.tau`` (None means zero) is the
    correction already applied on ``level``.
    """
    R = hierarchy.restrict[level]
    dt = fine.dt
    tau = (_linv_wf(hierarchy.ops[level + 1], coarse.F, dt)
           - R @ _linv_wf(hierarchy.ops[level], fine.F, dt))
    if fine.tau is not None:
        tau = tau + R @ fine.tau
    return tau


def _sweep_at(level, state, hierarchy, problem, config):
    try:
        return sweep(state, hierarchy.ops[level], problem, config)
    except NewtonFailure as err:
        raise err.annotate(level=level + 1)


def ml_cycle(hierarchy: LevelHierarchy, problem: IvpProblem, config: SchemeConfig,
             state: SweepState) -> SweepState:
    """One multilevel iteration on a finest-level state.

    Fine sweep, then restrict / FAS-correct / sweep down to the coarsest
    level, then add interpolated coarse corrections on the way back up
    (sweeping each intermediate level).  With one level this is a plain
    sweep.
    """
    split = config.variant == "SISDG"
    states = [_sweep_at(0, state, hierarchy, problem, config)]
    if hierarchy.n_levels == 1:
        return states[0]
    stored = [None]
    u_n, t_n, dt = state.u_n, state.t_n, state.dt

    for lv in range(hierarchy.n_levels - 1):
        fine = states[lv]
        coarse = make_state(problem, u_n, hierarchy.restrict[lv] @ fine.U, t_n, dt, split)
        coarse.tau = fas_tau(hierarchy, lv, fine, coarse)
        stored.append(coarse.U.copy())
        states.append(_sweep_at(lv + 1, coarse, hierarchy, problem, config))

    for lv in range(hierarchy.n_levels - 2, 0, -1):
        U = states[lv].U + hierarchy.prolong[lv] @ (states[lv + 1].U - stored[lv + 1])
        corrected = make_state(problem, u_n, U, t_n, dt, split, tau=states[lv].tau)
        states[lv] = _sweep_at(lv, corrected, hierarchy, problem, config)

    U = states[0].U + hierarchy.prolong[0] @ (states[1].U - stored[1])
    return make_state(problem, u_n, U, t_n, dt, split, tau=state.tau)


def ml_step(problem: IvpProblem, config: SchemeConfig, hierarchy: LevelHierarchy,
            u_n, t_n, dt, cycles=None):
    """Predictor plus ``cycles`` multilevel iterations (default config.iterations)."""
    if hierarchy.degrees[0] != config.degree:
        raise ValueError("finest hierarchy degree must equal config.degree")
    cycles = config.iterations if cycles is None else cycles
    state = init_predictor(problem, config, u_n, t_n, dt, hierarchy.ops[0])
    for k in range(cycles):
        try:
            state = ml_cycle(hierarchy, problem, config, state)
        except NewtonFailure as err:
            raise err.annotate(iteration=k + 1, t_n=t_n)
    return state.endpoint.copy(), state


def iteration_history(problem: IvpProblem, config: SchemeConfig, degrees, u_n, t_n, dt,
                      iterations, reference):
    """Nodal max-norm distance to ``reference`` after 0..iterations cycles.

    Returns (one_level, multi_level) arrays of length iterations + 1; the
    one-level run uses plain sweeps on the finest degree.
    """
    reference = np.asarray(reference)
    single = build_hierarchy(degrees[:1])
    multi = build_hierarchy(degrees)
    out = []
    for hier in (single, multi):
        state = init_predictor(problem, config, u_n, t_n, dt, hier.ops[0])
        errs = [state_norm(state.U - reference)]
        for _ in range(iterations):
            state = ml_cycle(hier, problem, config, state)
            errs.append(state_norm(state.U - reference))
        out.append(np.array(errs))
    return out[0], out[1]


def iterations_to(errors, tol):
    """First index with error <= tol, or None."""
    hits = np.nonzero(np.asarray(errors) <= tol)[0]
    return int(hits[0]) if hits.size else None
