"""Iterative DG / SDG time integrators on right Gauss-Radau nodes."""

from .convergence import RK3, RK4, ConvergenceTable, run_convergence
from .dgref import dg_amplification, dg_integrate, dg_step_linear, dg_step_newton
from .ivp import IvpProblem, MissingSplit, numerical_jacobian
from .multilevel import LevelHierarchy, build_hierarchy, fas_tau, ml_cycle, ml_step
from .problems import make_advection, make_bad_example, make_dahlquist, make_vanderpol
from .radau import NodeSet, OperatorSet, build_operators, operators, radau_nodes
from .schemes import (NewtonFailure, NewtonOptions, SchemeConfig, SweepState,
                      init_predictor, integrate, node_solve, step, sweep)
from .stability import a_stability_probe, region_scan, scheme_amplification

__all__ = [
    "ConvergenceTable", "IvpProblem", "LevelHierarchy", "MissingSplit", "NewtonFailure",
    "NewtonOptions", "NodeSet", "OperatorSet", "RK3", "RK4", "SchemeConfig", "SweepState",
    "a_stability_probe", "build_hierarchy", "build_operators", "dg_amplification",
    "dg_integrate", "dg_step_linear", "dg_step_newton", "fas_tau", "init_predictor",
    "integrate", "make_advection", "make_bad_example", "make_dahlquist", "make_vanderpol",
    "ml_cycle", "ml_step", "node_solve", "numerical_jacobian", "operators", "radau_nodes",
    "region_scan", "run_convergence", "scheme_amplification", "step", "sweep",
]
