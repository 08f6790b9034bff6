"""Initial value problems u' = f(t, u) with optional IMEX splitting.

States are flat 1-D numpy arrays whose dtype is either real or complex;
schemes only use vector arithmetic, linear solves and the max-norm on them.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

Rhs = Callable[[float, np.ndarray], np.ndarray]
Jacobian = Callable[[float, np.ndarray], np.ndarray]


class MissingSplit(ValueError):
    """A semi-implicit scheme was asked to run on a problem without a split."""


@dataclass(frozen=True)
class IvpProblem:
    """u' = rhs(t, u), u(0) = u0 on [0, t_end].

    ``split`` is the pair ``(f_nonstiff, f_stiff)`` whose sum is ``rhs``;
    ``stiff_jacobian`` is the Jacobian of the stiff part, used by
    semi-implicit node solves.  ``exact`` (if known) maps t to u(t).
    """

    rhs: Rhs
    u0: np.ndarray
    t_end: float
    split: Optional[tuple] = None
    jacobian: Optional[Jacobian] = None
    stiff_jacobian: Optional[Jacobian] = None
    exact: Optional[Callable[[float], np.ndarray]] = None
    name: str = "ivp"

    def __post_init__(self):
        u0 = np.atleast_1d(np.asarray(self.u0))
        if u0.ndim != 1:
            raise ValueError("initial value must be a flat vector")
        if not self.t_end > 0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        object.__setattr__(self, "u0", u0)

    @property
    def dimension(self):
        return self.u0.size

    @property
    def f_nonstiff(self):
        if self.split is None:
            raise MissingSplit(f"problem {self.name!r} has no stiff/non-stiff split")
        return self.split[0]

    @property
    def f_stiff(self):
        if self.split is None:
            raise MissingSplit(f"problem {self.name!r} has no stiff/non-stiff split")
        return self.split[1]


def state_norm(u):
    """Max-norm; the one norm used for all tolerances."""
    u = np.asarray(u)
    return float(np.max(np.abs(u))) if u.size else 0.0


def fd_jacobian(f: Rhs, t, u, h_fd=None):
    """Forward-difference Jacobian of f(t, .) at u, one column per component.

    The default step is ``sqrt(eps) * (1 + |u_i|)`` per component.
    """
    u = np.asarray(u)
    f0 = np.asarray(f(t, u))
    dtype = np.result_type(u, f0, float)
    J = np.empty((f0.size, u.size), dtype=dtype)
    sqeps = np.sqrt(np.finfo(float).eps)
    for i in range(u.size):
        h = h_fd if h_fd is not None else sqeps * (1.0 + abs(u[i]))
        if h <= 0:
            raise ValueError("finite-difference step must be positive")
        up = u.astype(dtype, copy=True)
        up[i] += h
        J[:, i] = (np.asarray(f(t, up)) - f0) / h
    return J


def numerical_jacobian(problem: IvpProblem, t, u, h_fd=None):
    """Jacobian of the full rhs; the analytic one is used when supplied."""
    if problem.jacobian is not None:
        return np.atleast_2d(np.asarray(problem.jacobian(t, np.asarray(u))))
    return fd_jacobian(problem.rhs, t, u, h_fd)
