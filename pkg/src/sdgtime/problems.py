"""Built-in test problems."""

import math

import numpy as np

from .ivp import IvpProblem

VDP_U0 = 2.0
VDP_V0 = -0.6666654321121172


def make_dahlquist(lam=-1.0, t_end=1.0):
    """u' = lam u, u(0) = 1.  Complex lam gives a complex state."""
    dtype = complex if isinstance(lam, complex) else float
    u0 = np.array([1.0], dtype=dtype)
    return IvpProblem(
        rhs=lambda t, u: lam * u,
        u0=u0,
        t_end=t_end,
        split=(lambda t, u: 0.0 * u, lambda t, u: lam * u),
        jacobian=lambda t, u: np.array([[lam]], dtype=dtype),
        stiff_jacobian=lambda t, u: np.array([[lam]], dtype=dtype),
        exact=lambda t: np.array([np.exp(lam * t)], dtype=dtype),
        name=f"dahlquist(lambda={lam})",
    )


VDP_SPLITS = ("literal", "stiff-implicit")


def make_vanderpol(eps=0.1, t_end=0.5, split="literal"):
    """Van der Pol in first-order form, u' = v, v' = (-u + (1 - u^2) v) / eps.

    ``split="literal"`` (default) treats the first equation implicitly and
    the second explicitly: f_S = (v, 0), f_N = (0, (-u + (1 - u^2) v) / eps).
    The 1/eps term is then explicit, so it needs dt / eps to stay moderate.
    ``split="stiff-implicit"`` swaps the roles and handles small eps.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if split not in VDP_SPLITS:
        raise ValueError(f"unknown split {split!r}; expected one of {VDP_SPLITS}")

    def rhs(t, y):
        u, v = y
        return np.array([v, (-u + (1.0 - u * u) * v) / eps])

    def first(t, y):
        return np.array([y[1], 0.0 * y[0]])

    def second(t, y):
        u, v = y
        return np.array([0.0 * v, (-u + (1.0 - u * u) * v) / eps])

    def jac(t, y):
        u, v = y
        return np.array([[0.0, 1.0], [(-1.0 - 2.0 * u * v) / eps, (1.0 - u * u) / eps]])

    def jac_first(t, y):
        return np.array([[0.0, 1.0], [0.0, 0.0]])

    def jac_second(t, y):
        u, v = y
        return np.array([[0.0, 0.0], [(-1.0 - 2.0 * u * v) / eps, (1.0 - u * u) / eps]])

    if split == "literal":
        f_nonstiff, f_stiff, jac_stiff = second, first, jac_first
    else:
        f_nonstiff, f_stiff, jac_stiff = first, second, jac_second

    return IvpProblem(
        rhs=rhs,
        u0=np.array([VDP_U0, VDP_V0]),
        t_end=t_end,
        split=(f_nonstiff, f_stiff),
        jacobian=jac,
        stiff_jacobian=jac_stiff,
        name=f"vanderpol(eps={eps}, split={split})",
    )


LN3 = math.log(3.0)


def bad_exact(t):
    """Exact solution of the floor example: -floor(t) + (1 - 3^(t - floor(t))) / 2."""
    k = math.floor(t)
    return -k + 0.5 * (1.0 - 3.0 ** (t - k))


def make_bad_example(t_end=2.0):
    """y' = ln3 (y - floor(y) - 3/2), y(0) = 0; rhs is discontinuous at integers."""

    def rhs(t, y):
        return LN3 * (y - np.floor(y) - 1.5)

    return IvpProblem(
        rhs=rhs,
        u0=np.array([0.0]),
        t_end=t_end,
        jacobian=lambda t, y: np.array([[LN3]]),
        exact=lambda t: np.array([bad_exact(t)]),
        name="bad",
    )


def upwind_matrix(n_cells):
    """First-order periodic upwind difference for u_t + u_x = 0 on [0, 1]."""
    dx = 1.0 / n_cells
    A = -np.eye(n_cells) + np.roll(np.eye(n_cells), 1, axis=0)
    return A / dx


def make_advection(n_cells=160, t_end=1.0):
    """Method-of-lines upwind semi-discretization, u(x, 0) = sin(2 pi x).

    ``exact`` is the exact solution of the semi-discrete system (a single
    damped Fourier mode), so time-stepping errors can be measured in
    isolation from the spatial error.
    """
    if n_cells < 8:
        raise ValueError("n_cells must be >= 8")
    dx = 1.0 / n_cells
    x = (np.arange(n_cells) + 0.5) * dx
    A = upwind_matrix(n_cells)
    mu = (np.exp(-2j * np.pi * dx) - 1.0) / dx

    def rhs(t, u):
        return (u - np.roll(u, 1)) * (-1.0 / dx)

    def exact(t):
        return np.imag(np.exp(2j * np.pi * x + mu * t))

    return IvpProblem(
        rhs=rhs,
        u0=np.sin(2 * np.pi * x),
        t_end=t_end,
        split=(rhs, lambda t, u: 0.0 * u),
        jacobian=lambda t, u: A,
        stiff_jacobian=lambda t, u: np.zeros_like(A),
        exact=exact,
        name=f"advection(n={n_cells})",
    )
