"""Right Gauss-Radau nodes, Lagrange basis and the nodal DG operator tables.

Everything here lives on the reference interval [-1, 1].  Node sets and
operator tables depend only on the degree and are cached per degree.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre

MAX_DEGREE = 30


@dataclass(frozen=True)
class NodeSet:
    """The p+1 right Radau points (last one is +1) and their weights."""

    degree: int
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def size(self):
        return self.degree + 1


@dataclass(frozen=True)
class OperatorSet:
    """Dense DG operators for one degree.

    ``L`` is the stiffness-plus-upwind matrix, ``M`` the (diagonal, lumped
    by exact quadrature) mass matrix, ``LDelta`` the bidiagonal low-order
    surrogate of ``L`` and ``Ltilde = LDelta @ Linv``.  ``boundary`` holds
    the basis functions evaluated at the left end, ``ell_j(-1)``.
    """

    nodeset: NodeSet
    L: np.ndarray
    M: np.ndarray
    Linv: np.ndarray
    LDelta: np.ndarray
    Ltilde: np.ndarray
    boundary: np.ndarray

    @property
    def degree(self):
        return self.nodeset.degree

    @property
    def nodes(self):
        return self.nodeset.nodes

    @property
    def weights(self):
        return self.nodeset.weights


def _legendre_pair(n, x):
    """Return (P_n(x), P_{n-1}(x), P_n'(x) - P_{n-1}'(x)) by three-term recurrence."""
    x = np.asarray(x, dtype=float)
    p_prev = np.ones_like(x)
    dp_prev = np.zeros_like(x)
    p = x.copy()
    dp = np.ones_like(x)
    if n == 0:
        return p_prev, np.zeros_like(x), dp_prev
    for k in range(1, n):
        p_next = ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
        dp_next = dp_prev + (2 * k + 1) * p
        p_prev, p = p, p_next
        dp_prev, dp = dp, dp_next
    return p, p_prev, dp - dp_prev


def radau_nodes(p: int) -> NodeSet:
    """Right Gauss-Radau rule with p+1 points on [-1, 1].

    The interior points are the roots of ``P_{p+1} - P_p`` other than +1
    (the mirror image of the left Radau points, which are roots of
    ``P_{p+1} + P_p``).  Roots come from the Legendre companion matrix and are
    Newton-polished; weights use the closed form
    ``w_i = (1 + x_i) / ((p+1)^2 P_p(x_i)^2)`` and ``w_p = 2 / (p+1)^2``.
    """
    if not isinstance(p, (int, np.integer)) or isinstance(p, bool):
        raise TypeError(f"degree must be an integer, got {p!r}")
    if p < 0 or p > MAX_DEGREE:
        raise ValueError(f"degree must be in [0, {MAX_DEGREE}], got {p}")
    return _radau_nodes(int(p))


@lru_cache(maxsize=None)
def _radau_nodes(p):
    n = p + 1
    if p == 0:
        nodes = np.array([1.0])
    else:
        coef = np.zeros(n + 1)
        coef[n] = 1.0
        coef[n - 1] = -1.0
        roots = np.sort(legendre.legroots(coef).real)
        interior = roots[:-1]
        for _ in range(50):
            q_n, q_nm1, dq = _legendre_pair(n, interior)
            step = (q_n - q_nm1) / dq
            interior = interior - step
            if np.max(np.abs(step)) < 1e-16:
                break
        nodes = np.append(interior, 1.0)
    _, p_p, _ = _legendre_pair(n, nodes)
    weights = (1.0 + nodes) / (n * n * p_p**2)
    weights[-1] = 2.0 / (n * n)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return NodeSet(p, nodes, weights)


def barycentric_weights(nodes):
    x = np.asarray(nodes, dtype=float)
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    return 1.0 / np.prod(diff, axis=1)


def lagrange_eval(ns: NodeSet, j: int, t: float) -> float:
    """Value of the j-th Lagrange basis polynomial at t (barycentric form)."""
    x = ns.nodes
    hit = np.flatnonzero(x == t)
    if hit.size:
        return 1.0 if hit[0] == j else 0.0
    w = barycentric_weights(x)
    terms = w / (t - x)
    return float(terms[j] / np.sum(terms))


def lagrange_deriv(ns: NodeSet, j: int, t: float) -> float:
    """Derivative of the j-th Lagrange basis polynomial at t."""
    x = ns.nodes
    w = barycentric_weights(x)
    hit = np.flatnonzero(x == t)
    if hit.size:
        m = hit[0]
        if m != j:
            return float((w[j] / w[m]) / (x[m] - x[j]))
        others = np.delete(x, j)
        return float(np.sum(1.0 / (x[j] - others)))
    others = np.delete(x, j)
    return lagrange_eval(ns, j, t) * float(np.sum(1.0 / (t - others)))


def differentiation_matrix(nodes):
    """D[i, j] = ell_j'(x_i) on the given nodes."""
    x = np.asarray(nodes, dtype=float)
    w = barycentric_weights(x)
    n = x.size
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                D[i, j] = (w[j] / w[i]) / (x[i] - x[j])
        D[i, i] = -np.sum(D[i, :])
    return D


def interpolation_matrix(src_nodes, dst_points):
    """E[a, b] = ell_b(dst_a) for the Lagrange basis on ``src_nodes``."""
    x = np.asarray(src_nodes, dtype=float)
    t = np.atleast_1d(np.asarray(dst_points, dtype=float))
    w = barycentric_weights(x)
    E = np.zeros((t.size, x.size))
    for a, ta in enumerate(t):
        hit = np.flatnonzero(x == ta)
        if hit.size:
            E[a, hit[0]] = 1.0
            continue
        terms = w / (ta - x)
        E[a] = terms / np.sum(terms)
    return E


def build_operators(ns: NodeSet) -> OperatorSet:
    return _build_operators(ns.degree)


@lru_cache(maxsize=None)
def _build_operators(p):
    ns = _radau_nodes(p)
    x, w = ns.nodes, ns.weights
    n = ns.size
    # L[i, j] = w_j * ell_i'(x_j) - delta_{ip} delta_{jp}
    D = differentiation_matrix(x)
    L = D.T * w[None, :]
    L[p, p] -= 1.0
    M = np.diag(w)
    Linv = np.linalg.inv(L)
    if np.max(np.abs(L @ Linv - np.eye(n))) > 1e-12:
        raise RuntimeError(f"DG operator L is numerically singular for p={p}")
    LDelta = -np.eye(n) + np.eye(n, k=-1)
    Ltilde = np.empty_like(Linv)
    Ltilde[0] = -Linv[0]
    Ltilde[1:] = Linv[:-1] - Linv[1:]
    boundary = interpolation_matrix(x, [-1.0])[0]
    for a in (L, M, Linv, LDelta, Ltilde, boundary):
        a.setflags(write=False)
    return OperatorSet(ns, L, M, Linv, LDelta, Ltilde, boundary)


def operators(p: int) -> OperatorSet:
    """Cached operator table for degree ``p``."""
    return build_operators(radau_nodes(p))


def node_times(ns: NodeSet, t_n: float, dt: float) -> np.ndarray:
    return t_n + 0.5 * (1.0 + ns.nodes) * dt
