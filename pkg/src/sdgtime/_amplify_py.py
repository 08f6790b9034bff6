"""Pure numpy amplification kernel (fallback for the compiled ``_amplify_ext``).

Both kernels share one signature:

    amplification(lam_n, lam_s, nodes, weights, Linv, Ltilde, offset,
                  variant, iterations, theta, init, out)

``lam_n``/``lam_s`` are complex 1-D arrays with the non-stiff and stiff
parts of lambda (dt = 1, u0 = 1).  ``variant`` is EXDG or SPLIT_SDG; the
split sweep covers ExSDG (lam_s = 0), ImSDG (lam_n = 0) and SISDG.
``offset`` is ``-Linv @ boundary``.  ``init`` selects the predictor: explicit
or implicit Euler march through the nodes (on the full lambda), or the
constant value.  ``theta`` damps the implicit correction of the final sweep.
The endpoint value is written into ``out``.
"""

import numpy as np

EXDG = 0
SPLIT_SDG = 1

EXPLICIT_MARCH = 0
IMPLICIT_MARCH = 1
CONSTANT = 2


def amplification(lam_n, lam_s, nodes, weights, Linv, Ltilde, offset,
                  variant, iterations, theta, init, out):
    lam_n = np.asarray(lam_n, dtype=complex)
    lam_s = np.asarray(lam_s, dtype=complex)
    lam = lam_n + lam_s
    n = nodes.shape[0]
    npts = lam.shape[0]
    U = np.empty((n, npts), dtype=complex)

    if init == CONSTANT:
        U[:] = 1.0
    else:
        prev_t = -1.0
        prev = np.ones(npts, dtype=complex)
        for m in range(n):
            h = 0.5 * (nodes[m] - prev_t)
            if init == IMPLICIT_MARCH:
                prev = prev / (1.0 - h * lam)
            else:
                prev = prev + h * lam * prev
            U[m] = prev
            prev_t = nodes[m]

    half_w = 0.5 * np.asarray(weights)
    for k in range(iterations):
        th = theta if k == iterations - 1 else 1.0
        FW = half_w[:, None] * lam[None, :] * U
        if variant == EXDG:
            U = offset[:, None] - Linv @ FW
            continue
        S = Ltilde @ FW
        new = np.empty_like(U)
        prev = np.ones(npts, dtype=complex)
        expl = np.zeros(npts, dtype=complex)
        for m in range(n):
            impl = th * half_w[m] * lam_s
            new[m] = (prev + expl - impl * U[m] + S[m]) / (1.0 - impl)
            expl = half_w[m] * lam_n * (new[m] - U[m])
            prev = new[m]
        U = new
    out[:] = U[n - 1]
    return out
