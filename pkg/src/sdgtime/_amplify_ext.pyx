# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled amplification kernel; same contract as ``_amplify_py.amplification``.

The grid loop runs without the GIL, so callers can split a scan over
threads.
"""

import numpy as np

from libc.math cimport fabs

cdef enum:
    MAXN = 32
    EXDG = 0
    SPLIT_SDG = 1
    EXPLICIT_MARCH = 0
    IMPLICIT_MARCH = 1
    CONSTANT = 2


cdef inline void _cdiv(double ar, double ai, double br, double bi,
                       double* qr, double* qi) noexcept nogil:
    # Smith's algorithm, avoids overflow for large |b|
    cdef double r, d
    if fabs(br) >= fabs(bi):
        r = bi / br
        d = br + bi * r
        qr[0] = (ar + ai * r) / d
        qi[0] = (ai - ar * r) / d
    else:
        r = br / bi
        d = br * r + bi
        qr[0] = (ar * r + ai) / d
        qi[0] = (ai * r - ar) / d


cdef void _one(double lnr, double lni, double lsr, double lsi, int n,
               const double[::1] nodes, const double[::1] hw,
               const double[:, ::1] Linv, const double[:, ::1] Ltilde,
               const double[::1] offset, int variant, int iterations,
               double theta, int init, double* out_r, double* out_i) noexcept nogil:
    cdef double Ur[MAXN]
    cdef double Ui[MAXN]
    cdef double Fr[MAXN]
    cdef double Fi[MAXN]
    cdef double Nr[MAXN]
    cdef double Ni[MAXN]
    cdef double lr = lnr + lsr, li = lni + lsi
    cdef double pr, pi, er, ei, ar, ai, ir, ii, dr, di, qr, qi, prev_t, h, th, c
    cdef int m, j, k

    if init == CONSTANT:
        for m in range(n):
            Ur[m] = 1.0
            Ui[m] = 0.0
    else:
        prev_t = -1.0
        pr = 1.0
        pi = 0.0
        for m in range(n):
            h = 0.5 * (nodes[m] - prev_t)
            if init == IMPLICIT_MARCH:
                _cdiv(pr, pi, 1.0 - h * lr, -h * li, &qr, &qi)
                pr = qr
                pi = qi
            else:
                qr = pr + h * (lr * pr - li * pi)
                pi = pi + h * (lr * pi + li * pr)
                pr = qr
            Ur[m] = pr
            Ui[m] = pi
            prev_t = nodes[m]

    for k in range(iterations):
        th = theta if k == iterations - 1 else 1.0
        for m in range(n):
            Fr[m] = hw[m] * (lr * Ur[m] - li * Ui[m])
            Fi[m] = hw[m] * (lr * Ui[m] + li * Ur[m])
        if variant == EXDG:
            for m in range(n):
                ar = offset[m]
                ai = 0.0
                for j in range(n):
                    c = Linv[m, j]
                    ar = ar - c * Fr[j]
                    ai = ai - c * Fi[j]
                Nr[m] = ar
                Ni[m] = ai
        else:
            pr = 1.0
            pi = 0.0
            er = 0.0
            ei = 0.0
            for m in range(n):
                ar = 0.0
                ai = 0.0
                for j in range(n):
                    c = Ltilde[m, j]
                    ar = ar + c * Fr[j]
                    ai = ai + c * Fi[j]
                ir = th * hw[m] * lsr
                ii = th * hw[m] * lsi
                dr = pr + er - (ir * Ur[m] - ii * Ui[m]) + ar
                di = pi + ei - (ir * Ui[m] + ii * Ur[m]) + ai
                _cdiv(dr, di, 1.0 - ir, -ii, &Nr[m], &Ni[m])
                dr = Nr[m] - Ur[m]
                di = Ni[m] - Ui[m]
                er = hw[m] * (lnr * dr - lni * di)
                ei = hw[m] * (lnr * di + lni * dr)
                pr = Nr[m]
                pi = Ni[m]
        for m in range(n):
            Ur[m] = Nr[m]
            Ui[m] = Ni[m]
    out_r[0] = Ur[n - 1]
    out_i[0] = Ui[n - 1]


def amplification(lam_n, lam_s, nodes, weights, Linv, Ltilde, offset,
                  int variant, int iterations, double theta, int init, out):
    cdef const double[:, ::1] ln = np.ascontiguousarray(
        np.asarray(lam_n, dtype=np.complex128).view(np.float64).reshape(-1, 2))
    cdef const double[:, ::1] ls = np.ascontiguousarray(
        np.asarray(lam_s, dtype=np.complex128).view(np.float64).reshape(-1, 2))
    cdef const double[::1] nd = np.ascontiguousarray(nodes, dtype=np.float64)
    cdef const double[::1] hw = 0.5 * np.ascontiguousarray(weights, dtype=np.float64)
    cdef const double[:, ::1] li = np.ascontiguousarray(Linv, dtype=np.float64)
    cdef const double[:, ::1] lt = np.ascontiguousarray(Ltilde, dtype=np.float64)
    cdef const double[::1] off = np.ascontiguousarray(offset, dtype=np.float64)
    cdef double[:, ::1] res = out.view(np.float64).reshape(-1, 2)
    cdef Py_ssize_t i, npts = ln.shape[0]
    cdef int n = nd.shape[0]
    if n > MAXN:
        raise ValueError(f"at most {MAXN} nodes supported")
    if ls.shape[0] != npts or res.shape[0] != npts:
        raise ValueError("lam_n, lam_s and out must have the same length")
    with nogil:
        for i in range(npts):
            _one(ln[i, 0], ln[i, 1], ls[i, 0], ls[i, 1], n, nd, hw, li, lt, off,
                 variant, iterations, theta, init, &res[i, 0], &res[i, 1])
    return out
