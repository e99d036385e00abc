# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of horserule._split_py.node_best_split.

Accumulation order and expressions match the numpy version so both
backends produce bit-identical splits (compiled with -ffp-contract=off).
"""

import numpy as np

cimport numpy as cnp

cdef double GAIN_TOL = 1e-12
cdef double NEG_INF = -np.inf

BACKEND_NAME = "compiled"


def node_best_split(const int[:, ::1] orderT, const double[:, ::1] XT,
                    const double[:] y, const double[:] w,
                    memb, const long[:] cols, double n_min):
    """See horserule._split_py.node_best_split for the contract."""
    cdef const unsigned char[::1] mb = memb.view(np.uint8)
    cdef Py_ssize_t n = orderT.shape[1]
    cdef Py_ssize_t m = cols.shape[0]
    cdef Py_ssize_t i, r, t, c, k
    cdef long j

    k = 0
    for i in range(n):
        if mb[i]:
            k += 1
    if k < 2:
        return -1, 0.0, NEG_INF

    xs_arr = np.empty(k, dtype=np.float64)
    cw_arr = np.empty(k, dtype=np.float64)
    cs_arr = np.empty(k, dtype=np.float64)
    cdef double[::1] xs = xs_arr
    cdef double[::1] cw_buf = cw_arr
    cdef double[::1] cs_buf = cs_arr

    cdef double cw, cs, W, S, base, g, a, b, thr
    cdef double best_gain = NEG_INF, best_thr = 0.0, best_imp = NEG_INF
    cdef double col_gain
    cdef Py_ssize_t col_t
    cdef long best_col = -1

    for c in range(m):
        j = cols[c]
        t = 0
        cw = 0.0
        cs = 0.0
        for i in range(n):
            r = orderT[j, i]
            if mb[r]:
                xs[t] = XT[j, r]
                cw = cw + w[r]
                cs = cs + w[r] * y[r]
                cw_buf[t] = cw
                cs_buf[t] = cs
                t += 1
        W = cw_buf[k - 1]
        S = cs_buf[k - 1]
        base = S * S / W

        col_gain = NEG_INF
        col_t = -1
        for t in range(k - 1):
            if xs[t + 1] != xs[t] and cw_buf[t] >= n_min and W - cw_buf[t] >= n_min:
                g = cs_buf[t] * cs_buf[t] / cw_buf[t] \
                    + (S - cs_buf[t]) * (S - cs_buf[t]) / (W - cw_buf[t])
                if g > col_gain:
                    col_gain = g
                    col_t = t
        if col_t < 0:
            continue
        if not (col_gain - base > GAIN_TOL * base):
            continue
        if col_gain > best_gain:
            a = xs[col_t]
            b = xs[col_t + 1]
            thr = 0.5 * (a + b)
            if thr >= b:
                thr = a
            best_gain = col_gain
            best_col = j
            best_thr = thr
            best_imp = col_gain - base
    if best_col < 0:
        return -1, 0.0, NEG_INF
    return int(best_col), float(best_thr), float(best_imp)
