# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled coordinate-descent sweeps for the sparse summary.

The Gram-mode kernel mirrors the numpy fallback operation for operation
(same expressions, -ffp-contract=off), so both produce identical iterates.
The residual-mode kernel computes dot products sequentially and may differ
from the numpy fallback in the last bits.
"""


cdef inline double _soft(double x, double t) nogil:
    if x > t:
        return x - t
    if x < -t:
        return x + t
    return 0.0


def cd_gram(const double[::1] q, const double[:, ::1] G, const double[::1] colsq,
            double[::1] gamma, double[::1] v, double half, double tol, long max_sweeps):
    """Cyclic soft-threshold sweeps tracking v = G @ gamma. In-place on
    gamma and v; returns the sweep count, or -1 at the cap."""
    cdef Py_ssize_t P = gamma.shape[0]
    cdef Py_ssize_t i, j
    cdef long sweep
    cdef double gj, rho, new, d, step, delta
    for sweep in range(1, max_sweeps + 1):
        delta = 0.0
        for j in range(P):
            gj = gamma[j]
            rho = q[j] - v[j] + colsq[j] * gj
            new = _soft(rho, half) / colsq[j]
            if new != gj:
                d = new - gj
                # G row j equals column j up to the Gram product's own
                # rounding; the fallback reads the same row
                for i in range(P):
                    v[i] = v[i] + G[j, i] * d
                gamma[j] = new
                step = d if d >= 0 else -d
                if step > delta:
                    delta = step
        if delta < tol:
            return sweep
    return -1


def cd_resid(const double[:, ::1] ZT, const double[::1] colsq,
             double[::1] gamma, double[::1] r, double half, double tol, long max_sweeps):
    """Cyclic sweeps maintaining the residual r = target - Z @ gamma."""
    cdef Py_ssize_t P = ZT.shape[0]
    cdef Py_ssize_t n = ZT.shape[1]
    cdef Py_ssize_t i, j
    cdef long sweep
    cdef double gj, rho, new, d, step, delta
    for sweep in range(1, max_sweeps + 1):
        delta = 0.0
        for j in range(P):
            gj = gamma[j]
            rho = 0.0
            for i in range(n):
                rho = rho + ZT[j, i] * r[i]
            rho = rho + colsq[j] * gj
            new = _soft(rho, half) / colsq[j]
            if new != gj:
                d = gj - new
                for i in range(n):
                    r[i] = r[i] + ZT[j, i] * d
                gamma[j] = new
                step = d if d >= 0 else -d
                if step > delta:
                    delta = step
        if delta < tol:
            return sweep
    return -1
