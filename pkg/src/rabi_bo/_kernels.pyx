# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: Hermite-function tables and the population-fit objective.

Must stay numerically interchangeable with ``_kernels_py``.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, sqrt, fabs, M_PI

cnp.import_array()

cdef double _BIG = 1e150
cdef double _LOG_BIG = log(1e150)
cdef double _LOG_H0 = -0.25 * log(M_PI)

# family codes shared with the Python side
cdef enum:
    POISSON = 0
    GUE = 1
    GOE = 2


def hermite_table(int n_max, x):
    """Return ``T[q, n] = h_n(x[q])`` for ``n < n_max``."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xs = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t nq = xs.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((nq, n_max), dtype=np.float64)
    cdef Py_ssize_t q, n
    cdef double xi, prev, cur, nxt, logscale, a

    for q in range(nq):
        xi = xs[q]
        logscale = _LOG_H0 - 0.5 * xi * xi
        prev = 0.0
        cur = 1.0
        for n in range(n_max):
            if cur != 0.0:
                a = log(fabs(cur)) + logscale
                if a > -745.0:
                    out[q, n] = exp(a) if cur > 0.0 else -exp(a)
            if n + 1 == n_max:
                break
            nxt = sqrt(2.0 / (n + 1)) * xi * cur - sqrt(<double>n / (n + 1)) * prev
            prev = cur
            cur = nxt
            if fabs(cur) > _BIG:
                cur /= _BIG
                prev /= _BIG
                logscale += _LOG_BIG
    return out


cdef inline double _shape(int family, double s) nogil:
    if s < 0.0:
        return 0.0
    if family == POISSON:
        return exp(-s)
    if family == GUE:
        return 32.0 / (M_PI * M_PI) * s * s * exp(-4.0 * s * s / M_PI)
    return 0.5 * M_PI * s * exp(-0.25 * M_PI * s * s)


def shape_values(int family, s):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ss = np.ascontiguousarray(s, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty_like(ss)
    cdef Py_ssize_t i
    for i in range(ss.shape[0]):
        out[i] = _shape(family, ss[i])
    return out


def family_rss(int family, const double[::1] n, const double[::1] p,
               double amplitude, double scale, double shift):
    """Sum of squared residuals of ``amplitude * f((n - shift) / scale)``."""
    cdef Py_ssize_t i
    cdef double r, acc = 0.0
    if scale <= 0.0:
        return float("inf")
    for i in range(n.shape[0]):
        r = p[i] - amplitude * _shape(family, (n[i] - shift) / scale)
        acc += r * r
    return acc
