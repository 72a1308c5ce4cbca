# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel for the truncated double series F_XY(t; x, w)."""
import numpy as np

from libc.stdlib cimport malloc, free


cdef void _coefficients(double z, int parity, int order, double *a) noexcept nogil:
    cdef int m, k
    cdef double z2 = z * z
    a[0] = z if parity else 1.0
    for m in range(1, order + 1):
        k = 2 * m + parity
        a[m] = -a[m - 1] * z2 / ((k - 1) * k)


cdef double _f_series(int px, int pw, double x, double w, double t, int order,
                      double *a, double *b) noexcept nogil:
    cdef int k, m
    cdef double conv, total = 0.0
    if t == 0.0:
        return 0.0
    _coefficients(x * t, px, order, a)
    _coefficients(w * t, pw, order, b)
    # tail first, matching the numpy fallback
    for k in range(order, -1, -1):
        conv = 0.0
        for m in range(k + 1):
            conv += a[m] * b[k - m]
        total += conv / (2.0 * k + 1.0 + px + pw)
    return t * total


def f_series(int px, int pw, double x, double w, double t, int order):
    """t * sum_{k<=order} conv(a, b)[k] / (2k + 1 + px + pw)."""
    cdef double *a = <double *> malloc((order + 1) * sizeof(double))
    cdef double *b = <double *> malloc((order + 1) * sizeof(double))
    cdef double r
    if a == NULL or b == NULL:
        free(a)
        free(b)
        raise MemoryError()
    try:
        r = _f_series(px, pw, x, w, t, order, a, b)
    finally:
        free(a)
        free(b)
    return r


def f_series_many(int px, int pw, double[::1] x, double[::1] w, double t, int order):
    cdef Py_ssize_t i, n = x.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    cdef double *a = <double *> malloc((order + 1) * sizeof(double))
    cdef double *b = <double *> malloc((order + 1) * sizeof(double))
    if a == NULL or b == NULL:
        free(a)
        free(b)
        raise MemoryError()
    try:
        with nogil:
            for i in range(n):
                o[i] = _f_series(px, pw, x[i], w[i], t, order, a, b)
    finally:
        free(a)
        free(b)
    return out
