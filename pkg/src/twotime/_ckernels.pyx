# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled loops for the product form of the correlation amplitude."""
import numpy as np

from libc.math cimport cos, sin


cdef inline void _product(const double[::1] g, const double[::1] pol, double t,
                          double* re_out, double* im_out) noexcept nogil:
    cdef Py_ssize_t k
    cdef Py_ssize_t n = g.shape[0]
    cdef double re = 1.0
    cdef double im = 0.0
    cdef double c, s, tmp
    for k in range(n):
        c = cos(2.0 * g[k] * t)
        s = pol[k] * sin(2.0 * g[k] * t)
        tmp = re * c - im * s
        im = re * s + im * c
        re = tmp
    re_out[0] = re
    im_out[0] = im


def correlation_product(const double[::1] g, const double[::1] pol, double t):
    cdef double re, im
    _product(g, pol, t, &re, &im)
    return complex(re, im)


def correlation_series(const double[::1] g, const double[::1] pol, const double[::1] times):
    cdef Py_ssize_t j
    cdef Py_ssize_t m = times.shape[0]
    out = np.empty(m, dtype=np.complex128)
    cdef double complex[::1] view = out
    cdef double re, im
    with nogil:
        for j in range(m):
            _product(g, pol, times[j], &re, &im)
            view[j] = re + 1j * im
    return out
