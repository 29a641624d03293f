# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled transport kernels; see ``_kernels_py`` for the reference versions."""

import numpy as np

from libc.math cimport cos


def propagator_sum(ds, const double complex[::1] w, const double complex[::1] z):
    cdef const long long[::1] dv = np.ascontiguousarray(ds, dtype=np.int64)
    cdef Py_ssize_t n = dv.shape[0]
    cdef long long M = z.shape[0]
    cdef Py_ssize_t a
    cdef long long q, d, r
    cdef double complex acc
    out = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] o = out
    with nogil:
        for a in range(n):
            d = dv[a] % M
            if d < 0:
                d += M
            acc = 0
            r = 0
            for q in range(1, M + 1):
                r += d
                if r >= M:
                    r -= M
                acc = acc + w[r] * z[q - 1]
            o[a] = acc / M
    return out


def f_cosine_sum(deltas, const double[::1] et):
    cdef const long long[::1] dv = np.ascontiguousarray(deltas, dtype=np.int64)
    cdef Py_ssize_t n = dv.shape[0]
    cdef Py_ssize_t M = et.shape[0]
    cdef Py_ssize_t a, q, dl
    cdef double acc
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for a in range(n):
            dl = dv[a]
            acc = 0.0
            for q in range(M - dl):
                acc += cos(et[q] - et[q + dl])
            o[a] = 2.0 * acc
    return out


def p1_double_sum(long long N, const double complex[::1] w, const double complex[::1] z):
    cdef long long M = z.shape[0]
    cdef long long x, y, q, d, r
    cdef double complex acc
    cdef double total = 0.0
    with nogil:
        for y in range(1, N + 1):
            for x in range(1, N + 1):
                d = (x - y) % M
                if d < 0:
                    d += M
                acc = 0
                r = 0
                for q in range(1, M + 1):
                    r += d
                    if r >= M:
                        r -= M
                    acc = acc + w[r] * z[q - 1]
                acc = acc / M
                total += acc.real * acc.real + acc.imag * acc.imag
    return total / N
