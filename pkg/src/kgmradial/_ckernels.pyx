# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled collocation kernels; same contracts as ``_kernels_py``."""

import numpy as np
from libc.math cimport fabs, floor, pow, INFINITY


cdef inline int _int_exp(double p):
    # small integer exponents are evaluated by multiplication, which beats libm pow
    if p >= 0.0 and p <= 16.0 and floor(p) == p:
        return <int>p
    return -1


cdef inline double _powabs(double x, double p, int ip) nogil:
    cdef double a = fabs(x), r = 1.0
    if ip < 0:
        return 0.0 if a == 0.0 and p > 0.0 else pow(a, p)
    while ip:
        if ip & 1:
            r *= a
        a *= a
        ip >>= 1
    return r


def energy_sums(const double[::1] u, const double[::1] phi, const double[::1] vshift,
                const double[::1] w, double p):
    cdef Py_ssize_t j, n = u.shape[0]
    cdef double a = 0.0, b = 0.0, d = 0.0, c = 0.0, u2w
    cdef int ip = _int_exp(p)
    for j in range(n):
        u2w = w[j] * u[j] * u[j]
        a += vshift[j] * u2w
        b += phi[j] * u2w
        d += phi[j] * phi[j] * u2w
        c += w[j] * _powabs(u[j], p, ip)
    return a, b, d, c


def gradient_density(const double[::1] u, const double[::1] phi, const double[::1] vshift,
                     double omega, double p):
    cdef Py_ssize_t j, n = u.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef double q = p - 2.0
    cdef int ip = _int_exp(q)
    for j in range(n):
        o[j] = (vshift[j] + (2.0 * omega - phi[j]) * phi[j]) * u[j] - _powabs(u[j], q, ip) * u[j]
    return out


def power_sum(const double[::1] u, const double[::1] w, double p):
    cdef Py_ssize_t j, n = u.shape[0]
    cdef double acc = 0.0
    cdef int ip = _int_exp(p)
    for j in range(n):
        acc += w[j] * _powabs(u[j], p, ip)
    return acc


def ratio_grid_min(const double[::1] k, double t, double s):
    cdef Py_ssize_t j, n = k.shape[0]
    cdef double best = INFINITY, v
    cdef double e = -2.0 * s
    for j in range(n):
        v = (k[j] * k[j] + t) * pow(k[j], e)
        if v < best:
            best = v
    return best
