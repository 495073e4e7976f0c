# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled path kernels; same contract and operation order as ``_paths_py``."""

import numpy as np
from libc.math cimport sqrt


def ou_quadratic_integral(const double[:, :, ::1] z, const double[::1] decay,
                          const double[::1] scale, const double[::1] c, double dt):
    cdef Py_ssize_t paths = z.shape[0], steps = z.shape[1], n = z.shape[2]
    cdef Py_ssize_t p, k, i
    cdef double x, cur, prev, acc
    out_acc = np.zeros(paths)
    out_xi = np.zeros((paths, n))
    cdef double[::1] acc_v = out_acc
    cdef double[:, ::1] xi = out_xi
    with nogil:
        for p in range(paths):
            prev = 0.0
            acc = 0.0
            for k in range(steps):
                for i in range(n):
                    xi[p, i] = decay[i] * xi[p, i] + scale[i] * z[p, k, i]
                x = c[0] * xi[p, 0]
                for i in range(1, n):
                    x = x + c[i] * xi[p, i]
                cur = x * x
                acc = acc + 0.5 * (prev + cur) * dt
                prev = cur
            acc_v[p] = acc
    return out_acc, out_xi


def levy_area(const double[:, :, :, ::1] z, double dt):
    cdef Py_ssize_t paths = z.shape[0], steps = z.shape[1], n = z.shape[2]
    cdef Py_ssize_t p, k, l
    cdef double sq = sqrt(dt), d1, d2
    out_s = np.zeros((paths, n))
    out_w = np.zeros((paths, n, 2))
    cdef double[:, ::1] s = out_s
    cdef double[:, :, ::1] w = out_w
    with nogil:
        for p in range(paths):
            for k in range(steps):
                for l in range(n):
                    d1 = sq * z[p, k, l, 0]
                    d2 = sq * z[p, k, l, 1]
                    s[p, l] = s[p, l] + (w[p, l, 1] * d1 - w[p, l, 0] * d2)
                    w[p, l, 0] = w[p, l, 0] + d1
                    w[p, l, 1] = w[p, l, 1] + d2
    return out_s, out_w
