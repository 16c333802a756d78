# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for archive filtering and 2-D hypervolume sweeps."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"


def margin_dominated(const double[:, ::1] values, const double[::1] u, double a):
    cdef Py_ssize_t k = values.shape[0]
    cdef Py_ssize_t m = values.shape[1]
    cdef Py_ssize_t j, i
    cdef bint inside
    for j in range(k):
        inside = True
        for i in range(m):
            if u[i] < values[j, i] - a:
                inside = False
                break
        if inside:
            return True
    return False


def dominated_mask(const double[:, ::1] values, const double[::1] u):
    cdef Py_ssize_t k = values.shape[0]
    cdef Py_ssize_t m = values.shape[1]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] out = np.zeros(k, dtype=np.uint8)
    cdef unsigned char[::1] ov = out
    cdef Py_ssize_t j, i
    cdef bint ge, gt
    for j in range(k):
        ge = True
        gt = False
        for i in range(m):
            if values[j, i] < u[i]:
                ge = False
                break
            if values[j, i] > u[i]:
                gt = True
        if ge and gt:
            ov[j] = 1
    return out


def nondominated_mask(const double[:, ::1] values):
    cdef Py_ssize_t k = values.shape[0]
    cdef Py_ssize_t m = values.shape[1]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] out = np.ones(k, dtype=np.uint8)
    cdef unsigned char[::1] ov = out
    cdef Py_ssize_t j, t, i
    cdef bint ge, gt
    for j in range(k):
        for t in range(k):
            if t == j:
                continue
            ge = True
            gt = False
            for i in range(m):
                if values[j, i] < values[t, i]:
                    ge = False
                    break
                if values[j, i] > values[t, i]:
                    gt = True
            if ge and gt:
                ov[j] = 0
                break
    return out


def hv2d_sorted(const double[:, ::1] values, double r0, double r1):
    cdef Py_ssize_t k = values.shape[0]
    cdef double total = 0.0
    cdef double y_prev = r1
    cdef Py_ssize_t i
    cdef double f0, f1
    for i in range(k):
        f0 = values[i, 0]
        f1 = values[i, 1]
        if f1 < y_prev:
            total += (r0 - f0) * (y_prev - f1)
            y_prev = f1
    return total
