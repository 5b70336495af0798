# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled simplex inner-loop kernels (ftran, pivot update, ratio test).

Mirrors nwaplan.lp._pykernels; selected at import by nwaplan.lp.kernels.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, isfinite

BACKEND = "compiled"


def ftran(double[:, ::1] binv, cnp.int64_t[::1] idx, double[::1] val, double[::1] out):
    """out = binv[:, idx] @ val."""
    cdef Py_ssize_t m = binv.shape[0]
    cdef Py_ssize_t k = idx.shape[0]
    cdef Py_ssize_t i, j
    cdef double acc
    for i in range(m):
        acc = 0.0
        for j in range(k):
            acc += val[j] * binv[i, idx[j]]
        out[i] = acc


def pivot_update(double[:, ::1] binv, double[::1] d, Py_ssize_t r):
    """Rank-1 product-form update of the basis inverse after a pivot on row r."""
    cdef Py_ssize_t m = binv.shape[0]
    cdef double dr = d[r]
    cdef double di
    cdef Py_ssize_t i, j
    for j in range(m):
        binv[r, j] /= dr
    for i in range(m):
        if i == r:
            continue
        di = d[i]
        if di != 0.0:
            for j in range(m):
                binv[i, j] -= di * binv[r, j]


def ratio_test(double[::1] g, double[::1] xb, double[::1] down_t,
               double[::1] up_t, cnp.int64_t[::1] basis, double pivot_tol):
    """Blocking basic variable for a move of the entering variable.

    Same contract as the python backend: (row, theta), row = -1 when
    unblocked, lowest-variable-index tie-breaking.
    """
    cdef Py_ssize_t m = g.shape[0]
    cdef Py_ssize_t i
    cdef double th, tmin = INFINITY
    for i in range(m):
        if g[i] > pivot_tol:
            th = (xb[i] - down_t[i]) / g[i]
        elif g[i] < -pivot_tol:
            th = (up_t[i] - xb[i]) / (-g[i])
        else:
            continue
        if th < 0.0:
            th = 0.0
        if th < tmin:
            tmin = th
    if not isfinite(tmin):
        return -1, INFINITY
    cdef double cutoff = tmin + 1e-10 * (1.0 + tmin)
    cdef Py_ssize_t best = -1
    cdef cnp.int64_t bestvar = 0
    for i in range(m):
        if g[i] > pivot_tol:
            th = (xb[i] - down_t[i]) / g[i]
        elif g[i] < -pivot_tol:
            th = (up_t[i] - xb[i]) / (-g[i])
        else:
            continue
        if th < 0.0:
            th = 0.0
        if th <= cutoff:
            if best < 0 or basis[i] < bestvar:
                best = i
                bestvar = basis[i]
    if g[best] > 0.0:
        th = (xb[best] - down_t[best]) / g[best]
    else:
        th = (up_t[best] - xb[best]) / (-g[best])
    if th < 0.0:
        th = 0.0
    return best, th
