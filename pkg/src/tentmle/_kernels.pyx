# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled divided-difference kernels for exp.

Every integral, gradient and Hessian entry the estimator needs is a divided
difference of exp over a small multiset of nodes, so this is the inner loop.
The pure-Python twin lives in ``_pykernels.py`` and must stay numerically
identical up to rounding.
"""

import numpy as np
from libc.math cimport exp

cdef enum:
    MAXNODES = 32
    MAXTERMS = 500

cdef double SERIES_SPREAD = 1.0


def set_series_spread(double value):
    global SERIES_SPREAD
    SERIES_SPREAD = value


def get_series_spread():
    return SERIES_SPREAD


cdef inline void _sort(double* z, int n) noexcept nogil:
    cdef int i, j
    cdef double key
    for i in range(1, n):
        key = z[i]
        j = i - 1
        while j >= 0 and z[j] > key:
            z[j + 1] = z[j]
            j -= 1
        z[j + 1] = key


cdef double _series(double* z, int lo, int hi) noexcept nogil:
    # Positive-term series in deviations from the smallest node z[lo].
    cdef int m = hi - lo
    cdef int k, r
    cdef double h[MAXNODES]
    cdef double delta[MAXNODES]
    cdef double inv = 1.0
    cdef double total, term
    for k in range(2, m + 1):
        inv /= k
    for k in range(m + 1):
        h[k] = 1.0
    for k in range(1, m + 1):
        delta[k] = z[lo + k] - z[lo]
    total = inv
    for r in range(1, MAXTERMS):
        h[0] = 0.0
        for k in range(1, m + 1):
            h[k] = h[k - 1] + delta[k] * h[k]
        inv /= (r + m)
        term = h[m] * inv
        total += term
        if term <= 1e-17 * total:
            break
    return exp(z[lo]) * total


cdef double _dd_sorted_shifted(double* z, int n) noexcept nogil:
    # z sorted ascending and shifted so that z[n-1] == 0.
    cdef double table[MAXNODES]
    cdef int i, length, j
    if z[n - 1] - z[0] <= SERIES_SPREAD:
        return _series(z, 0, n - 1)
    for i in range(n):
        table[i] = exp(z[i])
    for length in range(2, n + 1):
        for i in range(n - length + 1):
            j = i + length - 1
            if z[j] - z[i] <= SERIES_SPREAD:
                table[i] = _series(z, i, j)
            else:
                table[i] = (table[i + 1] - table[i]) / (z[j] - z[i])
    return table[0]


cdef double _dd(double* z, int n) noexcept nogil:
    cdef int i
    cdef double top
    _sort(z, n)
    top = z[n - 1]
    for i in range(n):
        z[i] -= top
    return exp(top) * _dd_sorted_shifted(z, n)


def dd_exp(nodes):
    """Divided difference of exp over ``nodes`` (repeats allowed)."""
    cdef double[::1] src = np.ascontiguousarray(nodes, dtype=np.float64).ravel()
    cdef double buf[MAXNODES]
    cdef int n = src.shape[0]
    cdef int i
    if n < 1 or n > MAXNODES:
        raise ValueError(f"need 1..{MAXNODES} nodes, got {n}")
    for i in range(n):
        buf[i] = src[i]
    return _dd(buf, n)


def simplex_values(nodes):
    """Row-wise exp divided differences of an ``(S, k)`` array."""
    cdef double[:, ::1] z = np.ascontiguousarray(nodes, dtype=np.float64)
    cdef Py_ssize_t S = z.shape[0]
    cdef int k = z.shape[1]
    out_arr = np.empty(S)
    cdef double[::1] out = out_arr
    cdef double buf[MAXNODES]
    cdef Py_ssize_t s
    cdef int i
    if k > MAXNODES:
        raise ValueError("too many nodes per row")
    with nogil:
        for s in range(S):
            for i in range(k):
                buf[i] = z[s, i]
            out[s] = _dd(buf, k)
    return out_arr


def simplex_derivatives(nodes, bint hessian=True):
    """Values, first and (optionally) second partials of row-wise exp[nodes].

    Returns ``(val, grad, hess)`` with shapes ``(S,)``, ``(S, k)`` and
    ``(S, k, k)``; ``hess`` is ``None`` when not requested.
    """
    cdef double[:, ::1] z = np.ascontiguousarray(nodes, dtype=np.float64)
    cdef Py_ssize_t S = z.shape[0]
    cdef int k = z.shape[1]
    val_arr = np.empty(S)
    grad_arr = np.empty((S, k))
    hess_rows = S if hessian else 1
    hess_shape = (hess_rows, k, k)
    hess_arr = np.empty(hess_shape)
    cdef double[::1] val = val_arr
    cdef double[:, ::1] grad = grad_arr
    cdef double[:, :, ::1] hv = hess_arr
    cdef double buf[MAXNODES]
    cdef Py_ssize_t s
    cdef int i, j, a
    cdef double v
    if k + 2 > MAXNODES:
        raise ValueError("too many nodes per row")
    with nogil:
        for s in range(S):
            for a in range(k):
                buf[a] = z[s, a]
            val[s] = _dd(buf, k)
            for i in range(k):
                for a in range(k):
                    buf[a] = z[s, a]
                buf[k] = z[s, i]
                grad[s, i] = _dd(buf, k + 1)
            if hessian:
                for i in range(k):
                    for j in range(i, k):
                        for a in range(k):
                            buf[a] = z[s, a]
                        buf[k] = z[s, i]
                        buf[k + 1] = z[s, j]
                        v = _dd(buf, k + 2)
                        if i == j:
                            hv[s, i, i] = 2.0 * v
                        else:
                            hv[s, i, j] = v
                            hv[s, j, i] = v
    if hessian:
        return val_arr, grad_arr, hess_arr
    return val_arr, grad_arr, None
