"""Pure-Python fallback for the compiled kernels in ``_kernels.pyx``.

Same algorithm, same thresholds: a divided-difference table over sorted
nodes where every window whose spread is at most ``SERIES_SPREAD`` is
evaluated by a positive-term power series instead of by subtraction.
"""

from __future__ import annotations

import math

import numpy as np

MAXNODES = 32
MAXTERMS = 500
SERIES_SPREAD = 1.0


def set_series_spread(value: float) -> None:
    global SERIES_SPREAD
    SERIES_SPREAD = float(value)


def get_series_spread() -> float:
    return SERIES_SPREAD


def _series(z, lo, hi):
    m = hi - lo
    inv = 1.0 / math.factorial(m)
    h = [1.0] * (m + 1)
    delta = [0.0] + [z[lo + k] - z[lo] for k in range(1, m + 1)]
    total = inv
    for r in range(1, MAXTERMS):
        h[0] = 0.0
        for k in range(1, m + 1):
            h[k] = h[k - 1] + delta[k] * h[k]
        inv /= r + m
        term = h[m] * inv
        total += term
        if term <= 1e-17 * total:
            break
    return math.exp(z[lo]) * total


def _dd(nodes):
    z = sorted(nodes)
    n = len(z)
    top = z[-1]
    z = [v - top for v in z]
    if z[-1] - z[0] <= SERIES_SPREAD:
        return math.exp(top) * _series(z, 0, n - 1)
    table = [math.exp(v) for v in z]
    for length in range(2, n + 1):
        for i in range(n - length + 1):
            j = i + length - 1
            if z[j] - z[i] <= SERIES_SPREAD:
                table[i] = _series(z, i, j)
            else:
                table[i] = (table[i + 1] - table[i]) / (z[j] - z[i])
    return math.exp(top) * table[0]


def dd_exp(nodes) -> float:
    z = [float(v) for v in np.ravel(nodes)]
    if not 1 <= len(z) <= MAXNODES:
        raise ValueError(f"need 1..{MAXNODES} nodes, got {len(z)}")
    return _dd(z)


def simplex_values(nodes) -> np.ndarray:
    z = np.asarray(nodes, dtype=float)
    return np.array([_dd(list(row)) for row in z], dtype=float)


def simplex_derivatives(nodes, hessian: bool = True):
    z = np.asarray(nodes, dtype=float)
    S, k = z.shape
    val = np.empty(S)
    grad = np.empty((S, k))
    hess = np.empty((S, k, k)) if hessian else None
    for s in range(S):
        row = list(z[s])
        val[s] = _dd(row)
        for i in range(k):
            grad[s, i] = _dd(row + [row[i]])
        if hessian:
            for i in range(k):
                for j in range(i, k):
                    v = _dd(row + [row[i], row[j]])
                    if i == j:
                        hess[s, i, i] = 2.0 * v
                    else:
                        hess[s, i, j] = hess[s, j, i] = v
    return val, grad, hess
