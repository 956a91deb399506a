"""The symmetric function H and its partial derivatives.

``H(u_1, ..., u_d)`` is the weighted moment

    H(u) = integral over the standard simplex of (1 - sum t_i) exp(u . t) dt,

equivalently the divided difference ``exp[0, 0, u_1, ..., u_d]`` and the
series ``sum_r h_r(u) / (r + d + 1)!`` in complete homogeneous symmetric
polynomials.  Three independent evaluations are provided so that each can
check the others; :func:`h_eval` picks the accurate one for the input.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from . import kernels
from .errors import NearSingular

TAU_H = 0.05
"""Minimum gap (between arguments, and from zero) for the closed form."""

SERIES_RTOL = 1e-15
SERIES_MAX_TERMS = 500
SERIES_MAX_SPREAD = 100.0
"""Beyond this argument spread ``h_eval`` uses the divided-difference table."""

EXP_LIMIT = 700.0


def _args(u) -> np.ndarray:
    a = np.atleast_1d(np.asarray(u, dtype=float)).reshape(-1)
    if a.size < 1:
        raise ValueError("H needs at least one argument")
    if not np.all(np.isfinite(a)):
        raise ValueError("H arguments must be finite")
    return a


def separation(u) -> float:
    """Smallest gap among the arguments and between each argument and 0."""
    a = np.sort(np.concatenate([_args(u), [0.0]]))
    return float(np.min(np.diff(a))) if a.size > 1 else math.inf


def h_closed(u) -> float:
    """Closed form ``(-1)^d (1 + sum 1/u_i) / prod u_i + sum_j e^{u_j} / (u_j^2 prod_{k!=j}(u_j - u_k))``.

    Raises
    ------
    NearSingular
        If two arguments, or an argument and zero, are closer than ``TAU_H``;
        or if an argument exceeds ``EXP_LIMIT`` in magnitude.
    """
    a = _args(u)
    if separation(a) <= TAU_H:
        raise NearSingular(f"arguments closer than {TAU_H}; use h_series")
    if np.max(np.abs(a)) > EXP_LIMIT:
        raise NearSingular(f"arguments beyond +-{EXP_LIMIT}; use h_eval")
    d = a.size
    first = (-1) ** d * (1.0 + np.sum(1.0 / a)) / np.prod(a)
    second = 0.0
    for j in range(d):
        others = np.delete(a, j)
        second += math.exp(a[j]) / (a[j] ** 2 * np.prod(a[j] - others))
    return float(first + second)


def complete_homogeneous(r: int, u) -> float:
    """Complete homogeneous symmetric polynomial ``h_r(u)``.

    Uses ``h_r(u_1..u_k) = h_r(u_1..u_{k-1}) + u_k h_{r-1}(u_1..u_k)``.

    Examples
    --------
    >>> complete_homogeneous(3, [1.0, 1.0])
    4.0
    """
    if r < 0:
        return 0.0
    a = _args(u)
    h = np.zeros(r + 1)
    h[0] = 1.0
    for uk in a:
        for deg in range(1, r + 1):
            h[deg] += uk * h[deg - 1]
    return float(h[r])


def _shifted_series(nodes: np.ndarray, rel_tol: float, max_terms: int) -> float:
    """``exp[nodes]`` by the positive series in deviations from the smallest node."""
    z = np.sort(nodes)
    base = z[0]
    delta = z[1:] - base
    m = delta.size
    h = np.ones(m + 1)
    inv = 1.0 / math.factorial(m)
    total = inv
    for r in range(1, max_terms):
        h[0] = 0.0
        for k in range(1, m + 1):
            h[k] = h[k - 1] + delta[k - 1] * h[k]
        inv /= r + m
        term = h[m] * inv
        total += term
        if term <= rel_tol * total:
            return math.exp(base) * total
    raise ArithmeticError(f"series did not converge in {max_terms} terms (spread too large)")


def h_series(u, rel_tol: float = SERIES_RTOL, max_terms: int = SERIES_MAX_TERMS) -> float:
    """``sum_r h_r(u) / (r + d + 1)!``, summed adaptively.

    For nonnegative arguments this is the plain series.  With negative
    arguments the same divided difference is expanded around the smallest
    node instead, which keeps every term positive; the value is identical but
    no cancellation occurs.

    Raises
    ------
    ArithmeticError
        If ``max_terms`` terms do not reach ``rel_tol`` (argument spread in
        the hundreds; the closed form applies there).
    """
    a = _args(u)
    return _shifted_series(np.concatenate([[0.0, 0.0], a]), rel_tol, max_terms)


def h_eval(u) -> float:
    """Accurate ``H(u)`` for any real arguments.

    Well separated arguments of moderate size go to :func:`h_closed`;
    clustered ones to :func:`h_series`; very wide clustered spreads to the
    divided-difference table of :mod:`tentmle.kernels`.
    """
    a = _args(u)
    if separation(a) > TAU_H and np.max(np.abs(a)) <= EXP_LIMIT:
        return h_closed(a)
    nodes = np.concatenate([[0.0, 0.0], a])
    if np.ptp(nodes) <= SERIES_MAX_SPREAD:
        return _shifted_series(nodes, SERIES_RTOL, SERIES_MAX_TERMS)
    return float(kernels.dd_exp(nodes))


@lru_cache(maxsize=None)
def _collapsed_rule(d: int, m: int):
    """Product Gauss-Jacobi rule on the standard ``d``-simplex (collapsed coordinates)."""
    grids = []
    for i in range(d):
        alpha = d - 1 - i
        x, w = roots_jacobi(m, alpha, 0)
        grids.append(((x + 1.0) / 2.0, w / 2.0 ** (alpha + 1)))
    mesh = np.meshgrid(*[g[0] for g in grids], indexing="ij")
    wmesh = np.meshgrid(*[g[1] for g in grids], indexing="ij")
    s = [v.ravel() for v in mesh]
    weight = np.prod([v.ravel() for v in wmesh], axis=0)
    t = np.empty((weight.size, d))
    remaining = np.ones(weight.size)
    for i in range(d):
        t[:, i] = remaining * s[i]
        remaining = remaining * (1.0 - s[i])
    return t, weight


def h_quadrature(u, num_nodes: int = 24) -> float:
    """``H(u)`` by numerical integration of its simplex-integral form (``d <= 3``).

    An independent oracle only: the integrand ``(1 - sum t) exp(u . t)`` is
    integrated with a collapsed Gauss-Jacobi product rule of ``num_nodes``
    points per axis.
    """
    a = _args(u)
    d = a.size
    if d > 3:
        raise ValueError("h_quadrature is limited to d <= 3")
    t, w = _collapsed_rule(d, int(num_nodes))
    integrand = (1.0 - t.sum(axis=1)) * np.exp(t @ a)
    return float(w @ integrand)


def h_partial_confluent(u, i: int) -> float:
    """``dH/du_i`` as the confluent divided difference ``exp[0, 0, u, u_i]``."""
    a = _args(u)
    return float(kernels.dd_exp(np.concatenate([[0.0, 0.0], a, [a[i]]])))


def h_gradient(u) -> np.ndarray:
    """Gradient of ``H`` by confluent divided differences."""
    a = _args(u)
    return np.array([h_partial_confluent(a, i) for i in range(a.size)])


def h_partial(u, i: int) -> float:
    """``dH/du_i`` (0-based ``i``).

    With ``x = u`` permuted so that ``u_i`` comes first,
    ``x_1 dH/dx_1 = e^{x_1} H(-x_1, x_2 - x_1, ..., x_d - x_1) - H(x)``.
    That identity is used when ``|u_i| >= TAU_H``; closer to zero the
    division by ``u_i`` would cancel, and the confluent divided difference is
    used instead.
    """
    a = _args(u)
    x1 = a[i]
    if abs(x1) < TAU_H:
        return h_partial_confluent(a, i)
    rest = np.delete(a, i) - x1
    shifted = np.concatenate([[-x1], rest])
    return (math.exp(x1) * h_eval(shifted) - h_eval(a)) / x1
