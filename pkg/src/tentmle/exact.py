"""Exact rational linear algebra used to certify regularity.

Floats are converted with ``Fraction(float)``, which is exact, so every
decision made here is a statement about the binary inputs themselves.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

Matrix = list[list[Fraction]]


def rationalize(values) -> list:
    """Exact rational copy of a (nested) sequence of floats or ints."""
    if isinstance(values, np.ndarray):
        values = values.tolist()
    if isinstance(values, (list, tuple)):
        return [rationalize(v) for v in values]
    return Fraction(values)


def det(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    """Determinant by fraction-exact Gaussian elimination."""
    a = [list(r) for r in rows]
    n = len(a)
    sign = 1
    result = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            sign = -sign
        p = a[col][col]
        result *= p
        for r in range(col + 1, n):
            f = a[r][col]
            if f:
                f /= p
                row_r, row_c = a[r], a[col]
                for c in range(col + 1, n):
                    row_r[c] -= f * row_c[c]
    return sign * result


def rref(rows: Sequence[Sequence[Fraction]]) -> tuple[Matrix, list[int]]:
    a = [list(r) for r in rows]
    if not a:
        return a, []
    m, n = len(a), len(a[0])
    pivots = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, m) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        pv = a[r][c]
        a[r] = [v / pv for v in a[r]]
        for i in range(m):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [vi - f * vr for vi, vr in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    return a, pivots


def rank(rows) -> int:
    return len(rref(rows)[1])


def nullspace(rows: Sequence[Sequence[Fraction]], ncols: int) -> Matrix:
    """Basis of the right nullspace, returned as a list of column vectors."""
    if not rows:
        return [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    a, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for i, p in enumerate(pivots):
            v[p] = -a[i][f]
        basis.append(v)
    return basis


def matvec(rows: Matrix, v: Sequence[Fraction]) -> list[Fraction]:
    return [sum((a * b for a, b in zip(row, v)), Fraction(0)) for row in rows]


def strict_feasibility(rows: Matrix, ncols: int):
    """Decide whether ``A z > 0`` has a solution, exactly.

    Gordan's alternative: either some ``z`` has ``A z > 0`` componentwise, or
    some ``lam >= 0``, ``lam != 0`` has ``A^T lam = 0``.  The second system is
    solved by a phase-one simplex method with Bland's rule over ``Fraction``;
    when it is infeasible, the final dual multipliers give ``z``.

    Returns ``(True, z)`` or ``(False, lam)``.  Both certificates are checked
    before being returned.
    """
    m = len(rows)
    if m == 0:
        return True, [Fraction(0)] * ncols
    # Equality system K lam = b with K = [A^T; 1^T], b = (0, ..., 0, 1).
    k = ncols + 1
    ncol_total = m + k
    tab = []
    for i in range(ncols):
        row = [rows[j][i] for j in range(m)]
        row += [Fraction(int(i == a)) for a in range(k)]
        row.append(Fraction(0))
        tab.append(row)
    tab.append([Fraction(1)] * m + [Fraction(int(a == ncols)) for a in range(k)] + [Fraction(1)])
    # make every right-hand side nonnegative (already true), basis = artificials
    basis = [m + i for i in range(k)]
    cost = [Fraction(0)] * m + [Fraction(1)] * k

    def reduced(j):
        return cost[j] - sum((cost[basis[i]] * tab[i][j] for i in range(k)), Fraction(0))

    while True:
        entering = next((j for j in range(ncol_total) if reduced(j) < 0), None)
        if entering is None:
            break
        best = None
        for i in range(k):
            a = tab[i][entering]
            if a > 0:
                ratio = tab[i][-1] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:  # unbounded cannot happen in phase one
            raise ArithmeticError("phase-one simplex unbounded")
        r = best[1]
        pv = tab[r][entering]
        tab[r] = [v / pv for v in tab[r]]
        for i in range(k):
            if i != r and tab[i][entering] != 0:
                f = tab[i][entering]
                tab[i] = [vi - f * vr for vi, vr in zip(tab[i], tab[r])]
        basis[r] = entering

    objective = sum((cost[basis[i]] * tab[i][-1] for i in range(k)), Fraction(0))
    if objective == 0:
        lam = [Fraction(0)] * m
        for i, b in enumerate(basis):
            if b < m:
                lam[b] = tab[i][-1]
        check = [sum((rows[j][c] * lam[j] for j in range(m)), Fraction(0)) for c in range(ncols)]
        if any(check) or sum(lam) != 1 or min(lam) < 0:
            raise ArithmeticError("Gordan certificate failed verification")
        return False, lam
    # duals: pi = c_B B^{-1}; B^{-1} sits in the artificial columns
    pi = [sum((cost[basis[i]] * tab[i][m + a] for i in range(k)), Fraction(0)) for a in range(k)]
    z = [-p for p in pi[:ncols]]
    values = matvec(rows, z)
    if min(values) <= 0:
        raise ArithmeticError("strict feasibility certificate failed verification")
    return True, z
