"""Point configurations, tent functions and regular subdivisions.

Indices are 1-based at every public boundary (cells, simplices, JSON) and
0-based internally.  All combinatorial predicates (orientations, circuits,
regularity) are decided exactly: floating determinants are trusted only when
they clear a Hadamard-type error filter and are recomputed over ``Fraction``
otherwise.

Volumes are normalized volumes, ``|det [[1 ... 1], [x_0 ... x_d]]|``, which is
``d!`` times the Euclidean volume.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError

from . import exact
from .errors import DegenerateConfiguration, HullDegenerate, InvalidInput, NotRegular, TooLarge

N_MAX = 9
"""Largest ``n`` accepted by the public triangulation enumerators."""

EPS_FLAT = 1e-9
"""Relative coplanarity tolerance for lifted points (scaled by the height range)."""

EPS_REL = 1e-9
"""Relative tolerance for deciding that a tent pole touches the tent."""

COMBINATORICS_LIMIT = 200_000
"""Cap on the number of ``(d+1)``-subsets tabulated per configuration."""

ENUMERATION_LIMIT = 200_000
"""Cap on the number of triangulations produced by one enumeration."""

HeightVector = np.ndarray
Simplex = tuple[int, ...]


# ---------------------------------------------------------------------------
# value types


@dataclass(frozen=True, eq=False)
class PointConfiguration:
    """Distinct labeled points in ``R^d`` whose convex hull is ``d``-dimensional.

    Parameters
    ----------
    points : array_like, shape (n, d)
        Coordinates.  A 1-D input is read as ``n`` points on the line.
    labels : sequence of str, optional
        Display labels; default ``"1" .. "n"``.

    Raises
    ------
    DegenerateConfiguration
        On duplicate points, ``n < d + 1``, or a lower-dimensional hull.
    """

    points: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[1] < 1:
            raise DegenerateConfiguration("points must be an (n, d) array")
        if not np.all(np.isfinite(pts)):
            raise DegenerateConfiguration("points must be finite")
        n, d = pts.shape
        if n < d + 1:
            raise DegenerateConfiguration(f"need at least d+1 = {d + 1} points, got {n}")
        if len({tuple(row) for row in pts.tolist()}) != n:
            raise DegenerateConfiguration("points must be pairwise distinct")
        if not _full_dimensional(pts):
            raise DegenerateConfiguration("affine span of the points is not all of R^d")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            labels = tuple(str(v) for v in self.labels)
            if len(labels) != n:
                raise DegenerateConfiguration("labels must have one entry per point")
            object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def __eq__(self, other):
        if not isinstance(other, PointConfiguration):
            return NotImplemented
        return self.points.shape == other.points.shape and bool(np.array_equal(self.points, other.points))

    def __hash__(self):
        return hash((self.points.shape, self.points.tobytes()))

    def __repr__(self):
        return f"PointConfiguration(n={self.n}, d={self.d})"

    @classmethod
    def from_json(cls, obj: dict) -> "PointConfiguration":
        if not isinstance(obj, dict) or "points" not in obj:
            raise InvalidInput('configuration JSON needs a "points" array')
        return cls(np.asarray(obj["points"], dtype=float), obj.get("labels"))

    def to_json(self) -> dict:
        out = {"points": self.points.tolist()}
        if self.labels is not None:
            out["labels"] = list(self.labels)
        return out

    @cached_property
    def volume(self) -> float:
        """Normalized volume of the convex hull."""
        return _hull_volume(self.points)

    @cached_property
    def tables(self) -> "_Combinatorics":
        return _Combinatorics(self)


def _full_dimensional(pts: np.ndarray) -> bool:
    centered = pts - pts[0]
    s = np.linalg.svd(centered, compute_uv=False)
    d = pts.shape[1]
    scale = max(float(s[0]), 1e-300)
    if len(s) >= d and s[d - 1] > 1e-8 * scale:
        return True
    return exact.rank(exact.rationalize(centered)) == d


def _hull_volume(pts: np.ndarray) -> float:
    d = pts.shape[1]
    if d == 1:
        return float(pts.max() - pts.min())
    try:
        hull = ConvexHull(pts)
    except QhullError as err:
        raise HullDegenerate(str(err)) from err
    return float(hull.volume) * math.factorial(d)


@dataclass(frozen=True)
class Subdivision:
    """A polyhedral subdivision given by its cells (1-based vertex indices).

    Cells and the cell list are sorted on construction, so equality of two
    subdivisions is equality of their canonical forms.
    """

    cells: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        cells = []
        for cell in self.cells:
            c = tuple(sorted(int(i) for i in cell))
            if not c or c[0] < 1 or len(set(c)) != len(c):
                raise InvalidInput(f"invalid cell {list(cell)}")
            cells.append(c)
        canon = tuple(sorted(set(cells)))
        if len(canon) != len(cells):
            raise InvalidInput("repeated cell")
        object.__setattr__(self, "cells", canon)

    @classmethod
    def from_zero_based(cls, cells: Iterable[Iterable[int]]):
        return cls(tuple(tuple(int(i) + 1 for i in c) for c in cells))

    @classmethod
    def from_json(cls, obj) -> "Subdivision":
        if isinstance(obj, dict):
            obj = obj.get("cells")
        if not isinstance(obj, list):
            raise InvalidInput('subdivision JSON needs a "cells" array')
        return cls(tuple(tuple(c) for c in obj))

    def to_json(self) -> dict:
        return {"cells": [list(c) for c in self.cells]}

    def zero_based(self) -> list[tuple[int, ...]]:
        return [tuple(i - 1 for i in c) for c in self.cells]

    def vertices(self) -> set[int]:
        return set().union(*self.cells) if self.cells else set()

    def key(self) -> str:
        """Compact string such as ``"124|245"`` (multi-digit labels are comma separated)."""
        sep = "," if any(i > 9 for c in self.cells for i in c) else ""
        return "|".join(sep.join(str(i) for i in c) for c in self.cells)

    def is_triangulation(self, d: int) -> bool:
        return all(len(c) == d + 1 for c in self.cells)

    def __len__(self):
        return len(self.cells)

    def __iter__(self):
        return iter(self.cells)


@dataclass(frozen=True)
class Triangulation(Subdivision):
    """A subdivision whose cells are simplices (all of the same size)."""

    def __post_init__(self):
        super().__post_init__()
        if len({len(c) for c in self.cells}) > 1:
            raise InvalidInput("triangulation cells must all have d+1 vertices")


# ---------------------------------------------------------------------------
# combinatorial tables


class _Combinatorics:
    """Per-configuration tables of simplices, orientations and incidences."""

    def __init__(self, config: PointConfiguration):
        pts = config.points
        n, d = pts.shape
        k = d + 1
        total = math.comb(n, k)
        if total > COMBINATORICS_LIMIT:
            raise TooLarge(f"C({n},{k}) = {total} simplices exceeds the table limit {COMBINATORICS_LIMIT}")
        self.config = config
        self.n, self.d, self.k = n, d, k
        self.lifted = np.concatenate([np.ones((n, 1)), pts], axis=1)
        subsets = np.array(list(itertools.combinations(range(n), k)), dtype=np.intp).reshape(-1, k)
        mats = self.lifted[subsets]
        dets = np.linalg.det(mats)
        scale = np.prod(np.linalg.norm(mats, axis=2), axis=1)
        sign = np.sign(dets).astype(np.int8)
        self._exact_det: dict[tuple[int, ...], Fraction] = {}
        self._int_rows: dict = {}
        self._rational_points = exact.rationalize(pts)
        for idx in np.flatnonzero(np.abs(dets) <= 1e-10 * scale):
            value = self.exact_det(tuple(subsets[idx].tolist()))
            sign[idx] = (value > 0) - (value < 0)
            dets[idx] = float(value)
        self.subsets = subsets
        self.subset_sign = sign
        self.subset_index = {tuple(s): i for i, s in enumerate(subsets.tolist())}
        keep = sign != 0
        self.degenerate = not bool(np.all(keep))
        self.simplices = subsets[keep]
        self.orient = sign[keep].astype(int)
        self.volumes = np.abs(dets[keep])
        self.simplex_index = {tuple(s): i for i, s in enumerate(self.simplices.tolist())}
        # barycentric coordinates of every point with respect to every simplex
        self.inverse = np.linalg.inv(mats[keep])
        self.bary = np.einsum("ski,jk->sji", self.inverse, self.lifted)
        self.incidence = np.zeros((len(self.simplices), n), dtype=bool)
        np.put_along_axis(self.incidence, self.simplices, True, axis=1)

    # exact values -------------------------------------------------------

    def exact_det(self, subset: tuple[int, ...]) -> Fraction:
        """Exact ``det`` of the lifted points of a sorted ``(d+1)``-subset."""
        value = self._exact_det.get(subset)
        if value is None:
            rows = [[Fraction(1)] + self._rational_points[i] for i in subset]
            value = exact.det(rows)
            self._exact_det[subset] = value
        return value

    def sign_of(self, subset: Sequence[int]) -> int:
        """Orientation sign of an ordered ``(d+1)``-tuple of indices."""
        order = sorted(range(len(subset)), key=lambda i: subset[i])
        parity = _permutation_parity(order)
        s = int(self.subset_sign[self.subset_index[tuple(sorted(subset))]])
        return -s if parity else s

    def kernel_row(self, base: tuple[int, ...], j: int) -> list[Fraction]:
        """Coefficients of ``y -> l_base(x_j) - y_j`` as an exact length-``n`` row.

        ``l_base`` is the affine interpolant of the heights on the simplex
        ``base``.  The coefficients are the affine dependency of
        ``base + [j]`` normalized to ``-1`` at ``j``.
        """
        Z = tuple(sorted(base + (j,)))
        kappa = {}
        for pos, v in enumerate(Z):
            rest = Z[:pos] + Z[pos + 1 :]
            kappa[v] = (-1) ** pos * self.exact_det(rest)
        scale = -kappa[j]
        row = [Fraction(0)] * self.n
        for v, c in kappa.items():
            row[v] = c / scale
        return row

    # faces and generic point -----------------------------------------------

    @cached_property
    def faces(self):
        """Facet incidences: ``(simplex_faces, members, boundary)``.

        ``simplex_faces[s]`` lists ``(face_id, side)`` for the facets of
        simplex ``s``, where ``side`` tells on which side of the facet's
        hyperplane the opposite vertex lies.  ``members[f]`` lists
        ``(s, side)`` and ``boundary[f]`` is true when every point lies weakly
        on one side of face ``f``.
        """
        d = self.d
        face_id: dict[tuple[int, ...], int] = {}
        members: list[list[tuple[int, int]]] = []
        simplex_faces = []
        for s, simp in enumerate(self.simplices.tolist()):
            entry = []
            for p in range(self.k):
                f = tuple(simp[:p] + simp[p + 1 :])
                side = int(self.orient[s]) * (-1) ** (d - p)
                fid = face_id.get(f)
                if fid is None:
                    fid = face_id[f] = len(members)
                    members.append([])
                members[fid].append((s, side))
                entry.append((fid, side))
            simplex_faces.append(entry)
        boundary = []
        for f in face_id:
            signs = set()
            for j in range(self.n):
                if j in f:
                    continue
                Z = tuple(sorted(f + (j,)))
                p = Z.index(j)
                sg = int(self.subset_sign[self.subset_index[Z]]) * (-1) ** (d - p)
                if sg:
                    signs.add(sg)
            boundary.append(len(signs) <= 1)
        return simplex_faces, members, boundary

    @cached_property
    def seed_simplices(self) -> np.ndarray:
        """Simplices containing a fixed generic interior point."""
        rng = np.random.default_rng(20240531)
        pts = self.config.points
        for _ in range(1000):
            w = rng.random(self.n) + 0.5
            t = np.concatenate([[1.0], (w / w.sum()) @ pts])
            lam = np.einsum("ski,k->si", self.inverse, t)
            if np.min(np.abs(lam)) > 1e-9 * max(1.0, float(np.max(np.abs(lam)))):
                return np.flatnonzero(np.all(lam > 0, axis=1))
        raise HullDegenerate("could not place a generic interior point")

    # proper intersection ---------------------------------------------------

    def circuits(self) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
        """All circuits ``(Z+, Z-)`` of the configuration (one orientation each)."""
        out = []
        k = self.k
        for Z in itertools.combinations(range(self.n), k + 1):
            signs = []
            for pos in range(k + 1):
                rest = Z[:pos] + Z[pos + 1 :]
                signs.append(int(self.subset_sign[self.subset_index[rest]]) * (-1) ** pos)
            if 0 in signs:
                continue
            plus = tuple(v for v, s in zip(Z, signs) if s > 0)
            minus = tuple(v for v, s in zip(Z, signs) if s < 0)
            out.append((plus, minus))
        if self.degenerate:
            out.extend(self._small_circuits())
        return out

    def _small_circuits(self):
        out = []
        for size in range(3, self.k + 1):
            for Z in itertools.combinations(range(self.n), size):
                cols = [[Fraction(1)] + self._rational_points[i] for i in Z]
                rows = [list(r) for r in zip(*cols)]
                basis = exact.nullspace(rows, size)
                if len(basis) != 1 or any(v == 0 for v in basis[0]):
                    continue
                lam = basis[0]
                plus = tuple(v for v, c in zip(Z, lam) if c > 0)
                minus = tuple(v for v, c in zip(Z, lam) if c < 0)
                out.append((plus, minus))
        return out

    @cached_property
    def conflicts(self) -> list[int]:
        """Bitmask per simplex of the simplices it intersects improperly."""
        S = len(self.simplices)
        conf = np.zeros((S, S), dtype=bool)
        inc = self.incidence
        for plus, minus in self.circuits():
            a = np.all(inc[:, list(plus)], axis=1)
            b = np.all(inc[:, list(minus)], axis=1)
            if a.any() and b.any():
                conf |= np.outer(a, b)
                conf |= np.outer(b, a)
        packed = np.packbits(conf, axis=1, bitorder="little")
        return [int.from_bytes(row.tobytes(), "little") for row in packed]

    # enumeration -----------------------------------------------------------

    def triangulations(self, allowed: np.ndarray | None = None, limit: int = ENUMERATION_LIMIT,
                       first_only: bool = False) -> list[tuple[int, ...]]:
        """Every triangulation (spanning or not) built from allowed simplices.

        Depth-first search: one simplex through a generic interior point, then
        repeatedly close the smallest open interior facet with a simplex on
        its other side.  A closed pseudomanifold of properly intersecting
        simplices around an interior point covers the hull, and each
        triangulation is reached along exactly one branch.
        """
        simplex_faces, members, boundary = self.faces
        conf = self.conflicts
        S = len(self.simplices)
        ok = np.ones(S, dtype=bool) if allowed is None else np.asarray(allowed, dtype=bool)
        results: list[tuple[int, ...]] = []

        class _Done(Exception):
            pass

        def place(s, open_faces):
            new_open = dict(open_faces)
            for g, sg in simplex_faces[s]:
                if boundary[g]:
                    continue
                prev = new_open.get(g)
                if prev is None:
                    new_open[g] = sg
                elif prev == sg:
                    return None
                else:
                    del new_open[g]
            return new_open

        def extend(chosen, blocked, open_faces):
            if not open_faces:
                results.append(tuple(sorted(chosen)))
                if first_only:
                    raise _Done
                if len(results) > limit:
                    raise TooLarge(f"more than {limit} triangulations")
                return
            fid = min(open_faces)
            need = -open_faces[fid]
            for s, side in members[fid]:
                if side != need or not ok[s] or (blocked >> s) & 1:
                    continue
                nxt = place(s, open_faces)
                if nxt is not None:
                    chosen.append(s)
                    extend(chosen, blocked | conf[s] | (1 << s), nxt)
                    chosen.pop()

        try:
            for s in self.seed_simplices:
                if ok[s]:
                    extend([int(s)], conf[s] | (1 << int(s)), place(int(s), {}))
        except _Done:
            pass
        results.sort()
        return results

    # regularity ------------------------------------------------------------

    def base_simplex(self, cell: Sequence[int]) -> tuple[int, ...]:
        for sub in itertools.combinations(sorted(cell), self.k):
            if self.subset_sign[self.subset_index[sub]] != 0:
                return sub
        raise InvalidInput(f"cell {[i + 1 for i in cell]} is not full-dimensional")

    def cone_system(self, cells: Sequence[Sequence[int]]):
        """Exact secondary-cone system ``(equalities, inequalities)`` of ``cells``.

        Equalities put the extra points of each cell on the cell's plane; the
        strict inequalities put every point outside a cell strictly below that
        cell's plane.
        """
        eq, ineq = [], []
        for cell in cells:
            base = self.base_simplex(cell)
            members = set(cell)
            for j in sorted(members - set(base)):
                eq.append(self.kernel_row(base, j))
            for j in range(self.n):
                if j not in members:
                    ineq.append(self.kernel_row(base, j))
        return eq, ineq

    def int_row(self, base: tuple[int, ...], j: int) -> tuple[tuple[int, int], ...]:
        """Sparse positive integer multiple of :meth:`kernel_row`."""
        key = (base, j)
        row = self._int_rows.get(key)
        if row is None:
            dense = self.kernel_row(base, j)
            entries = [(i, v) for i, v in enumerate(dense) if v]
            den = math.lcm(*(v.denominator for _, v in entries))
            row = tuple((i, int(v * den)) for i, v in entries)
            self._int_rows[key] = row
        return row

    def regularity(self, cells: Sequence[Sequence[int]]):
        """Exact regularity decision.

        Returns ``(True, heights)`` with exact rational heights that induce
        ``cells``, or ``(False, None)``.
        """
        n = self.n
        eq, ineq_keys = [], []
        for cell in cells:
            base = self.base_simplex(cell)
            members = set(cell)
            for j in sorted(members - set(base)):
                eq.append(self.kernel_row(base, j))
            ineq_keys.extend((base, j) for j in range(n) if j not in members)
        if not ineq_keys:
            return True, [Fraction(0)] * n
        if not eq:
            rows = [self.int_row(*key) for key in ineq_keys]
            M = np.zeros((len(rows), n))
            for r, row in enumerate(rows):
                for i, v in row:
                    M[r, i] = float(v)
            z = _float_interior(M)
            if z is not None:
                zi = _integer_vector(z)
                if all(sum(v * zi[i] for i, v in row) > 0 for row in rows):
                    return True, [Fraction(v) for v in zi]
            if _float_gordan(M, rows, n):
                return False, None
            A = [[Fraction(v) for v in _dense(row, n)] for row in rows]
            feasible, y = exact.strict_feasibility(A, n)
            return (True, y) if feasible else (False, None)
        ineq = [self.kernel_row(*key) for key in ineq_keys]
        basis = exact.nullspace(eq, n)
        A = [[sum((r[i] * b[i] for i in range(n) if r[i]), Fraction(0)) for b in basis] for r in ineq]
        M = np.array([[float(v) for v in row] for row in A])
        z = _float_interior(M)
        if z is not None:
            z = [Fraction(v) for v in z]
            feasible = min(exact.matvec(A, z)) > 0
        else:
            feasible = False
        if not feasible:
            feasible, z = exact.strict_feasibility(A, len(basis))
        if not feasible:
            return False, None
        y = [sum((zi * b[i] for zi, b in zip(z, basis)), Fraction(0)) for i in range(n)]
        return True, y

    # lifting -----------------------------------------------------------------

    def interpolants(self, y: np.ndarray) -> np.ndarray:
        """``L[s, j]``: value at ``x_j`` of the affine interpolant of ``y`` on simplex ``s``."""
        return np.einsum("sji,si->sj", self.bary, y[self.simplices])


def _permutation_parity(order: Sequence[int]) -> int:
    seen = [False] * len(order)
    parity = 0
    for i in range(len(order)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = order[j]
            length += 1
        parity ^= (length - 1) & 1
    return parity


def _float_interior(M: np.ndarray):
    """Float candidate ``z`` with ``M z > 0`` from a max-slack LP, or ``None``."""
    if M.size == 0:
        return None
    m, k = M.shape
    norms = np.linalg.norm(M, axis=1)
    norms[norms == 0] = 1.0
    M = M / norms[:, None]
    c = np.zeros(k + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-M, np.ones((m, 1))])
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(m), bounds=[(-1, 1)] * k + [(0, 1)], method="highs")
    if res.status != 0 or res.x[-1] <= 1e-9:
        return None
    return [float(v) for v in res.x[:k]]


def _float_gordan(M: np.ndarray, rows, n: int) -> bool:
    """Try to certify ``M z > 0`` infeasible from a float multiplier's support.

    A basic solution of ``M^T lam = 0, sum lam = 1, lam >= 0`` names a small
    support; the multiplier is then recomputed exactly on that support and
    accepted only if it is a genuine nonnegative dependency.
    """
    m = M.shape[0]
    norms = np.linalg.norm(M, axis=1)
    norms[norms == 0] = 1.0
    A_eq = np.vstack([(M / norms[:, None]).T, np.ones((1, m))])
    b_eq = np.zeros(n + 1)
    b_eq[-1] = 1.0
    res = linprog(np.zeros(m), A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)] * m, method="highs-ds")
    if res.status != 0:
        return False
    support = [r for r in np.flatnonzero(res.x > 1e-12)]
    cols = [[Fraction(v) for v in _dense(rows[r], n)] for r in support]
    basis = exact.nullspace([list(c) for c in zip(*cols)], len(support))
    if len(basis) != 1:
        return False
    lam = basis[0]
    if all(v >= 0 for v in lam) or all(v <= 0 for v in lam):
        return any(lam)
    return False


def _integer_vector(z: Sequence[float]) -> list[int]:
    """Exact positive integer multiple of a float vector."""
    fr = [Fraction(v) for v in z]
    den = math.lcm(*(f.denominator for f in fr))
    return [int(f * den) for f in fr]


def _dense(row, n):
    out = [0] * n
    for i, v in row:
        out[i] = v
    return out


# ---------------------------------------------------------------------------
# public operations


def _as_heights(config: PointConfiguration, heights) -> np.ndarray:
    y = np.asarray(heights, dtype=float).reshape(-1)
    if y.shape[0] != config.n:
        raise InvalidInput(f"expected {config.n} heights, got {y.shape[0]}")
    if not np.all(np.isfinite(y)):
        raise InvalidInput("heights must be finite")
    return y


def _zero_based_simplex(config: PointConfiguration, simplex: Iterable[int]) -> tuple[int, ...]:
    idx = tuple(sorted(int(i) - 1 for i in simplex))
    if len(idx) != config.d + 1 or len(set(idx)) != len(idx) or idx[0] < 0 or idx[-1] >= config.n:
        raise InvalidInput(f"invalid simplex {list(simplex)} for n={config.n}, d={config.d}")
    return idx


def flat_tolerance(y: np.ndarray) -> float:
    return EPS_FLAT * max(1.0, float(np.ptp(y)) if y.size else 1.0)


def normalized_volume(config: PointConfiguration, simplex: Iterable[int]) -> float:
    """Normalized volume ``|det|`` of a simplex given by 1-based indices (0 if degenerate)."""
    idx = _zero_based_simplex(config, simplex)
    mat = np.concatenate([np.ones((config.d + 1, 1)), config.points[list(idx)]], axis=1)
    value = abs(float(np.linalg.det(mat)))
    scale = float(np.prod(np.linalg.norm(mat, axis=1)))
    if value <= 1e-10 * scale:
        rows = [[Fraction(1)] + exact.rationalize(config.points[i]) for i in idx]
        value = abs(float(exact.det(rows)))
    return value


def supporting_simplices(config: PointConfiguration, heights, tol: float | None = None):
    """Simplices whose lifted plane lies weakly above every lifted point.

    Returns ``(mask, L)`` with ``L`` the interpolant table of
    :meth:`_Combinatorics.interpolants`.
    """
    y = _as_heights(config, heights)
    tab = config.tables
    L = tab.interpolants(y)
    if tol is None:
        tol = flat_tolerance(y)
    gap = np.max(y[None, :] - L, axis=1)
    return gap <= tol, L


def _cells_from_support(y, mask, L, tol) -> list[tuple[int, ...]]:
    cells = set()
    for s in np.flatnonzero(mask):
        cells.add(tuple(np.flatnonzero(y >= L[s] - tol).tolist()))
    return _maximal(cells)


def _maximal(cells) -> list[tuple[int, ...]]:
    """Drop cells contained in other cells (tolerance artefacts near a fold)."""
    sets = [set(c) for c in cells]
    return sorted(c for c, s in zip(cells, sets) if not any(s < t for t in sets))


def _cells_qhull(config: PointConfiguration, y: np.ndarray, tol: float) -> list[tuple[int, ...]]:
    pts = config.points
    sentinel = np.concatenate([pts.mean(axis=0), [y.min() - 10.0 * (np.ptp(y) + 1.0)]])
    lifted = np.vstack([np.column_stack([pts, y]), sentinel])
    try:
        hull = ConvexHull(lifted)
    except QhullError as err:
        raise HullDegenerate(str(err)) from err
    cells = set()
    sentinel_index = config.n
    for simplex, eqn in zip(hull.simplices, hull.equations):
        if sentinel_index in simplex or eqn[-2] <= 0:
            continue
        normal, offset = eqn[:-1], eqn[-1]
        # plane: normal . (x, y) + offset = 0 with normal[-1] > 0
        plane = -(pts @ normal[:-1] + offset) / normal[-1]
        cells.add(tuple(np.flatnonzero(y >= plane - tol).tolist()))
    return _maximal(cells)


def cell_volume(config: PointConfiguration, cell: Sequence[int]) -> float:
    """Normalized volume of ``conv`` of a 0-based cell."""
    return _hull_volume(config.points[list(cell)])


def tiles_hull(config: PointConfiguration, cells) -> bool:
    """True when the cell volumes add up to the hull volume (relative 1e-9)."""
    try:
        total = sum(cell_volume(config, c) for c in cells)
    except HullDegenerate:
        return False
    return abs(total - config.volume) <= 1e-9 * config.volume


def _validated(config: PointConfiguration, cells: list[tuple[int, ...]]) -> list[tuple[int, ...]]:
    if not tiles_hull(config, cells):
        total = sum(cell_volume(config, c) for c in cells)
        raise HullDegenerate(f"cell volumes sum to {total!r}, hull volume is {config.volume!r}")
    return cells


def induced_cells(config: PointConfiguration, heights, tol: float | None = None, check: bool = True) -> list[tuple[int, ...]]:
    """0-based cells of the regular subdivision induced by ``heights``."""
    y = _as_heights(config, heights)
    if tol is None:
        tol = flat_tolerance(y)
    if math.comb(config.n, config.d + 1) > COMBINATORICS_LIMIT:
        cells = _cells_qhull(config, y, tol)
    else:
        mask, L = supporting_simplices(config, y, tol)
        cells = _cells_from_support(y, mask, L, tol)
    return _validated(config, cells) if check else cells


def induced_subdivision(config: PointConfiguration, heights, tol: float | None = None) -> Subdivision:
    """Regular subdivision induced by lifting ``x_i`` to height ``y_i``.

    The cells are the projections of the upper facets of the lifted hull;
    coplanar facets are merged, so a cell lists every point whose lift lies on
    its facet.  Points strictly below the tent appear in no cell.

    Raises
    ------
    HullDegenerate
        If the cells found do not tile the hull within tolerance.
    """
    return Subdivision.from_zero_based(induced_cells(config, heights, tol))


def tent_values_at_points(config: PointConfiguration, heights) -> np.ndarray:
    """``h_{X,y}(x_i)`` for every ``i``."""
    y = _as_heights(config, heights)
    mask, L = supporting_simplices(config, y)
    return np.min(L[mask], axis=0)


def tent_value(config: PointConfiguration, heights, t) -> float:
    """Value of the tent function at ``t`` (``-inf`` outside the hull).

    Computed as ``max { sum lam_i y_i : sum lam_i x_i = t, lam >= 0, sum lam_i = 1 }``.
    """
    y = _as_heights(config, heights)
    t = np.asarray(t, dtype=float).reshape(-1)
    if t.shape[0] != config.d:
        raise InvalidInput(f"point must have {config.d} coordinates")
    A_eq = np.vstack([config.points.T, np.ones(config.n)])
    b_eq = np.concatenate([t, [1.0]])
    res = linprog(-y, A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)] * config.n, method="highs")
    if res.status == 2:
        return -math.inf
    if res.status != 0:
        raise HullDegenerate(res.message)
    return float(-res.fun)


def relevance_tolerance(y: np.ndarray) -> float:
    return EPS_REL * max(1.0, float(np.max(np.abs(y))))


def is_relevant(config: PointConfiguration, heights) -> bool:
    """True when every lifted point lies on the tent (within ``EPS_REL``)."""
    y = _as_heights(config, heights)
    return bool(np.all(tent_values_at_points(config, y) - y <= relevance_tolerance(y)))


def make_relevant(config: PointConfiguration, heights) -> np.ndarray:
    """Raise every tent pole to the tent: ``y'_i = h_{X,y}(x_i)``."""
    y = _as_heights(config, heights)
    return np.maximum(y, tent_values_at_points(config, y))


def _check_enumerable(config: PointConfiguration, n_max: int):
    if config.n > n_max:
        raise TooLarge(f"n = {config.n} exceeds the enumeration limit {n_max}")


def is_regular(config: PointConfiguration, subdivision: Subdivision) -> bool:
    """Exact regularity test of a subdivision."""
    _check_cells(config, subdivision)
    return config.tables.regularity(subdivision.zero_based())[0]


def regular_heights(config: PointConfiguration, subdivision: Subdivision) -> np.ndarray:
    """Heights inducing ``subdivision`` (exactly verified); raises NotRegular."""
    _check_cells(config, subdivision)
    ok, y = config.tables.regularity(subdivision.zero_based())
    if not ok:
        raise NotRegular(f"subdivision {subdivision.key()} is not regular")
    return np.array([float(v) for v in y])


def _check_cells(config: PointConfiguration, subdivision: Subdivision):
    for cell in subdivision.cells:
        if cell[-1] > config.n:
            raise InvalidInput(f"cell {list(cell)} references a point beyond n={config.n}")
        if len(cell) < config.d + 1:
            raise InvalidInput(f"cell {list(cell)} is not full-dimensional")


def _triangulation_from_indices(config: PointConfiguration, simplex_ids) -> Triangulation:
    simp = config.tables.simplices
    return Triangulation(tuple(tuple(int(v) + 1 for v in simp[s]) for s in simplex_ids))


def all_triangulations(config: PointConfiguration, n_max: int = N_MAX) -> list[Triangulation]:
    """Every triangulation, regular or not, including those omitting points."""
    _check_enumerable(config, n_max)
    tri = [_triangulation_from_indices(config, t) for t in config.tables.triangulations()]
    return sorted(tri, key=lambda t: t.cells)


def enumerate_regular_triangulations(config: PointConfiguration, n_max: int = N_MAX) -> list[Triangulation]:
    """All regular triangulations in canonical order, each certified exactly.

    Raises
    ------
    TooLarge
        If ``n > n_max``.
    """
    tab = config.tables
    out = [t for t in all_triangulations(config, n_max) if tab.regularity(t.zero_based())[0]]
    return out


def allowed_in_cells(config: PointConfiguration, cells: Sequence[Sequence[int]]) -> np.ndarray:
    """Mask of simplices whose vertices all lie in one of the (0-based) cells."""
    inc = config.tables.incidence
    allowed = np.zeros(inc.shape[0], dtype=bool)
    for cell in cells:
        outside = np.ones(config.n, dtype=bool)
        outside[list(cell)] = False
        allowed |= ~np.any(inc[:, outside], axis=1)
    return allowed


def refining_triangulations(config: PointConfiguration, subdivision: Subdivision, n_max: int = N_MAX,
                            regular_only: bool = True) -> list[Triangulation]:
    """Regular triangulations each of whose simplices lies inside one cell of ``subdivision``."""
    _check_enumerable(config, n_max)
    _check_cells(config, subdivision)
    tab = config.tables
    cells = subdivision.zero_based()
    ids = tab.triangulations(allowed_in_cells(config, cells))
    out = []
    for t in ids:
        tri = _triangulation_from_indices(config, t)
        if not regular_only or tab.regularity(tri.zero_based())[0]:
            out.append(tri)
    return sorted(out, key=lambda t: t.cells)


def refining_simplices(config: PointConfiguration, cells: Sequence[Sequence[int]]) -> np.ndarray:
    """Simplex ids (into ``config.tables.simplices``) of one triangulation refining 0-based ``cells``."""
    tab = config.tables
    found = tab.triangulations(allowed_in_cells(config, cells), first_only=True)
    if not found:
        raise HullDegenerate("no triangulation refines the given cells")
    return np.array(found[0], dtype=np.intp)


def gkz_vector(config: PointConfiguration, triangulation: Subdivision) -> np.ndarray:
    """GKZ vector: entry ``k`` is the total normalized volume of simplices containing ``x_k``."""
    z = np.zeros(config.n)
    for cell in triangulation.cells:
        vol = normalized_volume(config, cell)
        for i in cell:
            z[i - 1] += vol
    return z


def secondary_cone_contains(config: PointConfiguration, triangulation: Subdivision, heights) -> bool:
    """True iff the tent of ``heights`` is affine on every simplex of ``triangulation``."""
    y = _as_heights(config, heights)
    tab = config.tables
    mask, _ = supporting_simplices(config, y)
    for cell in triangulation.zero_based():
        s = tab.simplex_index.get(cell)
        if s is None:
            raise InvalidInput(f"cell {[i + 1 for i in cell]} is not a simplex of the configuration")
        if not mask[s]:
            return False
    return True
