"""Maximum-likelihood heights for weighted log-concave density estimation.

The problem is to maximize ``phi(y) = w . y - F(y)`` with
``F(y) = integral of exp(h_{X,y})``.  For any triangulation ``T`` (regular
or not, using all points or not) let ``F_T(y)`` integrate the exponential of
the piecewise-affine interpolant of ``y`` on ``T``.  Each ``F_T`` is smooth
and convex, never exceeds ``F``, and equals it whenever ``T`` refines the
subdivision induced by ``y``.  Hence

    phi(y) = min_T (w . y - F_T(y)),

a finite minimax of smooth concave pieces.  It is solved by sequential
quadratic programming on the pieces with Armijo steps on ``phi`` itself.
At the end the induced subdivision is identified, the heights are polished
by Newton's method on that subdivision's linearity space, and optimality is
certified by the minimum-norm element of the convex hull of the piece
gradients ``w - grad F_T`` over the triangulations that refine it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import quadprog
from scipy.linalg import null_space

from . import kernels
from .errors import ConeViolation, InvalidInput, InvalidWeights, NotConverged, TooLarge
from .geometry import (
    PointConfiguration,
    Subdivision,
    _as_heights,
    _zero_based_simplex,
    allowed_in_cells,
    flat_tolerance,
    induced_cells,
    make_relevant,
    secondary_cone_contains,
    tiles_hull,
)
from .hfunc import h_eval
from .quadrature import total_mass, uniform_height

FAMILY_CAP = 3000
"""Largest number of triangulations used as the global piece family."""

LOCAL_CAP = 256
"""Most pieces kept in the bundle used when the global family is too large."""


# ---------------------------------------------------------------------------
# value types


@dataclass(frozen=True, eq=False)
class WeightVector:
    """Positive weights summing to one.

    Parameters
    ----------
    weights : array_like
        Strictly positive entries.
    normalize : bool, default False
        Divide by the sum instead of requiring it to be 1 within ``1e-12``.
    """

    weights: np.ndarray
    normalize: bool = False

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).reshape(-1)
        if w.size == 0 or not np.all(np.isfinite(w)):
            raise InvalidWeights("weights must be a nonempty finite vector")
        if np.any(w <= 0):
            raise InvalidWeights("weights must be strictly positive")
        total = float(w.sum())
        if self.normalize:
            w = w / total
        elif abs(total - 1.0) > 1e-12:
            raise InvalidWeights(f"weights sum to {total!r}, not 1 (pass normalize=True to rescale)")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "normalize", False)

    @classmethod
    def uniform(cls, n: int) -> "WeightVector":
        return cls(np.full(n, 1.0 / n), normalize=True)

    def __len__(self):
        return self.weights.size

    def __array__(self, dtype=None, copy=None):
        return self.weights if dtype is None else self.weights.astype(dtype)


@dataclass(frozen=True)
class SolverOptions:
    """Solver settings.

    Attributes
    ----------
    grad_tol : float
        Bound on the sup norm of the optimality certificate.
    max_iters : int
        Iteration cap for the outer quadratic-programming loop.
    start : array_like, optional
        Initial heights; default is the uniform density's constant height.
    seed : int
        Seed for perturbed starts and restarts.
    perturbation : float
        Standard deviation of a seeded Gaussian perturbation of the start.
    restarts : int
        Additional perturbed attempts made when the certificate fails.
    family_cap : int
        Largest global triangulation family; beyond it per-cell families are used.
    """

    grad_tol: float = 1e-8
    max_iters: int = 10000
    start: tuple | None = None
    seed: int = 0
    perturbation: float = 0.0
    restarts: int = 2
    family_cap: int = FAMILY_CAP

    def __post_init__(self):
        if not self.grad_tol > 0:
            raise InvalidInput("grad_tol must be positive")
        if self.max_iters < 1:
            raise InvalidInput("max_iters must be at least 1")
        if self.start is not None:
            object.__setattr__(self, "start", tuple(float(v) for v in np.ravel(self.start)))


@dataclass
class MleResult:
    """Optimal heights and diagnostics.

    ``grad_norm`` is the sup norm of the minimum-norm element of the convex
    hull of ``w - grad F_T`` over the triangulations ``T`` refining the final
    subdivision; ``certificate`` is ``"full"`` when every such triangulation
    was included and ``"partial"`` otherwise.
    """

    heights: np.ndarray
    subdivision: Subdivision
    log_likelihood: float
    mass: float
    iterations: int
    converged: bool
    grad_norm: float
    certificate: str = "full"
    history: list = field(default_factory=list)
    message: str = ""

    def to_json(self) -> dict:
        return {
            "heights": [float(v) for v in self.heights],
            "subdivision": self.subdivision.to_json()["cells"],
            "log_likelihood": float(self.log_likelihood),
            "mass": float(self.mass),
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "grad_norm": float(self.grad_norm),
            "certificate": self.certificate,
            "message": self.message,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "MleResult":
        return cls(
            heights=np.asarray(obj["heights"], dtype=float),
            subdivision=Subdivision.from_json(obj["subdivision"]),
            log_likelihood=float(obj["log_likelihood"]),
            mass=float(obj["mass"]),
            iterations=int(obj["iterations"]),
            converged=bool(obj["converged"]),
            grad_norm=float(obj["grad_norm"]),
            certificate=obj.get("certificate", "full"),
            message=obj.get("message", ""),
        )


# ---------------------------------------------------------------------------
# piece families


class PieceFamily:
    """A list of triangulations evaluated together.

    ``M[t, s]`` is 1 when triangulation ``t`` uses simplex ``s`` (columns
    indexed over the simplices used by the family), so that the piece
    integrals are ``M @ E`` with ``E`` the per-simplex integrals.
    """

    def __init__(self, config: PointConfiguration, triangulations: list[tuple[int, ...]]):
        tab = config.tables
        used = sorted({s for t in triangulations for s in t})
        col = {s: i for i, s in enumerate(used)}
        self.n = config.n
        self.ids = np.array(used, dtype=np.intp)
        self.simp = tab.simplices[self.ids]
        self.vol = tab.volumes[self.ids]
        self.M = np.zeros((len(triangulations), len(used)))
        for r, t in enumerate(triangulations):
            self.M[r, [col[s] for s in t]] = 1.0
        k = self.simp.shape[1]
        self._grad_index = self.simp
        pair = self.simp[:, :, None] * self.n + self.simp[:, None, :]
        self._pair_index = pair.reshape(-1)
        self.k = k

    def __len__(self):
        return self.M.shape[0]

    def values(self, y: np.ndarray) -> np.ndarray:
        return self.M @ (self.vol * kernels.simplex_values(y[self.simp]))

    def derivatives(self, y: np.ndarray, hessian: bool = True):
        """Piece values, piece gradients ``(T, n)`` and per-simplex Hessians."""
        val, grad, hess = kernels.simplex_derivatives(y[self.simp], hessian)
        S = self.simp.shape[0]
        Gs = np.zeros((S, self.n))
        np.put_along_axis(Gs, self.simp, self.vol[:, None] * grad, axis=1)
        FT = self.M @ (self.vol * val)
        GT = self.M @ Gs
        Hs = None if hess is None else self.vol[:, None, None] * hess
        return FT, GT, Hs

    def hessian(self, mu: np.ndarray, Hs: np.ndarray) -> np.ndarray:
        """``sum_s mu_s * Hess(simplex s)`` assembled into an ``n x n`` matrix."""
        weights = (mu[:, None, None] * Hs).reshape(-1)
        B = np.bincount(self._pair_index, weights=weights, minlength=self.n * self.n)
        return B.reshape(self.n, self.n)

    def refining_rows(self, config: PointConfiguration, cells) -> np.ndarray:
        """Rows whose triangulation refines the 0-based ``cells``."""
        allowed = allowed_in_cells(config, cells)[self.ids]
        bad = self.M[:, ~allowed].sum(axis=1) > 0
        return np.flatnonzero(~bad)


def _global_family(config: PointConfiguration, cap: int) -> PieceFamily | None:
    tab = config.tables
    cache = tab.__dict__.setdefault("_families", {})
    if cap in cache:
        return cache[cap]
    try:
        tri = tab.triangulations(limit=cap)
        family = PieceFamily(config, tri)
    except TooLarge:
        family = None
    cache[cap] = family
    return family


def _active_triangulations(config: PointConfiguration, y: np.ndarray, cap: int) -> list[tuple[int, ...]]:
    """Triangulations refining the subdivision induced by ``y`` (at most ``cap``, else one)."""
    tab = config.tables
    L = tab.interpolants(y)
    flat = np.max(y[None, :] - L, axis=1) <= flat_tolerance(y)
    try:
        found = tab.triangulations(flat, limit=cap)
    except TooLarge:
        found = []
    if not found:
        found = tab.triangulations(allowed_in_cells(config, induced_cells(config, y, check=False)),
                                   first_only=True)
    return found


class _Bundle:
    """Pieces met so far along the iterates and line-search trials (large problems)."""

    def __init__(self, config: PointConfiguration, cap: int):
        self.config = config
        self.cap = cap
        self.age: dict[tuple[int, ...], int] = {}
        self.clock = 0
        self._family = None

    def add(self, y: np.ndarray) -> None:
        self.clock += 1
        for t in _active_triangulations(self.config, y, self.cap):
            if t not in self.age:
                self._family = None
            self.age[t] = self.clock

    def family(self) -> PieceFamily:
        if self._family is None:
            keys = sorted(self.age, key=self.age.get, reverse=True)[: self.cap]
            self.age = {k: self.age[k] for k in keys}
            self._family = PieceFamily(self.config, sorted(keys))
        return self._family


def _cell_pieces(config: PointConfiguration, cell: tuple[int, ...], cap: int):
    """Triangulations of one cell as tuples of simplex ids, and whether the list is complete."""
    tab = config.tables
    cache = tab.__dict__.setdefault("_cell_pieces", {})
    key = (cell, cap)
    if key not in cache:
        if len(cell) == config.d + 1:
            cache[key] = ([(tab.simplex_index[cell],)], True)
        else:
            sub = PointConfiguration(config.points[list(cell)]).tables
            try:
                local, complete = sub.triangulations(limit=cap), True
            except TooLarge:
                local, complete = sub.triangulations(first_only=True), False
            out = []
            for t in local:
                out.append(tuple(sorted(tab.simplex_index[tuple(cell[i] for i in sub.simplices[s])] for s in t)))
            cache[key] = (out, complete)
    return cache[key]


class _CellModel:
    """Per-cell piece families of a subdivision.

    Triangulations refining a subdivision are (for generic faces) the
    products of triangulations of its cells, so their gradients form a
    Minkowski sum of per-cell hulls.  Keeping the cells apart avoids the
    product blow-up.
    """

    def __init__(self, config: PointConfiguration, cells, cap: int):
        self.families = []
        self.complete = True
        for cell in cells:
            tri, complete = _cell_pieces(config, tuple(cell), cap)
            self.complete &= complete
            self.families.append(PieceFamily(config, tri))

    def derivatives(self, y: np.ndarray, hessian: bool = True):
        return [fam.derivatives(y, hessian) for fam in self.families]


def min_norm_minkowski(w: np.ndarray, blocks: list[np.ndarray]):
    """Minimum-norm point of ``w - sum_c conv(rows of blocks[c])``.

    Solves the dual ``max_p w . p - sum_c max_rows(G_c p) - |p|^2/2`` in
    epigraph form; the per-block multipliers, renormalized, are convex
    weights and give a point of the set.
    """
    n = w.size
    C = len(blocks)
    scale = max(float(np.max(np.abs(w))), max(float(np.max(np.abs(b))) for b in blocks), 1e-300)
    G = np.eye(n + C)
    G[n:, n:] *= 2e-3
    a = np.concatenate([w / scale, -np.ones(C)])
    cols = []
    for c, blk in enumerate(blocks):
        col = np.zeros((n + C, blk.shape[0]))
        col[:n] = -blk.T / scale
        col[n + c] = 1.0
        cols.append(col)
    _, _, _, _, lagr, _ = quadprog.solve_qp(G, a, np.hstack(cols), np.zeros(sum(b.shape[0] for b in blocks)), 0)
    point = w.copy()
    start = 0
    for blk in blocks:
        mu = np.maximum(lagr[start : start + blk.shape[0]], 0.0)
        start += blk.shape[0]
        mu = mu / mu.sum() if mu.sum() > 0 else np.full(blk.shape[0], 1.0 / blk.shape[0])
        point -= mu @ blk
    return point


# ---------------------------------------------------------------------------
# quadratic programs


def _qp_step(B: np.ndarray, g: np.ndarray, offsets: np.ndarray, radius: float):
    """Step of the model ``max_d min_T (offsets_T + g_T . d) - d'Bd/2`` with ``|d_i| <= radius``.

    Solved in the epigraph form ``max t - eps t^2 - d'Bd/2`` subject to
    ``t <= offsets_T + g_T . d``.  The small ``eps`` keeps the quadratic
    program strictly convex; it only rescales the multipliers by
    ``1 - 2 eps t``, which vanishes as the predicted increase ``t`` does.
    Returns ``(d, predicted_increase, lam)`` with the increase recomputed
    from the pieces.
    """
    m, n = g.shape
    mu = 1e-8 * max(float(np.trace(B)) / n, 1e-12)
    G = np.zeros((n + 1, n + 1))
    G[:n, :n] = B + mu * np.eye(n)
    G[n, n] = 2e-3
    a = np.zeros(n + 1)
    a[n] = 1.0
    C = np.zeros((n + 1, m + 2 * n))
    C[:n, :m] = g.T
    C[n, :m] = -1.0
    C[:n, m : m + n] = np.eye(n)
    C[:n, m + n :] = -np.eye(n)
    b = np.concatenate([-offsets, np.full(2 * n, -radius)])
    x, _, _, _, lagr, _ = quadprog.solve_qp(G, a, C, b, 0)
    d = x[:n]
    t = float(np.min(offsets + g @ d))
    return d, t, lagr[:m]


def _qp_step_cells(B, w, g, offsets, cell_g, cell_off, radius):
    """Like :func:`_qp_step`, with extra per-cell pieces.

    The cell part models ``w . d - sum_c max_T (G_cT . d - off_cT)``; the
    rows of ``g`` with ``offsets`` are whole-triangulation pieces.
    """
    m, n = g.shape
    C = len(cell_g)
    mu = 1e-8 * max(float(np.trace(B)) / n, 1e-12)
    N = n + 1 + C
    G = np.eye(N) * 2e-3
    G[:n, :n] = B + mu * np.eye(n)
    a = np.zeros(N)
    a[n] = 1.0
    cols, rhs = [], []
    blk = np.zeros((N, m))
    blk[:n] = g.T
    blk[n] = -1.0
    cols.append(blk)
    rhs.append(-offsets)
    link = np.zeros((N, 1))
    link[:n, 0] = w
    link[n, 0] = -1.0
    link[n + 1 :, 0] = -1.0
    cols.append(link)
    rhs.append(np.zeros(1))
    for c, (gc, oc) in enumerate(zip(cell_g, cell_off)):
        blk = np.zeros((N, gc.shape[0]))
        blk[:n] = -gc.T
        blk[n + 1 + c] = 1.0
        cols.append(blk)
        rhs.append(-oc)
    box = np.zeros((N, 2 * n))
    box[:n, :n] = np.eye(n)
    box[:n, n:] = -np.eye(n)
    cols.append(box)
    rhs.append(np.full(2 * n, -radius))
    x = quadprog.solve_qp(G, a, np.hstack(cols), np.concatenate(rhs), 0)[0]
    d = x[:n]
    t = float(w @ d) - sum(float(np.max(gc @ d - oc)) for gc, oc in zip(cell_g, cell_off))
    if m:
        t = min(t, float(np.min(offsets + g @ d)))
    return d, t


def min_norm_point(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Minimum-norm point of the convex hull of the rows of ``g``.

    Solves ``max t - eps t^2 - |p|^2/2`` subject to ``t <= g_i . p``.  The
    multipliers renormalized to sum one give the exact minimum-norm point:
    at the solution ``g_i . p`` equals ``|p|^2`` on their support and is at
    least that elsewhere.

    Returns
    -------
    point : ndarray
    lam : ndarray
        Convex weights with ``point = lam @ g``.
    """
    g = np.atleast_2d(np.asarray(g, dtype=float))
    m, n = g.shape
    if m == 1:
        return g[0].copy(), np.ones(1)
    scale = max(float(np.max(np.abs(g))), 1e-300)
    gs = g / scale
    G = np.eye(n + 1)
    G[n, n] = 2e-3
    a = np.zeros(n + 1)
    a[n] = 1.0
    C = np.vstack([gs.T, -np.ones((1, m))])
    x, _, _, _, lagr, _ = quadprog.solve_qp(G, a, C, np.zeros(m), 0)
    lam = np.maximum(lagr, 0.0)
    total = lam.sum()
    if total <= 0:
        # the origin is inside the hull
        return np.zeros(n), np.full(m, 1.0 / m)
    lam = lam / total
    return lam @ g, lam


def _weights(config: PointConfiguration, weights) -> np.ndarray:
    w = weights.weights if isinstance(weights, WeightVector) else WeightVector(weights).weights
    if w.size != config.n:
        raise InvalidWeights(f"expected {config.n} weights, got {w.size}")
    return np.asarray(w, dtype=float)


def objective(config: PointConfiguration, weights, heights) -> float:
    """``w . y - integral of exp(h_{X,y})`` (concave in ``y``)."""
    w = _weights(config, weights)
    y = _as_heights(config, heights)
    return float(w @ y - total_mass(config, y).total_mass)


def gradient(config: PointConfiguration, weights, heights, triangulation: Subdivision) -> np.ndarray:
    """Supergradient ``w_k - sum_{sigma ∋ k} vol(sigma) e^{y_k} H(y_i - y_k : i in sigma \\ k)``.

    Raises
    ------
    ConeViolation
        If ``triangulation`` does not refine the subdivision induced by ``heights``.
    """
    w = _weights(config, weights)
    y = _as_heights(config, heights)
    if not secondary_cone_contains(config, triangulation, y):
        raise ConeViolation("triangulation does not refine the induced subdivision")
    return w - piece_gradient(config, triangulation, y)


def piece_gradient(config: PointConfiguration, triangulation: Subdivision, heights) -> np.ndarray:
    """Gradient of ``F_T`` for the triangulation ``T`` (no cone check)."""
    y = _as_heights(config, heights)
    tab = config.tables
    out = np.zeros(config.n)
    for cell in triangulation.cells:
        idx = _zero_based_simplex(config, cell)
        vol = tab.volumes[tab.simplex_index[idx]]
        for k in idx:
            u = [y[i] - y[k] for i in idx if i != k]
            out[k] += vol * math.exp(y[k]) * h_eval(u)
    return out


def samworth_membership(config: PointConfiguration, heights) -> bool:
    """True iff ``integral of exp(h_{X,y}) <= 1``."""
    return total_mass(config, heights).total_mass <= 1.0 + 1e-12


def _sqp(config, w, y, family, options, history):
    """Outer loop; returns ``(y, iterations)``."""
    lam = None
    it = 0
    radius = 2.0
    for it in range(1, options.max_iters + 1):
        FT, GT, Hs = family.derivatives(y)
        F = float(FT.max())
        phi = float(w @ y) - F
        if not history:
            history.append(phi)
        offsets = F - FT
        g = w[None, :] - GT
        if lam is None or lam.size != len(family):
            active = offsets <= 1e-9 * max(1.0, F)
            lam = active / active.sum()
        near = offsets <= max(1e-6 * max(1.0, abs(phi)), 0.0)
        safe = family.hessian(family.M.T @ near.astype(float), Hs)
        accepted = False
        for B in (family.hessian(family.M.T @ lam, Hs), safe):
            d, t, lam_new = _qp_step(B, g, offsets, radius)
            if t <= 1e-15 * max(1.0, abs(phi)) or np.max(np.abs(d)) <= 1e-13 * max(1.0, float(np.ptp(y))):
                break
            alpha = 1.0
            for _ in range(40):
                trial = y + alpha * d
                F_trial = float(family.values(trial).max())
                phi_trial = float(w @ trial) - F_trial
                if phi_trial >= phi + 1e-4 * alpha * t:
                    accepted = True
                    break
                alpha *= 0.5
            if accepted:
                break
        if not accepted:
            break
        y = trial
        history.append(phi_trial)
        total = lam_new.sum()
        lam = lam_new / total if total > 0 else None
    return y, it


def _model_cells(config, y):
    """Coarsest of a few tolerances at which the induced cells tile the hull."""
    scale = max(1.0, float(np.ptp(y)))
    for tol in (1e-4, 1e-6):
        cells = induced_cells(config, y, tol=tol * scale, check=False)
        if tiles_hull(config, cells):
            return cells
    return induced_cells(config, y, check=False)


def _sqp_local(config, w, y, options, history):
    """Outer loop for large configurations: cell pieces plus a bundle of met triangulations."""
    cap = min(options.family_cap, LOCAL_CAP)
    bundle = _Bundle(config, cap)
    radius = 2.0
    it = 0
    phi = float(w @ y) - total_mass(config, y).total_mass
    history.append(phi)
    for it in range(1, options.max_iters + 1):
        model = _CellModel(config, _model_cells(config, y), cap)
        parts = model.derivatives(y)
        B = np.zeros((config.n, config.n))
        cell_g, cell_off = [], []
        for fam, (FT, GT, Hs) in zip(model.families, parts):
            off = float(FT.max()) - FT
            near = (off <= 1e-6 * max(1.0, abs(phi))).astype(float)
            B += fam.hessian(fam.M.T @ (near / near.sum()), Hs)
            cell_g.append(GT)
            cell_off.append(off)
        if bundle.age:
            fam = bundle.family()
            FT, GT, _ = fam.derivatives(y, hessian=False)
            F = float(w @ y) - phi
            g, offsets = w[None, :] - GT, F - FT
        else:
            g, offsets = np.zeros((0, config.n)), np.zeros(0)
        d, t = _qp_step_cells(B, w, g, offsets, cell_g, cell_off, radius)
        if t <= 1e-15 * max(1.0, abs(phi)) or np.max(np.abs(d)) <= 1e-13 * max(1.0, float(np.ptp(y))):
            break
        alpha = 1.0
        accepted = False
        for _ in range(40):
            trial = y + alpha * d
            phi_trial = float(w @ trial) - total_mass(config, trial).total_mass
            if phi_trial >= phi + 1e-4 * alpha * t:
                accepted = True
                break
            bundle.add(trial)
            alpha *= 0.5
        if not accepted:
            break
        y, phi = trial, phi_trial
        history.append(phi)
    return y, it


def _flat_space(config: PointConfiguration, cells):
    """Rows ``R`` with ``R y = 0`` iff every cell is flat, and an orthonormal null-space basis."""
    tab = config.tables
    rows = []
    for cell in cells:
        base = tab.base_simplex(cell)
        for j in sorted(set(cell) - set(base)):
            rows.append([float(v) for v in tab.kernel_row(base, j)])
    if not rows:
        return np.zeros((0, config.n)), np.eye(config.n)
    R = np.array(rows)
    return R, null_space(R)


def _polish(config, w, y, cells, family_piece: PieceFamily):
    """Newton's method for ``w . y - F_T(y)`` over the flat space of ``cells``.

    The start is first projected onto the flat space.
    """
    R, N = _flat_space(config, cells)
    y = y.copy()
    if R.shape[0]:
        y = y - np.linalg.lstsq(R, R @ y, rcond=None)[0]
    for _ in range(50):
        FT, GT, Hs = family_piece.derivatives(y)
        g = N.T @ (w - GT[0])
        if np.max(np.abs(g)) <= 1e-15:
            break
        B = N.T @ family_piece.hessian(family_piece.M[0], Hs) @ N
        try:
            step = np.linalg.solve(B, g)
        except np.linalg.LinAlgError:
            return None
        phi = float(w @ y - FT[0])
        alpha = 1.0
        while alpha > 1e-10:
            trial = y + alpha * (N @ step)
            if float(w @ trial - family_piece.values(trial)[0]) >= phi - 1e-15 * max(1.0, abs(phi)):
                break
            alpha *= 0.5
        else:
            return None
        y = trial
        if np.max(np.abs(alpha * step)) <= 1e-14 * max(1.0, float(np.max(np.abs(y)))):
            break
    return y


def _certify(config, w, y, cells, family, cap):
    """Sup norm of the minimum-norm supergradient over refining triangulations.

    Returns ``(certificate, kind, first)`` where ``first`` is one refining
    triangulation as simplex ids.
    """
    if family is not None:
        rows = family.refining_rows(config, cells)
        _, GT, _ = family.derivatives(y, hessian=False)
        point, _ = min_norm_point(w[None, :] - GT[rows])
        first = tuple(int(family.ids[s]) for s in np.flatnonzero(family.M[rows[0]]))
        return float(np.max(np.abs(point))), "full", first
    model = _CellModel(config, cells, cap)
    blocks = [GT for _, GT, _ in model.derivatives(y, hessian=False)]
    point = min_norm_minkowski(w, blocks)
    first = tuple(sorted(int(fam.ids[s]) for fam in model.families for s in np.flatnonzero(fam.M[0])))
    return float(np.max(np.abs(point))), "full" if model.complete else "partial", first


def _finish(config, w, y, family, cap):
    """Identify the optimal subdivision, polish, and certify."""
    best = None
    scale = max(1.0, float(np.ptp(y)))
    for tol in (1e-9, 1e-7, 1e-5, 1e-3):
        cells = induced_cells(config, y, tol=tol * scale, check=False)
        if sorted(set().union(*cells)) != list(range(config.n)) or not tiles_hull(config, cells):
            continue
        _, kind, first = _certify(config, w, y, cells, family, cap)
        piece = PieceFamily(config, [first])
        polished = _polish(config, w, y, cells, piece)
        if polished is None:
            continue
        if induced_cells(config, polished, check=False) != cells:
            continue
        cert, kind, _ = _certify(config, w, polished, cells, family, cap)
        if best is None or cert < best[0]:
            best = (cert, kind, polished, cells)
        if cert <= 1e-10:
            break
    if best is None:
        cells = induced_cells(config, y, check=False)
        cert, kind, _ = _certify(config, w, y, cells, family, cap)
        best = (cert, kind, y, cells)
    return best


def _start(config: PointConfiguration, options: SolverOptions, attempt: int) -> np.ndarray:
    if options.start is not None:
        y = _as_heights(config, options.start).copy()
    else:
        y = np.full(config.n, uniform_height(config))
    sigma = options.perturbation if attempt == 0 else max(options.perturbation, 0.5)
    if sigma > 0:
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([options.seed, attempt, 0x5EED])))
        y = y + sigma * rng.standard_normal(config.n)
    return y


def solve_mle(config: PointConfiguration, weights, options: SolverOptions | None = None,
              raise_on_failure: bool = False) -> MleResult:
    """Maximum-likelihood heights for ``config`` and ``weights``.

    The returned heights are relevant, integrate to one, and induce
    ``result.subdivision``.  When the optimality certificate exceeds
    ``options.grad_tol`` after all restarts, ``converged`` is false (and
    :class:`NotConverged` is raised if ``raise_on_failure``).

    Raises
    ------
    InvalidWeights
        On non-positive weights, a wrong length, or a sum other than 1.
    """
    options = options or SolverOptions()
    w = _weights(config, weights)
    family = _global_family(config, options.family_cap)
    local = family is None
    best = None
    total_iters = 0
    for attempt in range(options.restarts + 1):
        history: list[float] = []
        y0 = _start(config, options, attempt)
        if local:
            y, iters = _sqp_local(config, w, y0, options, history)
        else:
            y, iters = _sqp(config, w, y0, family, options, history)
        total_iters += iters
        cert, kind, y, cells = _finish(config, w, y, family, options.family_cap)
        if best is None or cert < best[0]:
            best = (cert, kind, y, cells, history)
        if cert <= options.grad_tol:
            break
    cert, kind, y, cells, history = best
    y = make_relevant(config, y)
    mass = total_mass(config, y).total_mass
    converged = cert <= options.grad_tol
    result = MleResult(
        heights=y,
        subdivision=Subdivision.from_zero_based(cells),
        log_likelihood=float(w @ y),
        mass=float(mass),
        iterations=total_iters,
        converged=converged,
        grad_norm=cert,
        certificate=kind,
        history=history,
        message="" if converged else f"certificate {cert:.3e} exceeds grad_tol {options.grad_tol:.1e}",
    )
    if not converged and raise_on_failure:
        raise NotConverged(result.message, result)
    return result
