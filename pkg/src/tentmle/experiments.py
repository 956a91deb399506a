"""Reproducible sampling experiments.

Every random draw comes from its own substream: a Philox4x64-10 generator
(numpy's ``Philox``) keyed by ``SeedSequence([seed, trial, tag, attempt])``,
so results do not depend on trial order, chunking or worker count.  Trials
that do not converge are recorded and left out of all percentages.

The environment variable ``TENTMLE_THREADS`` caps the number of worker
processes (default: all cores).
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.spatial import ConvexHull

from .errors import DegenerateConfiguration, DegenerateSample, InvalidInput
from .geometry import PointConfiguration, Subdivision
from .hfunc import h_eval
from .solver import SolverOptions, WeightVector, solve_mle

TAG_WEIGHTS = 0x57
TAG_POINTS = 0x50
MAX_RESAMPLES = 100

HEXAGON = ((0, 0), (1, 0), (2, 1), (2, 2), (1, 2), (0, 1))
OCTAHEDRON = ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1))


# ---------------------------------------------------------------------------
# random streams


def substream(seed: int, trial: int, tag: int, attempt: int = 0) -> np.random.Generator:
    """Independent generator for one (seed, trial, purpose, attempt)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, trial, tag, attempt])))


def sample_weights_simplex(n: int, seed: int, trial: int) -> WeightVector:
    """Uniform draw from the probability simplex (normalized exponential spacings)."""
    if n < 1:
        raise InvalidInput("n must be positive")
    e = substream(seed, trial, TAG_WEIGHTS).standard_exponential(n)
    return WeightVector(e / e.sum())


@dataclass(frozen=True)
class Distribution:
    """Planar point distribution: ``gaussian`` or ``circular`` with exponent ``a``.

    ``circular(a)`` draws ``U1^a (cos 2 pi U2, sin 2 pi U2)``; ``a = 0.5`` is
    uniform on the unit disc and smaller ``a`` pushes mass outwards.
    """

    kind: str
    a: float = 0.5

    def __post_init__(self):
        if self.kind not in ("gaussian", "circular"):
            raise InvalidInput(f"unknown distribution {self.kind!r}")
        if self.kind == "circular" and not self.a > 0:
            raise InvalidInput("circular exponent must be positive")

    @classmethod
    def parse(cls, text: str) -> "Distribution":
        """``"gaussian"`` or ``"circular:a"``."""
        if isinstance(text, Distribution):
            return text
        name, _, arg = str(text).partition(":")
        if name == "circular":
            try:
                return cls("circular", float(arg) if arg else 0.5)
            except ValueError as exc:
                raise InvalidInput(f"bad circular exponent {arg!r}") from exc
        return cls(name)

    def __str__(self):
        return "gaussian" if self.kind == "gaussian" else f"circular:{self.a:g}"

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "gaussian":
            return rng.standard_normal((n, 2))
        u = rng.random((n, 2))
        r = u[:, 0] ** self.a
        angle = 2.0 * math.pi * u[:, 1]
        return np.column_stack([r * np.cos(angle), r * np.sin(angle)])


def sample_points(dist, n: int, seed: int, trial: int, attempt: int = 0) -> PointConfiguration:
    """``n`` i.i.d. planar points from ``dist``.

    Raises
    ------
    DegenerateSample
        If the draw is not a valid configuration; callers retry with the
        next ``attempt``.
    """
    pts = Distribution.parse(dist).draw(substream(seed, trial, TAG_POINTS, attempt), n)
    try:
        return PointConfiguration(pts)
    except DegenerateConfiguration as exc:
        raise DegenerateSample(str(exc)) from exc


def _gaussian_config(d: int, n: int, seed: int, trial: int) -> PointConfiguration:
    for attempt in range(MAX_RESAMPLES):
        pts = substream(seed, trial, TAG_POINTS, attempt).standard_normal((n, d))
        try:
            return PointConfiguration(pts)
        except DegenerateConfiguration:
            continue
    raise DegenerateSample(f"no valid configuration in {MAX_RESAMPLES} draws")


def _planar_config(dist, n: int, seed: int, trial: int) -> PointConfiguration:
    for attempt in range(MAX_RESAMPLES):
        try:
            return sample_points(dist, n, seed, trial, attempt)
        except DegenerateSample:
            continue
    raise DegenerateSample(f"no valid configuration in {MAX_RESAMPLES} draws")


# ---------------------------------------------------------------------------
# workers


def worker_count() -> int:
    """Worker processes: ``TENTMLE_THREADS`` if set, else the core count."""
    env = os.environ.get("TENTMLE_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _run_parallel(fn, args: list, workers: int | None):
    """``[fn(a) for a in args]``, in order, possibly in worker processes."""
    workers = worker_count() if workers is None else max(1, workers)
    if workers == 1 or len(args) < 2:
        return [fn(a) for a in args]
    chunk = max(1, len(args) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, args, chunksize=chunk))


# ---------------------------------------------------------------------------
# subdivision descriptors


def polygon_order(config: PointConfiguration) -> bool:
    """True for a convex polygon whose labels run cyclically around the hull."""
    if config.d != 2 or config.n < 3:
        return False
    hull = ConvexHull(config.points).vertices.tolist()
    if len(hull) != config.n:
        return False
    k = hull.index(0)
    order = hull[k:] + hull[:k]
    return order == list(range(config.n)) or order == [0] + list(range(config.n - 1, 0, -1))


def diagonal_code(subdivision: Subdivision, n: int) -> str:
    """Diagonals of a convex-polygon subdivision, e.g. ``"13 14"``; ``"∅"`` when trivial."""
    diagonals = set()
    for cell in subdivision.cells:
        ring = sorted(cell)
        for a, b in zip(ring, ring[1:] + ring[:1]):
            i, j = min(a, b), max(a, b)
            if j - i not in (1, n - 1):
                diagonals.add((i, j))
    if not diagonals:
        return "∅"
    return " ".join(f"{i}{j}" if n < 10 else f"{i}-{j}" for i, j in sorted(diagonals))


def cell_vertex_count(config: PointConfiguration, cell) -> int:
    """Number of vertices of the polytope spanned by a 1-based cell."""
    pts = config.points[[i - 1 for i in cell]]
    if config.d == 1:
        return 2
    return len(ConvexHull(pts).vertices)


def hull_vertex_count(config: PointConfiguration) -> int:
    if config.d == 1:
        return 2
    return len(ConvexHull(config.points).vertices)


# ---------------------------------------------------------------------------
# stratum frequencies


@dataclass(frozen=True)
class FrequencyReport:
    """Observed subdivisions with counts and percentages over converged trials."""

    entries: tuple[tuple[str, int, float], ...]
    total: int
    discarded: int
    seed: int

    @property
    def converged(self) -> int:
        return self.total - self.discarded

    def percentage(self, key: str) -> float:
        for k, _, pct in self.entries:
            if k == key:
                return pct
        return 0.0

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "total": self.total,
            "discarded": self.discarded,
            "strata": [{"subdivision": k, "count": c, "percentage": p} for k, c, p in self.entries],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "FrequencyReport":
        entries = tuple((e["subdivision"], int(e["count"]), float(e["percentage"])) for e in obj["strata"])
        return cls(entries, int(obj["total"]), int(obj["discarded"]), int(obj["seed"]))


def _frequency_report(keys: list[str | None], seed: int) -> FrequencyReport:
    counts = Counter(k for k in keys if k is not None)
    good = sum(counts.values())
    entries = tuple(sorted(((k, c, 100.0 * c / good) for k, c in counts.items()), key=lambda e: (-e[1], e[0])))
    return FrequencyReport(entries, len(keys), len(keys) - good, seed)


def _stratum_trial(args):
    config, seed, trial, grad_tol = args
    w = sample_weights_simplex(config.n, seed, trial)
    result = solve_mle(config, w, SolverOptions(grad_tol=grad_tol, seed=seed))
    if not result.converged:
        return None
    if polygon_order(config):
        return diagonal_code(result.subdivision, config.n)
    return result.subdivision.key()


def stratum_frequency_experiment(config: PointConfiguration, trials: int, seed: int,
                                 grad_tol: float = 1e-8, workers: int | None = None) -> FrequencyReport:
    """Empirical distribution of optimal subdivisions for uniform random weights.

    Subdivisions of a convex polygon labeled in cyclic order are keyed by
    their diagonals (``"13 14"``, ``"∅"`` for the trivial one); others by
    :meth:`Subdivision.key`.
    """
    keys = _run_parallel(_stratum_trial, [(config, seed, t, grad_tol) for t in range(trials)], workers)
    return _frequency_report(keys, seed)


# ---------------------------------------------------------------------------
# unit weights on random configurations


@dataclass(frozen=True)
class TrialRecord:
    """One random configuration solved with unit weights."""

    trial_index: int
    points: tuple[tuple[float, ...], ...]
    subdivision: str
    shape_profile: tuple[int, ...]
    hull_vertices: int
    converged: bool
    iterations: int

    @property
    def cells(self) -> int:
        return sum(self.shape_profile)


CSV_FIELDS = ("trial_index", "subdivision", "cells", "shape_profile", "hull_vertices", "converged", "iterations", "points")


def records_to_csv(records) -> str:
    """One CSV row per record (profiles and points as JSON)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for r in records:
        writer.writerow([r.trial_index, r.subdivision, r.cells, json.dumps(list(r.shape_profile)), r.hull_vertices,
                         int(r.converged), r.iterations, json.dumps([list(p) for p in r.points])])
    return buf.getvalue()


def shape_profile(config: PointConfiguration, subdivision: Subdivision) -> tuple[int, ...]:
    """Counts of cells with ``k`` vertices for ``k = d+1 .. n``."""
    counts = Counter(cell_vertex_count(config, c) for c in subdivision.cells)
    return tuple(counts.get(k, 0) for k in range(config.d + 1, config.n + 1))


@dataclass(frozen=True)
class ShapeTable:
    """Trials grouped by (shape profile, hull size), over converged trials."""

    rows: tuple[tuple[tuple[int, ...], int, int], ...]
    total: int
    discarded: int

    @property
    def converged(self) -> int:
        return self.total - self.discarded

    def share(self, predicate) -> float:
        """Fraction of converged trials whose ``(profile, hull)`` satisfies ``predicate``."""
        hits = sum(count for profile, hull, count in self.rows if predicate(profile, hull))
        return hits / self.converged if self.converged else math.nan

    def trivial_share(self) -> float:
        return self.share(lambda profile, hull: sum(profile) == 1)

    def mean_cells(self) -> float:
        total = sum(sum(profile) * count for profile, _, count in self.rows)
        return total / self.converged if self.converged else math.nan

    def to_json(self) -> dict:
        return {
            "total": self.total,
            "discarded": self.discarded,
            "rows": [{"profile": list(p), "hull_vertices": h, "count": c} for p, h, c in self.rows],
        }


def _table1_trial(args):
    dist, n, seed, trial, grad_tol = args
    config = _planar_config(dist, n, seed, trial)
    result = solve_mle(config, np.full(n, 1.0 / n), SolverOptions(grad_tol=grad_tol, seed=seed))
    return TrialRecord(
        trial_index=trial,
        points=tuple(tuple(float(v) for v in p) for p in config.points),
        subdivision=result.subdivision.key(),
        shape_profile=shape_profile(config, result.subdivision),
        hull_vertices=hull_vertex_count(config),
        converged=result.converged,
        iterations=result.iterations,
    )


def table1_experiment(dist, trials: int, seed: int, n: int = 6, grad_tol: float = 1e-8,
                      workers: int | None = None) -> tuple[list[TrialRecord], ShapeTable]:
    """Unit-weight optimal subdivisions of ``n`` random planar points, grouped by cell shapes."""
    dist = Distribution.parse(dist)
    records = _run_parallel(_table1_trial, [(dist, n, seed, t, grad_tol) for t in range(trials)], workers)
    counts = Counter((r.shape_profile, r.hull_vertices) for r in records if r.converged)
    rows = tuple(sorted(((p, h, c) for (p, h), c in counts.items()), key=lambda r: (-r[2], r[0], r[1])))
    discarded = sum(1 for r in records if not r.converged)
    return records, ShapeTable(rows, len(records), discarded)


# ---------------------------------------------------------------------------
# d + 2 and d + 3 points


@dataclass(frozen=True)
class UnitWeightReport:
    """Outcome of unit-weight solves on random configurations of ``n`` points in ``R^d``."""

    d: int
    n: int
    trials: int
    trivial: int
    discarded: int
    counterexamples: tuple[tuple[int, str], ...] = field(default_factory=tuple)

    def to_json(self) -> dict:
        return asdict(self)


def _unit_trial(args):
    d, n, seed, trial, grad_tol = args
    config = _gaussian_config(d, n, seed, trial)
    result = solve_mle(config, np.full(n, 1.0 / n), SolverOptions(grad_tol=grad_tol, seed=seed))
    return trial, result.converged, len(result.subdivision.cells) == 1 and len(result.subdivision.cells[0]) == n, \
        result.subdivision.key()


def d_plus_2_check(d: int, trials: int, seed: int, n: int | None = None, grad_tol: float = 1e-8,
                   workers: int | None = None) -> UnitWeightReport:
    """Unit weights on ``n = d + 2`` Gaussian points (or the given ``n``): count nontrivial optima."""
    if d not in (1, 2, 3):
        raise InvalidInput("d must be 1, 2 or 3")
    n = d + 2 if n is None else n
    out = _run_parallel(_unit_trial, [(d, n, seed, t, grad_tol) for t in range(trials)], workers)
    trivial = sum(1 for _, ok, triv, _ in out if ok and triv)
    discarded = sum(1 for _, ok, _, _ in out if not ok)
    bad = tuple((t, key) for t, ok, triv, key in out if ok and not triv)
    return UnitWeightReport(d, n, trials, trivial, discarded, bad)


def special_configuration(d: int) -> PointConfiguration:
    """``e_1, ..., e_d, 0`` and the point ``(e_1 + ... + e_d) / (d + 1)``."""
    pts = np.vstack([np.eye(d), np.zeros((1, d)), np.full((1, d), 1.0 / (d + 1))])
    return PointConfiguration(pts)


def apex_triangulation(d: int) -> Subdivision:
    """The triangulation ``{D \\ 1, ..., D \\ (d+1)}`` with ``D = {1, ..., d+2}``."""
    full = set(range(1, d + 3))
    return Subdivision(tuple(tuple(sorted(full - {i})) for i in range(1, d + 2)))


@dataclass(frozen=True)
class Construction:
    config: PointConfiguration
    weights: WeightVector
    expected: Subdivision | None


def d_plus_3_construction(d: int, ratio: float, split: float | None = None) -> Construction:
    """The ``d + 2`` point configuration with ``w_{d+2} / w_1 = ratio``, or its split version.

    Without ``split``, ``expected`` is the apex triangulation when
    ``ratio > (d+1)/d`` and None otherwise.  With ``split = delta`` the last
    point becomes two points ``delta`` apart (along a fixed generic
    direction), all ``d + 3`` points get unit weights, and ``expected`` is
    None: the optimum is only known to be nontrivial for small ``delta``.
    """
    if d < 2:
        raise InvalidInput("d must be at least 2")
    if not ratio > 0:
        raise InvalidInput("ratio must be positive")
    config = special_configuration(d)
    if split is None:
        w = np.ones(d + 2)
        w[-1] = ratio
        expected = apex_triangulation(d) if ratio > (d + 1) / d else None
        return Construction(config, WeightVector(w / w.sum()), expected)
    direction = np.arange(1.0, d + 1.0)
    direction /= np.linalg.norm(direction)
    centre = config.points[-1]
    pts = np.vstack([config.points[:-1], centre - 0.5 * split * direction, centre + 0.5 * split * direction])
    return Construction(PointConfiguration(pts), WeightVector(np.full(d + 3, 1.0 / (d + 3))), None)


def alpha_weight_ratio(d: int, alpha: float) -> float:
    """``w_{d+2} / w_1 = (d+1) e^alpha H(-alpha, ..., -alpha) / (d H(alpha, 0, ..., 0))``."""
    return (d + 1) * math.exp(alpha) * h_eval(np.full(d, -alpha)) / (d * h_eval(np.r_[alpha, np.zeros(d - 1)]))


@dataclass(frozen=True)
class AlphaReport:
    d: int
    alpha: float
    ratio: float
    heights: tuple[float, ...]
    base_spread: float
    gap: float
    gap_error: float
    subdivision: str
    converged: bool

    def passed(self, tol: float = 1e-4) -> bool:
        return self.converged and self.base_spread <= tol and self.gap_error <= tol

    def to_json(self) -> dict:
        return asdict(self)


def alpha_heights_check(d: int, alpha: float, grad_tol: float = 1e-8) -> AlphaReport:
    """Solve with the weights for gap ``alpha`` and measure the resulting height gap."""
    if d < 2 or not alpha > 0:
        raise InvalidInput("need d >= 2 and alpha > 0")
    ratio = alpha_weight_ratio(d, alpha)
    con = d_plus_3_construction(d, ratio)
    result = solve_mle(con.config, con.weights, SolverOptions(grad_tol=grad_tol))
    y = result.heights
    base = y[: d + 1]
    gap = float(y[d + 1] - base.mean())
    return AlphaReport(d, alpha, ratio, tuple(float(v) for v in y), float(np.ptp(base)), gap, abs(gap - alpha),
                       result.subdivision.key(), result.converged)
