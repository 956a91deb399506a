"""From optimal heights back to weights.

For heights ``y`` that are relevant and integrate to one, each
triangulation ``T`` refining the induced subdivision gives the weight vector

    w^T_k = sum_{sigma in T, k in sigma} vol(sigma) e^{y_k} H(y_i - y_k : i in sigma \\ k),

and ``y`` is the maximum-likelihood solution exactly for the weights in the
cone spanned by these generators.  The module computes generators, tests
cone membership, and constructs weights that realize a given regular
subdivision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog, nnls

from . import exact
from .errors import (
    ConeViolation,
    NotRegular,
    NotRelevant,
    NotUnitMass,
    RealizationFailed,
)
from .geometry import (
    N_MAX,
    PointConfiguration,
    Subdivision,
    Triangulation,
    _as_heights,
    _check_cells,
    induced_subdivision,
    is_relevant,
    refining_triangulations,
    secondary_cone_contains,
)
from .quadrature import normalize_heights, total_mass
from .solver import SolverOptions, WeightVector, piece_gradient, solve_mle

MASS_TOL = 1e-8
"""Allowed deviation of the total mass from one."""

CONE_TOL = 1e-9
"""Cone-membership residual tolerance, relative to the weight norm."""

BALL_RADIUS = 0.5
"""Sup-norm radius around the constant heights for realizing heights."""

RANK_RTOL = 1e-8


@dataclass(frozen=True)
class NormalConeGenerators:
    """Generators of the normal cone at a boundary point of the Samworth body.

    Attributes
    ----------
    base_heights : ndarray
        Relevant heights of mass one.
    generators : tuple of (Triangulation, ndarray)
        One unnormalized weight vector per refining regular triangulation.
    """

    base_heights: np.ndarray
    generators: tuple[tuple[Triangulation, np.ndarray], ...]

    def __len__(self):
        return len(self.generators)

    def matrix(self) -> np.ndarray:
        """Generators as the columns of an ``n x m`` matrix."""
        return np.column_stack([g for _, g in self.generators])

    def to_json(self) -> dict:
        return {
            "base_heights": [float(v) for v in self.base_heights],
            "generators": [{"triangulation": t.to_json()["cells"], "weights": [float(v) for v in g]}
                           for t, g in self.generators],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "NormalConeGenerators":
        gens = tuple((Triangulation(tuple(tuple(c) for c in g["triangulation"])), np.asarray(g["weights"], dtype=float))
                     for g in obj["generators"])
        return cls(np.asarray(obj["base_heights"], dtype=float), gens)


def weights_kernel(config: PointConfiguration, heights, triangulation: Subdivision) -> np.ndarray:
    """The weight formula without any precondition checks."""
    return piece_gradient(config, triangulation, heights)


def weights_from_heights(config: PointConfiguration, heights, triangulation: Subdivision) -> np.ndarray:
    """Unnormalized weights under which ``heights`` is optimal.

    Raises
    ------
    NotRelevant
        If a tent pole lies strictly below the tent.
    NotUnitMass
        If the total mass differs from one by more than ``MASS_TOL``.
    ConeViolation
        If ``triangulation`` does not refine the induced subdivision.
    """
    y = _as_heights(config, heights)
    if not is_relevant(config, y):
        raise NotRelevant("heights are not relevant; apply make_relevant first")
    mass = total_mass(config, y).total_mass
    if abs(mass - 1.0) > MASS_TOL:
        raise NotUnitMass(f"total mass {mass!r} is not 1; apply normalize_heights first")
    if not secondary_cone_contains(config, triangulation, y):
        raise ConeViolation("triangulation does not refine the induced subdivision")
    return weights_kernel(config, y, triangulation)


def normal_cone_generators(config: PointConfiguration, heights, n_max: int = N_MAX) -> NormalConeGenerators:
    """One generator per regular triangulation refining the subdivision of ``heights``.

    Raises
    ------
    TooLarge
        If ``n`` exceeds the enumeration limit ``n_max``.
    """
    y = _as_heights(config, heights)
    sub = induced_subdivision(config, y)
    gens = tuple((t, weights_from_heights(config, y, t)) for t in refining_triangulations(config, sub, n_max))
    return NormalConeGenerators(y.copy(), gens)


def cone_membership(weights, generators) -> bool:
    """Whether ``weights`` is a nonnegative combination of the generators.

    Decided by nonnegative least squares; the residual must be at most
    ``CONE_TOL`` times the norm of ``weights``.
    """
    w = np.asarray(weights.weights if isinstance(weights, WeightVector) else weights, dtype=float)
    if isinstance(generators, NormalConeGenerators):
        A = generators.matrix()
    else:
        A = np.column_stack([np.asarray(g, dtype=float) for g in generators])
    if A.shape[1] == 0:
        raise ValueError("need at least one generator")
    scale = float(np.max(np.abs(A)))
    _, residual = nnls(A / scale, w / scale)
    return residual * scale <= CONE_TOL * float(np.linalg.norm(w))


# ---------------------------------------------------------------------------
# realizing subdivisions


def _cone_coordinates(config: PointConfiguration, cells):
    """Exact basis of the flat space of ``cells`` and the fold rows in its coordinates."""
    eq, ineq = config.tables.cone_system(cells)
    basis = exact.nullspace(eq, config.n)
    A = [[sum((r[i] * b[i] for i in range(config.n) if r[i]), Fraction(0)) for b in basis] for r in ineq]
    return basis, A


def _interior_point(basis, A, n: int, radius: float):
    """Float ``z`` maximizing the smallest normalized fold slack with ``|N z| <= radius``."""
    k = len(basis)
    if not A:
        return np.zeros(k)
    Af = np.array([[float(v) for v in row] for row in A])
    N = np.array([[float(b[i]) for b in basis] for i in range(n)])
    norms = np.linalg.norm(Af, axis=1)
    # variables (z, s); maximize s
    c = np.zeros(k + 1)
    c[-1] = -1.0
    A_ub = np.vstack([
        np.hstack([-Af, norms[:, None]]),
        np.hstack([N, np.zeros((n, 1))]),
        np.hstack([-N, np.zeros((n, 1))]),
    ])
    b_ub = np.concatenate([np.zeros(len(A)), np.full(2 * n, radius)])
    bounds = [(None, None)] * k + [(None, 1.0)]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if res.status != 0 or res.x[-1] <= 0:
        return None
    return res.x[:k]


def _exact_heights(basis, A, z: np.ndarray, n: int):
    """Exact heights ``N z`` (``z`` rationalized) if every fold is strict, else None."""
    zq = [Fraction(float(v)) for v in z]
    if A and min(exact.matvec(A, zq)) <= 0:
        return None
    return np.array([float(sum((zi * b[i] for zi, b in zip(zq, basis)), Fraction(0))) for i in range(n)])


def _perturbed(basis, A, z: np.ndarray, n: int, rng: np.random.Generator, radius: float) -> np.ndarray:
    """A random point of the open cone near ``z`` (ratio test on the float slacks)."""
    N = np.array([[float(b[i]) for b in basis] for i in range(n)])
    v = rng.standard_normal(z.size)
    box = radius / max(float(np.max(np.abs(N @ v))), 1e-300)
    if not A:
        return z + rng.uniform(0.1, 0.9) * box * v
    Af = np.array([[float(v) for v in row] for row in A])
    slack = Af @ z
    rate = Af @ v
    shrinking = rate < 0
    tau = float(np.min(slack[shrinking] / -rate[shrinking])) if np.any(shrinking) else math.inf
    return z + rng.uniform(0.1, 0.9) * min(tau, 2.0 * box) * v


def realize_subdivision(config: PointConfiguration, subdivision: Subdivision, seed: int = 0,
                        attempts: int = 10, options: SolverOptions | None = None) -> WeightVector:
    """Weights whose maximum-likelihood subdivision is ``subdivision``.

    Heights are taken in the interior of the subdivision's secondary cone
    near the constant vector, normalized, and the normal-cone generators
    there are averaged.  The result is verified by solving again; on
    failure new interior heights are tried.

    Raises
    ------
    NotRegular
        If no heights induce ``subdivision``.
    RealizationFailed
        If no attempt reproduces the subdivision, or if some point lies in
        no cell (optimal heights are relevant, so every point is in a cell).
    """
    _check_cells(config, subdivision)
    cells = subdivision.zero_based()
    ok, _ = config.tables.regularity(cells)
    if not ok:
        raise NotRegular(f"subdivision {subdivision.key()} is not regular")
    if subdivision.vertices() != set(range(1, config.n + 1)):
        raise RealizationFailed("every point must lie in some cell of an optimal subdivision")
    options = options or SolverOptions()
    basis, A = _cone_coordinates(config, cells)
    z0 = _interior_point(basis, A, config.n, BALL_RADIUS)
    if z0 is None:
        raise NotRegular(f"no interior heights found for {subdivision.key()}")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 0x7EA1])))
    target = Subdivision(subdivision.cells)
    for attempt in range(attempts):
        z = z0 if attempt == 0 else _perturbed(basis, A, z0, config.n, rng, BALL_RADIUS)
        y = _exact_heights(basis, A, z, config.n)
        if y is None:
            continue
        y = normalize_heights(config, y)
        if Subdivision(induced_subdivision(config, y).cells) != target:
            continue
        gens = normal_cone_generators(config, y, n_max=max(N_MAX, config.n))
        if len(gens) == 0:
            continue
        w = gens.matrix().mean(axis=1)
        weights = WeightVector(w / w.sum())
        result = solve_mle(config, weights, options)
        if result.converged and Subdivision(result.subdivision.cells) == target:
            return weights
    raise RealizationFailed(f"no weights reproduced {subdivision.key()} in {attempts} attempts")


# ---------------------------------------------------------------------------
# rank probe


@dataclass(frozen=True)
class RankSample:
    heights: np.ndarray
    rank: int
    generators: int
    singular_values: np.ndarray


@dataclass(frozen=True)
class RankReport:
    """Numerical ranks of the generator matrix across a secondary cone.

    ``expected`` is ``n - dim(cone) + 1``: the GKZ vectors of the refining
    triangulations span a face of affine dimension ``n - dim(cone)`` that
    misses the origin, so at constant heights (where generators are
    multiples of GKZ vectors) their linear span has one more dimension.
    ``matches`` records whether every sample had that rank.  Nothing is
    asserted.
    """

    subdivision: Subdivision
    cone_dimension: int
    expected: int
    samples: tuple[RankSample, ...]

    @property
    def matches(self) -> bool:
        return all(s.rank == self.expected for s in self.samples)

    def to_json(self) -> dict:
        return {
            "subdivision": self.subdivision.to_json()["cells"],
            "cone_dimension": self.cone_dimension,
            "expected_rank": self.expected,
            "matches": self.matches,
            "samples": [{"heights": [float(v) for v in s.heights], "rank": s.rank, "generators": s.generators,
                         "singular_values": [float(v) for v in s.singular_values]} for s in self.samples],
        }


def rank_probe(config: PointConfiguration, subdivision: Subdivision, trials: int = 10, seed: int = 0,
               include_constant: bool = True) -> RankReport:
    """Sample heights in the secondary cone of ``subdivision`` and report generator-matrix ranks.

    The first sample is the interior point nearest the constant vector (the
    constant vector itself for the trivial subdivision) when
    ``include_constant``; the rest are random interior points.
    """
    _check_cells(config, subdivision)
    cells = subdivision.zero_based()
    if not config.tables.regularity(cells)[0]:
        raise NotRegular(f"subdivision {subdivision.key()} is not regular")
    basis, A = _cone_coordinates(config, cells)
    z0 = _interior_point(basis, A, config.n, BALL_RADIUS)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 0x4A4B])))
    samples = []
    target = Subdivision(subdivision.cells)
    drawn = 0
    while len(samples) < trials and drawn < 20 * max(trials, 1):
        drawn += 1
        first = include_constant and not samples
        z = z0 if first else _perturbed(basis, A, z0, config.n, rng, BALL_RADIUS)
        y = _exact_heights(basis, A, z, config.n)
        if y is None:
            continue
        y = normalize_heights(config, y)
        if Subdivision(induced_subdivision(config, y).cells) != target:
            continue
        gens = normal_cone_generators(config, y, n_max=max(N_MAX, config.n))
        M = gens.matrix()
        sv = np.linalg.svd(M, compute_uv=False)
        rank = int(np.sum(sv > RANK_RTOL * sv[0])) if sv.size else 0
        samples.append(RankSample(y, rank, M.shape[1], sv))
    dim = len(basis)
    return RankReport(target, dim, config.n - dim + 1, tuple(samples))
