"""Configurations, tents, induced subdivisions, enumeration and GKZ vectors."""

import math
from itertools import combinations

import numpy as np
import pytest

from tentmle.errors import DegenerateConfiguration, InvalidInput, TooLarge
from tentmle.fixtures import fixture_config
from tentmle.geometry import (
    N_MAX,
    PointConfiguration,
    Subdivision,
    Triangulation,
    enumerate_regular_triangulations,
    gkz_vector,
    induced_subdivision,
    is_regular,
    is_relevant,
    make_relevant,
    normalized_volume,
    refining_triangulations,
    secondary_cone_contains,
    tent_value,
)

SQUARE = PointConfiguration([[0, 0], [1, 0], [1, 1], [0, 1]])


def brute_upper_triangulation(points, y):
    """Simplices whose lifted affine hull lies strictly above every other lifted point."""
    n, d = points.shape
    out = []
    for s in combinations(range(n), d + 1):
        A = np.column_stack([points[list(s)], np.ones(d + 1)])
        if abs(np.linalg.det(A)) < 1e-12:
            continue
        coef = np.linalg.solve(A, y[list(s)])
        vals = points @ coef[:d] + coef[d]
        others = [j for j in range(n) if j not in s]
        if all(vals[j] > y[j] + 1e-9 for j in others):
            out.append(tuple(i + 1 for i in s))
    return Subdivision(tuple(out))


def hexagon_v(config, i, j, k):
    return normalized_volume(config, (i, j, k))


# -- configuration ----------------------------------------------------------

def test_configuration_invariants():
    with pytest.raises(DegenerateConfiguration):
        PointConfiguration([[0, 0], [1, 0], [0, 0]])
    with pytest.raises(DegenerateConfiguration):
        PointConfiguration([[0, 0], [1, 1], [2, 2]])
    with pytest.raises(InvalidInput):
        PointConfiguration([[0, 0], [1, 0]])
    c = PointConfiguration([[0.0], [3.0]])
    assert (c.n, c.d) == (2, 1)


def test_configuration_json_round_trip():
    c = fixture_config("hexagon")
    assert PointConfiguration.from_json(c.to_json()) == c


def test_subdivision_canonical_form():
    a = Subdivision(((3, 1, 2), (4, 1, 3)))
    b = Subdivision.from_json({"cells": [[1, 3, 4], [1, 2, 3]]})
    assert a == b and a.cells == ((1, 2, 3), (1, 3, 4))
    assert Subdivision.from_json(a.to_json()) == a
    with pytest.raises(InvalidInput):
        Subdivision(((0, 1, 2),))
    with pytest.raises(InvalidInput):
        Triangulation(((1, 2, 3), (1, 3, 4, 5)))


# -- volumes ----------------------------------------------------------------

def test_normalized_volume():
    tri = PointConfiguration([[0, 0], [1, 0], [0, 1]])
    assert normalized_volume(tri, (1, 2, 3)) == 1.0
    assert normalized_volume(fixture_config("hexagon"), (1, 2, 3)) == pytest.approx(1.0)
    assert normalized_volume(PointConfiguration([[0.0], [3.0]]), (1, 2)) == pytest.approx(3.0, rel=1e-15)


# -- tents and subdivisions -------------------------------------------------

def test_induced_subdivision_square():
    assert induced_subdivision(SQUARE, [1, 0, 1, 0]) == Subdivision(((1, 2, 3), (1, 3, 4)))


def test_induced_subdivision_constant_includes_interior_points():
    c = PointConfiguration([[0, 0], [1, 0], [1, 1], [0, 1], [0.5, 0.5]])
    assert induced_subdivision(c, np.zeros(5)) == Subdivision(((1, 2, 3, 4, 5),))


def test_induced_subdivision_fan():
    hexagon = fixture_config("hexagon")
    y = np.zeros(6)
    y[0] = 1.0  # raising vertex 1 cones every triangle from it
    assert induced_subdivision(hexagon, y) == Subdivision(((1, 2, 3), (1, 3, 4), (1, 4, 5), (1, 5, 6)))


@pytest.mark.parametrize("d, n", [(1, 5), (2, 6), (2, 8), (3, 7)])
def test_induced_subdivision_matches_brute_force(rng, d, n):
    for _ in range(15):
        config = PointConfiguration(rng.standard_normal((n, d)))
        y = rng.standard_normal(n)
        assert induced_subdivision(config, y) == brute_upper_triangulation(config.points, y)


def test_induced_subdivision_affine_invariance(rng):
    config = PointConfiguration(rng.standard_normal((7, 2)))
    y = rng.standard_normal(7)
    a, b = rng.standard_normal(2), rng.standard_normal()
    assert induced_subdivision(config, y) == induced_subdivision(config, y + config.points @ a + b)


def test_cell_volumes_tile_hull(rng):
    from scipy.spatial import ConvexHull

    for d in (2, 3):
        config = PointConfiguration(rng.standard_normal((8, d)))
        sub = induced_subdivision(config, rng.standard_normal(8))
        total = sum(ConvexHull(config.points[list(np.array(c) - 1)]).volume for c in sub.cells)
        assert total == pytest.approx(ConvexHull(config.points).volume, rel=1e-9)


def test_tent_value():
    y = [1, 0, 1, 0]
    assert tent_value(SQUARE, y, [0.5, 0.5]) == pytest.approx(1.0)
    assert tent_value(SQUARE, y, [2.0, 0.5]) == -math.inf
    assert tent_value(SQUARE, y, [1.0, 0.0]) == pytest.approx(0.0)


def test_relevance():
    line = PointConfiguration([[0.0], [1.0], [2.0]])
    assert is_relevant(line, [0, 1, 0])
    assert not is_relevant(line, [0, -5, 0])
    np.testing.assert_allclose(make_relevant(line, [0, -5, 0]), [0, 0, 0], atol=1e-12)
    c = PointConfiguration([[0, 0], [1, 0], [1, 1], [0, 1], [0.5, 0.5]])
    y = np.array([0, 0, 0, 0, -3.0])
    assert not is_relevant(c, y)
    fixed = make_relevant(c, y)
    assert fixed[4] == pytest.approx(tent_value(c, y, [0.5, 0.5]))
    assert is_relevant(c, fixed)
    np.testing.assert_array_equal(make_relevant(c, fixed), fixed)


# -- enumeration ------------------------------------------------------------

@pytest.mark.parametrize("name, count", [("hexagon", 14), ("octahedron", 3), ("square", 2)])
def test_regular_triangulation_counts(name, count):
    assert len(enumerate_regular_triangulations(fixture_config(name))) == count


def test_octahedron_triangulations():
    tris = enumerate_regular_triangulations(fixture_config("octahedron"))
    assert {t.key() for t in tris} == {
        "1235|1236|1245|1246",
        "1345|1346|2345|2346",
        "1356|1456|2356|2456",
    }


def test_enumeration_size_guard(rng):
    with pytest.raises(TooLarge):
        enumerate_regular_triangulations(PointConfiguration(rng.standard_normal((N_MAX + 1, 2))))


def test_refining_triangulations():
    hexagon = fixture_config("hexagon")
    fan = Triangulation(((1, 2, 3), (1, 3, 4), (1, 4, 5), (1, 5, 6)))
    assert refining_triangulations(hexagon, fan) == [fan]
    assert len(refining_triangulations(hexagon, Subdivision(((1, 2, 3, 4, 5, 6),)))) == 14
    edge = refining_triangulations(hexagon, Subdivision(((1, 2, 3), (1, 3, 4), (1, 4, 5, 6))))
    assert {t.key() for t in edge} == {"123|134|145|156", "123|134|146|456"}


def test_non_regular_triangulation_detected():
    # outer triangle and its half-size copy about the centroid; the cyclically
    # twisted triangulation of the three trapezoids is not regular
    c = PointConfiguration([[0, 0], [6, 0], [3, 6], [1.5, 1], [4.5, 1], [3, 4]])
    twisted = Subdivision(((1, 2, 4), (2, 4, 5), (2, 3, 5), (3, 5, 6), (1, 3, 6), (1, 4, 6), (4, 5, 6)))
    assert not is_regular(c, twisted)
    untwisted = Subdivision(((1, 2, 4), (2, 4, 5), (2, 3, 5), (3, 5, 6), (1, 3, 4), (3, 4, 6), (4, 5, 6)))
    assert is_regular(c, untwisted)
    keys = {t.key() for t in enumerate_regular_triangulations(c)}
    assert twisted.key() not in keys and untwisted.key() in keys


# -- GKZ vectors ------------------------------------------------------------

def test_gkz_square():
    np.testing.assert_allclose(gkz_vector(SQUARE, Triangulation(((1, 2, 3), (1, 3, 4)))), [2, 1, 2, 1])


def test_gkz_hexagon_symmetry_classes():
    X = fixture_config("hexagon")

    def v(*ijk):
        return hexagon_v(X, *ijk)

    fan = Triangulation(((1, 2, 3), (1, 3, 4), (1, 4, 5), (1, 5, 6)))
    expect = [v(1, 2, 3) + v(1, 3, 4) + v(1, 4, 5) + v(1, 5, 6), v(1, 2, 3), v(1, 2, 3) + v(1, 3, 4),
              v(1, 3, 4) + v(1, 4, 5), v(1, 4, 5) + v(1, 5, 6), v(1, 5, 6)]
    np.testing.assert_allclose(gkz_vector(X, fan), expect, rtol=1e-14)
    zig = Triangulation(((1, 2, 3), (1, 3, 4), (1, 4, 6), (4, 5, 6)))
    expect = [v(1, 2, 3) + v(1, 3, 4) + v(1, 4, 6), v(1, 2, 3), v(1, 2, 3) + v(1, 3, 4),
              v(1, 3, 4) + v(1, 4, 6) + v(4, 5, 6), v(4, 5, 6), v(1, 4, 6) + v(4, 5, 6)]
    np.testing.assert_allclose(gkz_vector(X, zig), expect, rtol=1e-14)
    tri = Triangulation(((1, 2, 3), (1, 3, 5), (1, 5, 6), (3, 4, 5)))
    expect = [v(1, 2, 3) + v(1, 3, 5) + v(1, 5, 6), v(1, 2, 3), v(1, 2, 3) + v(1, 3, 5) + v(3, 4, 5),
              v(3, 4, 5), v(1, 3, 5) + v(1, 5, 6) + v(3, 4, 5), v(1, 5, 6)]
    np.testing.assert_allclose(gkz_vector(X, tri), expect, rtol=1e-14)


def test_gkz_vectors_distinct_and_sum():
    X = fixture_config("hexagon")
    tris = enumerate_regular_triangulations(X)
    vecs = {tuple(np.round(gkz_vector(X, t), 9)) for t in tris}
    assert len(vecs) == 14
    hull_vol = sum(normalized_volume(X, c) for c in tris[0].cells)
    for t in tris:
        assert gkz_vector(X, t).sum() == pytest.approx(3 * hull_vol)


def piecewise_linear(points, y, triangulation, samples):
    """Interpolant on a triangulation by barycentric coordinates; -inf outside."""
    out = np.full(len(samples), -np.inf)
    for cell in triangulation.cells:
        idx = np.array(cell) - 1
        T = (points[idx[1:]] - points[idx[0]]).T
        lam = np.linalg.solve(T, (samples - points[idx[0]]).T).T
        bary = np.column_stack([1 - lam.sum(axis=1), lam])
        inside = np.all(bary >= -1e-12, axis=1)
        out[inside] = bary[inside] @ y[idx]
    return out


def test_gkz_integrates_tent(rng):
    """sum_k z_k y_k / (d+1)! is the integral of the tent; checked by Monte Carlo."""
    X = fixture_config("hexagon")
    y = rng.standard_normal(6)
    tri = induced_subdivision(X, y)
    exact = gkz_vector(X, tri) @ y / math.factorial(3)
    m = 1_000_000
    pts = rng.uniform(0, 2, size=(m, 2))
    vals = piecewise_linear(X.points, y, tri, pts)
    vals = np.where(np.isfinite(vals), vals, 0.0) * 4.0
    assert abs(vals.mean() - exact) <= 4 * vals.std() / math.sqrt(m)
    # spot check against the library's own evaluator
    for p in pts[:20]:
        v = tent_value(X, y, p)
        assert (v == -math.inf and not np.isfinite(piecewise_linear(X.points, y, tri, p[None])[0])) or \
            v == pytest.approx(piecewise_linear(X.points, y, tri, p[None])[0])


def test_secondary_cone_contains():
    fan1 = Triangulation(((1, 2, 3), (1, 3, 4)))
    fan2 = Triangulation(((1, 2, 4), (2, 3, 4)))
    assert secondary_cone_contains(SQUARE, fan1, np.zeros(4))
    assert secondary_cone_contains(SQUARE, fan2, np.zeros(4))
    assert secondary_cone_contains(SQUARE, fan1, [1, 0, 1, 0])
    assert not secondary_cone_contains(SQUARE, fan2, [1, 0, 1, 0])
