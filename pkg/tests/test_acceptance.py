"""Acceptance suite: one test per criterion, at the stated tolerances.

Run with ``pytest tests/test_acceptance.py`` (a pass/fail line per
criterion is printed at the end) or directly as a script.
"""

import math
import sys

import numpy as np
import pytest

from oracles import central_difference, mc_simplex_exp
from polygon_oracle import cells_of, code, noncrossing_sets
from tentmle.duality import realize_subdivision, weights_from_heights, weights_kernel
from tentmle.experiments import (
    HEXAGON,
    alpha_heights_check,
    apex_triangulation,
    d_plus_2_check,
    d_plus_3_construction,
    stratum_frequency_experiment,
    table1_experiment,
)
from tentmle.fixtures import fixture_config
from tentmle.geometry import (
    PointConfiguration,
    Subdivision,
    enumerate_regular_triangulations,
    gkz_vector,
    induced_subdivision,
    is_relevant,
    normalized_volume,
)
from tentmle.hfunc import (
    TAU_H,
    h_closed,
    h_eval,
    h_partial,
    h_partial_confluent,
    h_quadrature,
    h_series,
    separation,
)
from tentmle.quadrature import exp_integral_simplex, normalize_heights, total_mass, uniform_height
from tentmle.solver import SolverOptions, gradient, objective, solve_mle

pytestmark = pytest.mark.acceptance

def gen(tag: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([2024, tag])))


def test_criterion_01_h_triple_consistency():
    rng = gen(1)
    for d in (1, 2, 3, 4):
        checked = 0
        for _ in range(1000):
            u = rng.uniform(-5, 5, size=d)
            if separation(u) > TAU_H:
                closed, series = h_closed(u), h_series(u)
                assert abs(closed - series) <= 1e-9 * abs(series)
                checked += 1
            if d <= 3:
                assert abs(h_eval(u) - h_quadrature(u)) <= 1e-7
        assert checked > 0


def test_criterion_02_h_reference_values():
    for d in range(1, 7):
        assert abs(h_eval(np.zeros(d)) - 1 / math.factorial(d + 1)) <= 1e-14
    # Taylor coefficients of t -> H(t) and t -> H(t, 0), read off a Chebyshev fit near 0
    t = np.cos(np.pi * (np.arange(200) + 0.5) / 200)
    for d, coeffs in ((1, (1 / 2, 1 / 6, 1 / 24)), (2, (1 / 6, 1 / 24, 1 / 120))):
        values = [h_eval(np.r_[s, np.zeros(d - 1)]) for s in t]
        taylor = np.polynomial.Chebyshev.fit(t, values, 18, domain=[-1, 1]).convert(kind=np.polynomial.Polynomial).coef
        np.testing.assert_allclose(taylor[:3], coeffs, rtol=0, atol=1e-12)


def test_criterion_03_partials_identity():
    rng = gen(3)
    for k in range(1000):
        d = 1 + k % 4
        x = rng.uniform(-5, 5, size=d)
        # dH/dx_1 independently, as the confluent divided difference with x_1 repeated
        dh = h_partial_confluent(x, 0)
        rhs = math.exp(x[0]) * h_eval(np.r_[-x[0], x[1:] - x[0]]) - h_eval(x)
        scale = max(1.0, abs(h_eval(x)))
        assert abs(x[0] * dh - rhs) <= 1e-8 * scale
        assert abs(h_partial(x, 0) - dh) <= 1e-8 * max(1.0, abs(dh))


def test_criterion_04_simplex_integral():
    rng = gen(4)
    for d in (1, 2, 3):
        simplex = tuple(range(1, d + 2))
        for _ in range(100):
            pts = rng.standard_normal((d + 1, d))
            y = rng.standard_normal(d + 1)
            config = PointConfiguration(pts)
            exact = exp_integral_simplex(config, simplex, y)
            est, se = mc_simplex_exp(pts, y, 1_000_000, rng)
            assert abs(exact - est) <= 4 * se
            c = float(y[0])
            const = exp_integral_simplex(config, simplex, np.full(d + 1, c))
            assert abs(const - math.exp(c) * normalized_volume(config, simplex) / math.factorial(d)) <= 1e-12 * const


def test_criterion_05_gradient_check():
    rng = gen(5)
    worst = 0.0
    for k in range(100):
        d = 1 + k % 3
        n = int(rng.integers(d + 2, 8))
        config = PointConfiguration(rng.standard_normal((n, d)))
        w = rng.dirichlet(np.ones(n))
        y = rng.standard_normal(n)
        tri = induced_subdivision(config, y)
        assert tri.is_triangulation(d)
        g = gradient(config, w, y, tri)
        fd = central_difference(lambda v: objective(config, w, v), y)
        worst = max(worst, float(np.max(np.abs(g - fd))))
    assert worst <= 1e-5


def test_criterion_06_six_points():
    X = fixture_config("six_points")
    res = solve_mle(X, np.full(6, 1 / 6))
    assert res.converged
    assert len(res.subdivision) == 7 and res.subdivision.is_triangulation(2)
    assert res.subdivision.vertices() == set(range(1, 7))
    assert abs(total_mass(X, res.heights).total_mass - 1.0) <= 1e-6


def test_criterion_07_five_points():
    res = solve_mle(fixture_config("five_points"), np.full(5, 0.2))
    assert res.subdivision == Subdivision(((1, 2, 4), (2, 4, 5), (2, 3, 5), (1, 3, 4, 5)))


def test_criterion_08_round_trip():
    rng = gen(8)
    ok = 0
    for k in range(50):
        d = 1 + k % 3
        while True:
            n = int(rng.integers(d + 2, 9))
            pts = rng.standard_normal((n, d))
            config = PointConfiguration(pts)
            y = -0.5 * (pts ** 2).sum(axis=1) + 0.05 * rng.standard_normal(n)
            y = normalize_heights(config, y)
            tri = induced_subdivision(config, y)
            if is_relevant(config, y) and tri.is_triangulation(d):
                break
        w = weights_from_heights(config, y, tri)
        assert abs(w.sum() - 1.0) <= 1e-9
        res = solve_mle(config, w / w.sum())
        if np.max(np.abs(res.heights - y)) <= 1e-4 and res.subdivision == tri:
            ok += 1
    assert ok == 50


def test_criterion_09_constant_heights_gkz():
    for name in ("hexagon", "octahedron"):
        X = fixture_config(name)
        y = np.full(X.n, uniform_height(X))
        ratios = []
        for t in enumerate_regular_triangulations(X):
            z = gkz_vector(X, t)
            ratios.extend(weights_kernel(X, y, t) / z)
        ratios = np.array(ratios)
        assert np.ptp(ratios) <= 1e-10 * ratios.mean()
        assert ratios.mean() == pytest.approx(math.exp(y[0]) / math.factorial(X.d + 1), rel=1e-10)


def test_criterion_10_realize_all_hexagon_subdivisions():
    X = PointConfiguration(HEXAGON)
    faces = noncrossing_sets(6)
    assert len(faces) == 45
    triangulations = 0
    for face in faces:
        target = Subdivision(cells_of(6, face))
        w = realize_subdivision(X, target, seed=len(face))
        assert solve_mle(X, w).subdivision == target, code(face)
        triangulations += target.is_triangulation(2)
    assert triangulations == 14


def test_criterion_11_d_plus_2_points():
    for d in (2, 3):
        rep = d_plus_2_check(d, 200, seed=11)
        assert rep.discarded == 0 and rep.trivial == 200, rep.counterexamples
    rep = d_plus_2_check(1, 200, seed=11, n=4)
    assert rep.discarded == 0 and rep.trivial == 200, rep.counterexamples


def test_criterion_12_threshold_construction():
    con = d_plus_3_construction(2, 2.0)
    assert solve_mle(con.config, con.weights).subdivision == apex_triangulation(2)
    con = d_plus_3_construction(2, 1.1)
    assert solve_mle(con.config, con.weights).subdivision != apex_triangulation(2)
    for d, alpha in ((2, 0.5), (3, 1.0)):
        rep = alpha_heights_check(d, alpha)
        assert rep.converged and rep.gap_error <= 1e-4 and rep.base_spread <= 1e-4


REFERENCE_ROW_ONE = {"35": 5.95, "46": 5.85, "24": 5.84, "15": 5.83, "13": 5.75, "26": 5.70}


def test_criterion_13_hexagon_frequencies():
    rep = stratum_frequency_experiment(PointConfiguration(HEXAGON), 20_000, seed=7)
    assert rep.discarded == 0
    assert abs(rep.percentage("∅") - 30.5) <= 1.5
    for key, expected in REFERENCE_ROW_ONE.items():
        assert abs(rep.percentage(key) - expected) <= 1.0, key
    faces = {code(f) for f in noncrossing_sets(6)}
    assert {k for k, _, _ in rep.entries} <= faces


def test_criterion_14_table_one_shares():
    _, gauss = table1_experiment("gaussian", 2000, seed=1)
    _, circ = table1_experiment("circular:0.1", 2000, seed=1)
    assert abs(100 * gauss.trivial_share() - 97.3) <= 2.0
    hexagon_share = circ.share(lambda profile, hull: profile == (0, 0, 0, 1))
    assert abs(100 * hexagon_share - 49.6) <= 3.0
    assert gauss.mean_cells() > circ.mean_cells()


def test_criterion_15_enumeration_fixtures():
    assert len(enumerate_regular_triangulations(fixture_config("hexagon"))) == 14
    assert len(enumerate_regular_triangulations(fixture_config("octahedron"))) == 3
    assert len(enumerate_regular_triangulations(fixture_config("square"))) == 2
    quad = PointConfiguration([[0, 0], [2, 0], [3, 2], [0, 1]])
    assert len(enumerate_regular_triangulations(quad)) == 2


def test_criterion_16_solver_uniqueness():
    rng = gen(16)
    worst = 0.0
    for k in range(20):
        d = 1 + k % 3
        n = int(rng.integers(d + 2, 9))
        config = PointConfiguration(rng.standard_normal((n, d)))
        w = rng.dirichlet(np.ones(n))
        sols = []
        for r in range(10):
            res = solve_mle(config, w, SolverOptions(seed=r, perturbation=1.0))
            assert res.converged
            sols.append(res.heights)
        sols = np.array(sols)
        worst = max(worst, float(np.max(np.ptp(sols, axis=0))))
    assert worst <= 1e-4


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", *sys.argv[1:]]))
