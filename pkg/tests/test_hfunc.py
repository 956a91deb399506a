"""The symmetric function H: closed form, series, quadrature and partials."""

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tentmle.errors import NearSingular
from tentmle.hfunc import (
    TAU_H,
    complete_homogeneous,
    h_closed,
    h_eval,
    h_gradient,
    h_partial,
    h_quadrature,
    h_series,
)


def h_mp(u):
    """Independent oracle: the simplex integral in high precision (d <= 2)."""
    with mpmath.workdps(30):
        if len(u) == 1:
            return float(mpmath.quad(lambda t: (1 - t) * mpmath.exp(u[0] * t), [0, 1]))
        a, b = u
        inner = lambda s: mpmath.quad(lambda t: (1 - s - t) * mpmath.exp(a * s + b * t), [0, 1 - s])  # noqa: E731
        return float(mpmath.quad(inner, [0, 1]))


# -- closed form ------------------------------------------------------------

def test_closed_d1_values():
    assert h_closed([1.0]) == pytest.approx(math.e - 2.0, rel=1e-14)
    assert h_closed([-1.0]) == pytest.approx(1.0 / math.e, rel=1e-14)


def test_closed_d2_formula_of_the_worked_example():
    u, v = 1.3, -0.7
    written = 1 / (u * v) + 1 / (u * u * v) + 1 / (u * v * v) + math.exp(u) / (u * u * (u - v)) \
        + math.exp(v) / (v * v * (v - u))
    assert h_closed([u, v]) == pytest.approx(written, rel=1e-13)
    assert h_closed([1.0, -1.0]) == pytest.approx(h_series([1.0, -1.0]), rel=1e-12)


@pytest.mark.parametrize("u", [[0.0], [0.01], [1.0, 1.01], [1.0, 0.0]])
def test_closed_rejects_close_arguments(u):
    with pytest.raises(NearSingular):
        h_closed(u)


# -- series -----------------------------------------------------------------

@pytest.mark.parametrize("d", range(1, 7))
def test_value_at_zero(d):
    assert h_series(np.zeros(d)) == pytest.approx(1.0 / math.factorial(d + 1), rel=1e-14)
    assert abs(h_eval(np.zeros(d)) - 1.0 / math.factorial(d + 1)) <= 1e-14


def test_complete_homogeneous():
    assert complete_homogeneous(0, [3.0, 4.0]) == 1.0
    u, v = 1.7, -0.4
    assert complete_homogeneous(2, [u, v]) == pytest.approx(u * u + u * v + v * v, rel=1e-14)
    assert complete_homogeneous(3, [1.0, 1.0]) == 4.0


def _series_prefix(d, u):
    return [complete_homogeneous(r, u) / math.factorial(r + d + 1) for r in range(3)]


def test_series_prefix_d1():
    u = 0.3
    assert _series_prefix(1, [u]) == pytest.approx([1 / 2, u / 6, u * u / 24], rel=1e-12)
    # fourth coefficient of the displayed expansion
    assert complete_homogeneous(3, [u]) / math.factorial(5) == pytest.approx(u ** 3 / 120, rel=1e-12)


def test_series_prefix_d2():
    u, v = 0.3, -0.2
    assert _series_prefix(2, [u, v]) == pytest.approx(
        [1 / 6, (u + v) / 24, (u * u + u * v + v * v) / 120], rel=1e-12)


def test_series_small_arguments_continuous():
    assert h_eval([1e-8, 2e-8]) == pytest.approx(1 / 6, rel=1e-7)


# -- dispatcher and quadrature ----------------------------------------------

def test_eval_branches_agree_at_threshold():
    for gap in (TAU_H * 0.999, TAU_H * 1.001):
        u = np.array([0.7, 0.7 + gap, -1.2])
        assert h_eval(u) == pytest.approx(h_series(u), rel=1e-10)


@pytest.mark.parametrize("u", [[1.0], [-3.0], [2.0, -1.0], [5.0, -3.0], [0.01, 0.02]])
def test_eval_matches_mpmath_integral(u):
    assert h_eval(u) == pytest.approx(h_mp(u), rel=1e-10)


def test_quadrature_known_values():
    assert h_quadrature([1.0]) == pytest.approx(math.e - 2.0, rel=1e-12)
    for d in (1, 2, 3):
        assert h_quadrature(np.zeros(d)) == pytest.approx(1 / math.factorial(d + 1), rel=1e-13)
    assert h_quadrature([2.0, -1.0]) == pytest.approx(h_eval([2.0, -1.0]), rel=1e-8)


def test_quadrature_limited_to_three_dimensions():
    with pytest.raises(ValueError):
        h_quadrature(np.zeros(4))


def h2_mp(u, v):
    """The two-variable closed form evaluated with 50 digits."""
    with mpmath.workdps(50):
        u, v = mpmath.mpf(u), mpmath.mpf(v)
        return float(1 / (u * v) + 1 / (u * u * v) + 1 / (u * v * v) + mpmath.exp(u) / (u * u * (u - v))
                     + mpmath.exp(v) / (v * v * (v - u)))


@pytest.mark.parametrize("u", [[705.0, 704.0], [705.0, 0.5], [-800.0, -900.0]])
def test_large_arguments_do_not_overflow(u):
    assert h_eval(u) == pytest.approx(h2_mp(*u), rel=1e-10)


# -- partials ---------------------------------------------------------------

def test_partials_at_zero():
    assert h_partial([0.0], 0) == pytest.approx(1 / 6, rel=1e-13)
    for i in range(2):
        assert h_partial([0.0, 0.0], i) == pytest.approx(1 / 24, rel=1e-13)


def test_partials_match_finite_differences(rng):
    for _ in range(20):
        u = rng.uniform(-3, 3, size=3)
        for i in range(3):
            e = np.zeros(3)
            e[i] = 1e-5
            fd = (h_eval(u + e) - h_eval(u - e)) / 2e-5
            assert h_partial(u, i) == pytest.approx(fd, rel=1e-6)
        np.testing.assert_allclose(h_gradient(u), [h_partial(u, i) for i in range(3)], rtol=1e-9)


# -- properties -------------------------------------------------------------

args = st.lists(st.floats(-6, 6), min_size=1, max_size=4)


@settings(max_examples=150, deadline=None)
@given(args, st.randoms(use_true_random=False))
def test_symmetry(u, r):
    v = list(u)
    r.shuffle(v)
    assert h_eval(v) == pytest.approx(h_eval(u), rel=1e-12)


@settings(max_examples=150, deadline=None)
@given(args, st.integers(0, 3), st.floats(1e-3, 2.0))
def test_positive_and_increasing(u, i, delta):
    i %= len(u)
    v = list(u)
    v[i] += delta
    assert 0 < h_eval(u) < h_eval(v)


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 4).flatmap(lambda d: st.tuples(
    st.lists(st.floats(-6, 6), min_size=d, max_size=d), st.lists(st.floats(-6, 6), min_size=d, max_size=d))))
def test_midpoint_convexity(pair):
    u, v = map(np.asarray, pair)
    assert h_eval((u + v) / 2) <= (h_eval(u) + h_eval(v)) / 2 + 1e-12


@settings(max_examples=150, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=4))
def test_partials_positive(u):
    assert all(h_partial(u, i) > 0 for i in range(len(u)))
