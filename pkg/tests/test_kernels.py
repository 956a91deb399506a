"""Divided differences of exp: both backends against an mpmath oracle."""

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tentmle import kernels
from tentmle import _pykernels


def dd_oracle(nodes, dps=60):
    """exp[z_0..z_m] by the divided-difference recurrence at ``dps`` digits."""
    with mpmath.workdps(dps):
        z = [mpmath.mpf(float(v)) for v in nodes]
        # recursive table in high precision; equal nodes use the confluent limit
        z.sort()
        m = len(z)
        table = {}

        def f(i, j):
            if (i, j) in table:
                return table[(i, j)]
            if z[j] == z[i]:
                val = mpmath.exp(z[i]) / mpmath.factorial(j - i)
            else:
                val = (f(i + 1, j) - f(i, j - 1)) / (z[j] - z[i])
            table[(i, j)] = val
            return val

        return float(f(0, m - 1))


def test_backends_listed():
    assert "python" in kernels.backends()
    assert kernels.BACKEND in kernels.backends()


@pytest.mark.parametrize("nodes, expected", [
    ([0.0], 1.0),
    ([0.0, 0.0], 1.0),
    ([0.0, 0.0, 0.0], 0.5),
    ([0.0, 1.0], math.e - 1.0),
    ([2.0, 2.0, 2.0, 2.0], math.exp(2.0) / 6.0),
])
def test_dd_exp_closed_values(backend, nodes, expected):
    assert kernels.dd_exp(nodes) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("nodes", [
    [0.0, 1e-9, 2e-9],
    [0.0, 1.0, 3.0],
    [-5.0, -4.999, 3.0, 3.0001],
    [-30.0, 0.0, 0.5, 20.0],
    [1.0, 1.0, 1.0, 2.0, 2.0],
    [-700.0, -699.5, -1.0],
])
def test_dd_exp_matches_oracle(backend, nodes):
    assert kernels.dd_exp(nodes) == pytest.approx(dd_oracle(nodes), rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(-40000, 40000).map(lambda k: k / 1000.0), min_size=1, max_size=6))
def test_dd_exp_random_against_oracle(nodes):
    for mod in kernels.backends().values():
        assert mod.dd_exp(nodes) == pytest.approx(dd_oracle(nodes), rel=1e-11, abs=1e-300)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=2, max_size=5), st.permutations(range(5)))
def test_dd_exp_symmetric(nodes, perm):
    perm = [p for p in perm if p < len(nodes)]
    shuffled = [nodes[p] for p in perm]
    assert kernels.dd_exp(shuffled) == pytest.approx(kernels.dd_exp(nodes), rel=1e-13)


def test_backends_agree_on_batches(rng):
    found = kernels.backends()
    z = rng.normal(scale=3.0, size=(200, 4))
    z[::3] = z[::3, :1] + 1e-6 * rng.standard_normal((len(z[::3]), 4))
    ref_v = _pykernels.simplex_values(z)
    ref = _pykernels.simplex_derivatives(z, True)
    for mod in found.values():
        np.testing.assert_allclose(mod.simplex_values(z), ref_v, rtol=1e-13)
        got = mod.simplex_derivatives(z, True)
        for a, b in zip(got, ref):
            np.testing.assert_allclose(a, b, rtol=1e-12)


def test_simplex_derivatives_are_derivatives(backend, rng):
    z = rng.normal(size=(5, 3))
    val, grad, hess = kernels.simplex_derivatives(z, True)
    h = 1e-5
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        fd = (kernels.simplex_values(z + e) - kernels.simplex_values(z - e)) / (2 * h)
        np.testing.assert_allclose(grad[:, i], fd, rtol=1e-7)
        fd2 = (kernels.simplex_derivatives(z + e, False)[1] - kernels.simplex_derivatives(z - e, False)[1]) / (2 * h)
        np.testing.assert_allclose(hess[:, i, :], fd2, rtol=1e-6)
    val2, grad2, hess2 = kernels.simplex_derivatives(z, False)
    assert hess2 is None
    np.testing.assert_array_equal(val, val2)


def test_too_many_nodes_rejected(backend):
    with pytest.raises(ValueError):
        kernels.dd_exp(np.zeros(_pykernels.MAXNODES + 1))
