import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from cevmlab.margins import (
    DomainError,
    gev_tail,
    inverse_marginal_transform,
    marginal_transform,
    pareto_standardize,
    support_interval,
)


@pytest.mark.parametrize("gamma, lo, hi", [(0.0, -math.inf, math.inf), (1.0, -1.0, math.inf),
                                           (-1.0, -math.inf, 1.0), (0.5, -2.0, math.inf)])
def test_support_interval(gamma, lo, hi):
    s = support_interval(gamma)
    assert (s.lower, s.upper) == (lo, hi)
    assert s.lower < s.upper


@pytest.mark.parametrize("gamma, x, expected", [(1.0, 0.0, 1.0), (0.0, 0.0, 1.0), (1.0, 1.0, 0.5), (-1.0, 0.5, 0.5)])
def test_gev_tail_values(gamma, x, expected):
    assert_allclose(gev_tail(gamma, x), expected, rtol=1e-15)


@pytest.mark.parametrize("gamma, x", [(1.0, -1.0), (1.0, -2.0), (-1.0, 1.0), (-0.5, 3.0)])
def test_gev_tail_outside_support(gamma, x):
    with pytest.raises(DomainError):
        gev_tail(gamma, x)


@pytest.mark.parametrize("gamma, x, expected", [(0.0, math.e, 1.0), (1.0, 2.0, 1.0), (-1.0, 2.0, 0.5)])
def test_marginal_transform_values(gamma, x, expected):
    assert_allclose(marginal_transform(gamma, x), expected, rtol=1e-15)


@pytest.mark.parametrize("x", [0.0, -1.0])
def test_marginal_transform_rejects_nonpositive(x):
    with pytest.raises(DomainError):
        marginal_transform(1.0, x)


@pytest.mark.parametrize("p, expected", [(0.0, 1.0), (0.5, 2.0), (0.99, 100.0)])
def test_pareto_standardize(p, expected):
    assert_allclose(pareto_standardize(p), expected, rtol=1e-13)


def test_pareto_standardize_upper_atom():
    with pytest.raises(DomainError):
        pareto_standardize(1.0)


def test_gev_tail_decreasing_on_grids():
    for gamma in np.linspace(-2, 2, 21):
        s = support_interval(gamma)
        lo = max(s.lower, -5.0)
        hi = min(s.upper, 5.0)
        x = np.linspace(lo, hi, 202)[1:-1]
        v = gev_tail(gamma, x)
        assert np.all(np.diff(v) < 0)
        assert gev_tail(gamma, 0.0) == 1.0


def test_gev_tail_continuous_in_gamma():
    x = np.linspace(-3, 3, 61)
    assert np.max(np.abs(gev_tail(1e-8, x) - np.exp(-x))) < 1e-6


def test_vectorized_shapes():
    x = np.array([[0.0, 1.0], [2.0, 3.0]])
    assert gev_tail(1.0, x).shape == (2, 2)
    assert np.isscalar(gev_tail(1.0, 0.5)) or np.ndim(gev_tail(1.0, 0.5)) == 0


@settings(max_examples=300, deadline=None)
@given(gamma=st.floats(-2, 2), x=st.floats(0.05, 50.0))
# 1 + gamma u = x^gamma loses digits as x^gamma -> 0; the grid keeps |log x| moderate
def test_marginal_round_trip(gamma, x):
    u = marginal_transform(gamma, x)
    assert_allclose(inverse_marginal_transform(gamma, u), x, rtol=1e-12)


@settings(max_examples=200, deadline=None)
@given(gamma=st.floats(-2, 2), u=st.floats(0.0, 1.0))
def test_tail_of_transform_is_reciprocal(gamma, u):
    # G_gamma tail at the transform of x equals 1/x
    x = 1.0 + 99.0 * u
    assert_allclose(gev_tail(gamma, marginal_transform(gamma, x)), 1.0 / x, rtol=1e-12)
