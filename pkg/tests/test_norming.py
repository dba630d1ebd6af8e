import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from cevmlab.norming import check_equivalence, profile_regular_variation, quadruple

T = lambda t: np.asarray(t, dtype=float)  # noqa: E731


def test_profile_identity_scale():
    p = profile_regular_variation(quadruple(T, 0.0))
    assert p.regular
    assert_allclose([p.rho, p.c_shift], [1.0, 0.0], atol=1e-12)


def test_profile_power():
    p = profile_regular_variation(quadruple(lambda t: T(t) ** 0.3, 0.0))
    assert_allclose(p.rho, 0.3, atol=1e-12)


def test_profile_log_shift():
    p = profile_regular_variation(quadruple(1.0, np.log))
    assert p.regular
    assert_allclose(p.rho, 0.0, atol=1e-12)
    assert_allclose(p.c_shift, 1.0, rtol=1e-12)


@pytest.mark.parametrize("rho0", [-1.0, -0.5, 0.0, 0.5, 1.0, 2.0])
def test_profile_recovers_rho(rho0):
    p = profile_regular_variation(quadruple(lambda t: T(t) ** rho0, 0.0), t_grid=10.0 ** np.arange(2, 11))
    assert p.regular
    assert abs(p.rho - rho0) < 1e-6


@settings(max_examples=60, deadline=None)
@given(rho0=st.floats(-3, 3), lam=st.sampled_from([0.5, 2.0, 3.0, math.e]))
def test_profile_recovers_rho_property(rho0, lam):
    p = profile_regular_variation(quadruple(lambda t: 5.0 * T(t) ** rho0, 0.0), lambdas=(lam,))
    assert p.regular and abs(p.rho - rho0) < 1e-6


def test_profile_flags_oscillating_scale():
    q = quadruple(lambda t: T(t) * (2.0 + np.sin(np.log(T(t)))), 0.0)
    p = profile_regular_variation(q, lambdas=(math.exp(math.pi),))
    assert not p.regular
    assert math.isnan(p.rho)
    assert "lambda" in p.reason
    assert len(p.evidence) > 0


def test_profile_rejects_bad_grid():
    with pytest.raises(ValueError):
        profile_regular_variation(quadruple(T, 0.0), t_grid=[10.0, 1.0])


def test_equivalence_identity():
    q = quadruple(T, T)
    e = check_equivalence(q, q)
    assert e.verdict == "equivalent"
    assert_allclose([e.A, e.B, e.C_pair, e.D], [1.0, 0.0, 1.0, 0.0], atol=1e-14)


def test_equivalence_constant_ratios():
    e = check_equivalence(quadruple(lambda t: 2 * T(t), T), quadruple(T, 0.0))
    assert e.verdict == "equivalent"
    assert_allclose([e.A, e.B], [2.0, 1.0], rtol=1e-14)


def test_equivalence_psi_shift():
    psi = lambda t: np.log(T(t)) + np.sin(np.log(np.log(T(t))))  # noqa: E731
    e = check_equivalence(quadruple(1.0, np.log), quadruple(1.0, psi), t_grid=np.exp(np.exp(np.linspace(1, 6, 24))))
    assert e.verdict == "not_equivalent"


@settings(max_examples=40, deadline=None)
@given(a=st.floats(0.1, 10), b=st.floats(-5, 5))
def test_equivalence_symmetry(a, b):
    q1 = quadruple(lambda t: a * T(t), lambda t: b * T(t))
    q2 = quadruple(T, 0.0)
    e12, e21 = check_equivalence(q1, q2), check_equivalence(q2, q1)
    assert e12.verdict == e21.verdict == "equivalent"
    assert_allclose([e21.A, e21.B], [1.0 / e12.A, -e12.B / e12.A], rtol=1e-12, atol=1e-12)


def test_quadruple_validate():
    q = quadruple(T, 0.0)
    q.validate([1.0, 10.0])
    with pytest.raises(ValueError):
        quadruple(lambda t: -T(t), 0.0).validate([1.0, 10.0])
