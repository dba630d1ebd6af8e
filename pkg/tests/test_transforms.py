import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from cevmlab.margins import Interval, support_interval
from cevmlab.measures import INF, LimitMeasure, ProductComponent, YTail
from cevmlab.norming import quadruple
from cevmlab.scenarios import get_scenario
from cevmlab.transforms import (
    ConsistencyError,
    LostMassWarning,
    PreconditionError,
    alpha_inverse,
    atomic_mix,
    cev_pair_from_mevt,
    evaluate_relation,
    gumbel_diagonal,
    mevt_from_cev_pair,
    minus_infinity_line,
    overlap_consistency,
    plan_standardization,
    product_plus_diagonal,
    pushforward_standardized,
)

lin = lambda t: np.asarray(t, dtype=float)  # noqa: E731
zero = lambda t: 0.0 * np.asarray(t, dtype=float)  # noqa: E731


# --------------------------------------------------------------------------
# alpha inverse and plans


@pytest.mark.parametrize("alpha,inv", [
    (lambda t: t, lambda s: s),
    (lambda t: t ** 2, math.sqrt),
    (lambda t: 1.0 / t, lambda s: 1.0 / s),
    (lambda t: t ** -0.5, lambda s: s ** -2),
])
@pytest.mark.parametrize("s", [1e-6, 0.3, 1.0, 7.0, 1e5])
def test_alpha_inverse_power(alpha, inv, s):
    assert_allclose(alpha_inverse(alpha)(s), inv(s), rtol=1e-12)


def test_alpha_inverse_rejects_nonpositive():
    from cevmlab.margins import DomainError

    with pytest.raises(DomainError):
        alpha_inverse(lambda t: t)(0.0)


def test_case_i_identity_on_diagonal():
    q = quadruple(lin, zero, lin, zero, gamma_y=1.0, standard_y=True)
    plan = plan_standardization(q, None)
    assert plan.case == "case_i"
    assert_allclose(plan.rho, 1.0, atol=1e-9)
    xs = np.linspace(1.0, 1e3, 50)
    assert_allclose(plan.f(xs), xs, rtol=1e-12)
    assert_allclose(plan.f(np.array([0.0, -2.0])), [0.5, 0.25])
    assert plan.phi(-1.0) == 0.0 and plan.phi(4.0) == 4.0


def test_case_i_f_monotone_and_positive():
    q = quadruple(lambda t: lin(t) ** 2, zero, lin, zero, gamma_y=1.0, standard_y=True)
    plan = plan_standardization(q, None)
    xs = np.linspace(-50.0, 1e4, 10_000)
    f = plan.f(xs)
    assert np.all(f > 0) and np.all(np.diff(f) > 0)
    assert_allclose(plan.pushforward_exponent, 0.5, rtol=1e-9)


def test_s3_fine_is_case_ii_left_with_registered_f():
    sc = get_scenario("S3")
    plan = plan_standardization(sc.model("cev_xy:fine").quadruple, sc.x_range)
    assert plan.case == "case_ii_left" and plan.beta0 == 1.0
    xs = np.linspace(-0.99, 0.99, 101)
    assert_allclose(plan.f(xs), sc.model("standardized").transform(xs), rtol=1e-12)


def test_s3_pushforward_matches_registered_limit():
    sc = get_scenario("S3")
    fine = sc.model("cev_xy:fine")
    plan = plan_standardization(fine.quadruple, sc.x_range, fine.measure)
    push = pushforward_standardized(fine.measure, plan)
    target = sc.model("standardized").measure
    pts = [(x, y) for x in (0.5, 1.0, 2.0, 5.0) for y in (0.25, 1.0, 3.0)]
    for x, y in pts:
        assert_allclose(push.rect_mass(x, y), target.rect_mass(x, y), atol=1e-9)
        assert_allclose(push.quadrant_mass(x, y), target.quadrant_mass(x, y), atol=1e-9)


def test_case_ii_preserves_y_slice_mass():
    sc = get_scenario("S3")
    fine = sc.model("cev_xy:fine")
    plan = plan_standardization(fine.quadruple, sc.x_range, fine.measure)
    push = pushforward_standardized(fine.measure, plan)
    for y in (0.25, 1.0, 4.0):
        assert_allclose(push.rect_mass(INF, y), fine.measure.marginal_y_tail(y), rtol=1e-12)


@pytest.mark.parametrize("sid,tag", [("S2", "cev_xy"), ("S7", "cev_xy"), ("S1", "cev_xy")])
def test_impossible_plans(sid, tag):
    sc = get_scenario(sid)
    plan = plan_standardization(sc.model(tag).quadruple, sc.x_range)
    assert plan.case == "impossible" and plan.reason
    assert not plan.feasible and plan.f is None


def test_rho_zero_excluded():
    q = quadruple(lambda t: 2.0 + 1.0 / lin(t), zero, lin, zero, gamma_y=1.0, standard_y=True)
    plan = plan_standardization(q, None)
    assert plan.case == "impossible" and "rho = 0" in plan.reason


def test_case_ii_right():
    q = quadruple(lambda t: 1.0 / lin(t), lambda t: 1.0 + zero(t), lin, zero, gamma_y=1.0, standard_y=True)
    plan = plan_standardization(q, Interval(1.0, 3.0))
    assert plan.case == "case_ii_right"
    assert_allclose(plan.f(np.array([1.5, 2.0])), [2.0, 1.0], rtol=1e-12)


def test_lost_mass_warning_and_degenerate_flag():
    q = quadruple(lin, zero, lin, zero, gamma_y=1.0, standard_y=True)
    plan = plan_standardization(q, None)
    neg = LimitMeasure((ProductComponent(atoms=((-1.0, 1.0),), tail=YTail("gev", 1.0)),),
                       y_support=support_interval(1.0), name="atom at -1")
    with pytest.warns(LostMassWarning):
        push = pushforward_standardized(neg, plan)
    assert push.degenerate and push.lost_mass > 0
    with warnings.catch_warnings():
        warnings.simplefilter("error", LostMassWarning)
        pos = LimitMeasure((ProductComponent(atoms=((1.0, 1.0),), tail=YTail("gev", 1.0)),),
                           y_support=support_interval(1.0))
        assert not pushforward_standardized(pos, plan).degenerate


# --------------------------------------------------------------------------
# CEVM pair <-> MEVT

SYNTH = [
    (gumbel_diagonal, 0.0, 0.0),
    (product_plus_diagonal, 0.0, 0.0),
    (atomic_mix, -1.0, -1.0),
    (minus_infinity_line, 0.0, 0.0),
]


def _grid(g):
    lo = g.lower if math.isfinite(g.lower) else -2.0
    return [lo + 0.1, lo + 0.7, lo + 1.5, lo + 3.0]


@pytest.mark.parametrize("build,gx,gy", SYNTH, ids=[s[0].__name__ for s in SYNTH])
def test_round_trip(build, gx, gy):
    mu = build()
    sx, sy = support_interval(gx), support_interval(gy)
    xy, yx = cev_pair_from_mevt(mu, sx, sy)
    assert overlap_consistency(xy, yx, [(x, y) for x in _grid(sx) for y in _grid(sy)]) <= 1e-12
    rec = mevt_from_cev_pair(xy, yx, sx, sy)
    for x in _grid(sx):
        for y in _grid(sy):
            assert_allclose(rec.quadrant_mass(x, y), mu.quadrant_mass(x, y), atol=1e-12)
            assert_allclose(rec.rect_mass(x, y), mu.rect_mass(x, y), atol=1e-12)
            assert_allclose(rec.lower_band_mass(x, y), mu.marginal_x_tail(x) - mu.quadrant_mass(x, y), atol=1e-12)


def test_ii_star_flags():
    sx = sy = support_interval(0.0)
    xy, _ = cev_pair_from_mevt(gumbel_diagonal(), sx, sy)
    assert xy.satisfies_ii_star()
    xy, yx = cev_pair_from_mevt(minus_infinity_line(), sx, sy)
    assert not xy.satisfies_ii_star()
    rec = mevt_from_cev_pair(xy, yx, sx, sy)
    mx, _ = rec.boundary_masses()
    assert mx > 0


def test_positive_index_rejected():
    with pytest.raises(PreconditionError):
        cev_pair_from_mevt(gumbel_diagonal(), support_interval(0.5), support_interval(0.0))
    with pytest.raises(PreconditionError):
        mevt_from_cev_pair(gumbel_diagonal(), gumbel_diagonal(), support_interval(0.0), support_interval(1.0))


def test_degenerate_rejected():
    empty = LimitMeasure((), x_support=support_interval(0.0), y_support=support_interval(0.0))
    with pytest.raises(PreconditionError):
        cev_pair_from_mevt(empty, support_interval(0.0), support_interval(0.0))


def test_s6_pair_is_inconsistent():
    sc = get_scenario("S6")
    xy, yx = sc.model("cev_xy").measure, sc.model("cev_yx").measure
    with pytest.raises(ConsistencyError):
        mevt_from_cev_pair(xy, yx, support_interval(0.0), support_interval(0.0))


@pytest.mark.parametrize("sid", ["S1", "S6", "S7"])
def test_declared_relations(sid):
    sc = get_scenario(sid)
    assert sc.relations
    for rel in sc.relations:
        out = evaluate_relation(sc, rel)
        assert out["passed"], out


@settings(max_examples=100, deadline=None)
@given(x=st.floats(-1.0, 3.0), y=st.floats(-1.0, 3.0))
def test_overlap_of_self_swap_is_zero(x, y):
    mu = product_plus_diagonal()
    sx = support_interval(0.0)
    xy, yx = cev_pair_from_mevt(mu, sx, sx)
    assert overlap_consistency(xy, yx, [(x, y)]) == pytest.approx(0.0, abs=1e-12)
