import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from cevmlab.estimators import (
    LowCountWarning,
    HrvSpec,
    ScaledTailEstimator,
    branch_conditional_hrv_estimate,
    cev_rect_estimate,
    count_in_set,
    default_t,
    estimate_model,
    flag_atoms,
    hrv_estimate,
    joint_quadrant_estimate,
    localized_cev_estimate,
    make_estimate,
    marginal_estimate,
    model_view,
    mevt_survival_estimate,
    standardized_estimate,
)
from cevmlab.norming import quadruple
from cevmlab.scenarios import get_scenario, scenario_ids

T = lambda t: np.asarray(t, dtype=float)  # noqa: E731
Q_STD = quadruple(T, 0.0, T, 0.0, standard_y=True)


@pytest.fixture(scope="module")
def pareto_pair():
    rng = np.random.default_rng(0)
    return 1.0 / (1.0 - rng.random((200_000, 2)))


@pytest.fixture(scope="module")
def s1_sample():
    return get_scenario("S1").sample(99, 400_000)


def test_make_estimate_fields():
    e = make_estimate(25, 1000, 10.0, 10.0, "rect")
    assert e.value == 10.0 * 25 / 1000
    assert_allclose(e.std_error, 10.0 * math.sqrt(0.025 * 0.975 / 1000))
    assert e.low_count and "low_count" in e.to_json()["flags"]
    with pytest.raises(ValueError):
        make_estimate(0, 0, 1.0, 1.0, "rect")


def test_scaling_identity(s1_sample):
    q = get_scenario("S1").model("cev_xy").quadruple
    for t, x, y in [(100.0, 1.5, 0.0), (1000.0, 2.0, 1.0), (37.0, 0.5, 3.0)]:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", LowCountWarning)
            e = cev_rect_estimate(s1_sample, q, t, x, y)
        c = count_in_set(s1_sample, q, t, "rect", x, y)
        assert e.raw_count == c and e.n == len(s1_sample)
        assert e.value == t * c / e.n
        assert math.isclose(e.value * e.n, t * c, rel_tol=1e-15)


def test_minus_infinity_rectangle_is_empty(s1_sample):
    q = get_scenario("S1").model("cev_xy").quadruple
    with pytest.warns(LowCountWarning):
        e = cev_rect_estimate(s1_sample, q, 100.0, -math.inf, 0.0)
    assert e.value == 0.0 and e.raw_count == 0


def test_survival_at_upper_corner_is_empty(pareto_pair):
    with pytest.warns(LowCountWarning):
        e = mevt_survival_estimate(pareto_pair, Q_STD, 100.0, math.inf, math.inf)
    assert e.value == 0.0


def test_independent_pareto_quadrant_small(pareto_pair):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LowCountWarning)
        e = joint_quadrant_estimate(pareto_pair, Q_STD, 100.0, 1.0, 1.0)
    # t P{X > t, Y > t} = 1/t
    assert e.within(0.01, 4.0, floor=1e-3)


def test_hrv_estimate(pareto_pair):
    spec = HrvSpec(lambda t: t * t, "t^2")
    assert spec.is_hidden_scaling()
    assert not HrvSpec(lambda t: 2.0 * t).is_hidden_scaling()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LowCountWarning)
        e = hrv_estimate(pareto_pair, spec, 10.0, 1.0, 1.0)
        assert e.within(1.0, 4.0)
        assert hrv_estimate(pareto_pair, spec, 10.0, math.inf, 1.0).value == 0.0
    with pytest.raises(ValueError):
        hrv_estimate(pareto_pair, spec, 10.0, 0.0, 1.0)


def test_standardized_estimate_side(pareto_pair):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LowCountWarning)
        r = standardized_estimate(pareto_pair, np.asarray, 50.0, 1.0, 1.0)
        qd = standardized_estimate(pareto_pair, np.asarray, 50.0, 1.0, 1.0, side="quadrant")
        tail = marginal_estimate(pareto_pair, Q_STD, 50.0, 1.0)
    assert r.raw_count + qd.raw_count == tail.raw_count
    with pytest.raises(ValueError):
        standardized_estimate(pareto_pair, np.asarray, 50.0, 1.0, 1.0, side="both")
    with pytest.raises(ValueError):
        standardized_estimate(pareto_pair, lambda x: np.full_like(x, np.nan), 50.0, 1.0, 1.0)


def test_localized_empty_neighborhood(s1_sample):
    q = get_scenario("S9").model("cev_xy:local1").quadruple
    e = localized_cev_estimate(s1_sample, q, (1.0, 1.0), 100.0, 0.0, 0.0)
    assert e.value == 0.0 and "empty_neighborhood" in e.flags


def test_flag_atoms():
    e = make_estimate(100, 1000, 1.0, 1.0, "rect")
    assert "on_atom" in flag_atoms(e, 1.0, [1.0, 2.0]).flags
    assert "on_atom" not in flag_atoms(e, 1.5, [1.0, 2.0]).flags


def test_default_t():
    assert default_t(4_000_000) == 1000.0
    assert default_t(10 ** 12) == 1e4


def test_sample_validation():
    with pytest.raises(ValueError):
        cev_rect_estimate(np.ones((10, 3)), Q_STD, 10.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        cev_rect_estimate(np.array([[1.0, np.nan]]), Q_STD, 10.0, 1.0, 1.0)


def test_branch_conditional_requires_branches():
    with pytest.raises(ValueError):
        branch_conditional_hrv_estimate(get_scenario("S1"), 1, 1000, 1.0, 10.0, 1.0, 1.0)
    e = branch_conditional_hrv_estimate(get_scenario("S8"), 1, 30_000, 100.0 ** 2, 100.0, 1.0, 1.0)
    assert "branch_conditional" in e.flags and e.n == 30_000


# --------------------------------------------------------------------------
# sklearn wrapper


@pytest.mark.filterwarnings("ignore::cevmlab.estimators.LowCountWarning")
def test_sklearn_wrapper_matches_functional_api(s1_sample):
    q = get_scenario("S1").model("cev_xy").quadruple
    est = ScaledTailEstimator(quadruple=q, t=100.0, functional="rect")
    params = est.get_params()
    assert params["t"] == 100.0 and params["functional"] == "rect"
    with pytest.raises(NotFittedError):
        est.predict([[1.5, 0.0]])
    fitted = clone(est).fit(s1_sample)
    pts = np.array([[1.5, 0.0], [2.0, 1.0], [0.5, 3.0]])
    got = fitted.predict(pts)
    want = [cev_rect_estimate(s1_sample, q, 100.0, x, y).value for x, y in pts]
    assert_allclose(got, want, rtol=0, atol=0)
    assert fitted.predict_std(pts).shape == (3,)
    assert fitted.set_params(t=10.0).t == 10.0


def test_sklearn_wrapper_rejects_bad_params(s1_sample):
    with pytest.raises(ValueError):
        ScaledTailEstimator(functional="box").fit(s1_sample)
    with pytest.raises(ValueError):
        ScaledTailEstimator(t=-1.0).fit(s1_sample)


# --------------------------------------------------------------------------
# counting identities (exact)

SAMPLE = get_scenario("S5").sample(7, 50_000)
Q5 = get_scenario("S5").model("mevt").quadruple
coord = st.floats(-2.0, 4.0, allow_nan=False)


@settings(max_examples=150, deadline=None)
@given(x=coord, y=coord, dx=st.floats(0, 2), dy=st.floats(0, 2), t=st.sampled_from([10.0, 100.0, 1000.0]))
def test_count_monotone_in_set(x, y, dx, dy, t):
    small = count_in_set(SAMPLE, Q5, t, "rect", x, y + dy)
    big = count_in_set(SAMPLE, Q5, t, "rect", x + dx, y)
    assert big >= small
    assert count_in_set(SAMPLE, Q5, t, "quadrant", x, y) >= count_in_set(SAMPLE, Q5, t, "quadrant", x + dx, y + dy)


@settings(max_examples=150, deadline=None)
@given(x=coord, y=coord, t=st.sampled_from([10.0, 100.0, 1000.0]))
def test_count_inclusion_exclusion(x, y, t):
    c = lambda f, a, b: count_in_set(SAMPLE, Q5, t, f, a, b)  # noqa: E731
    assert c("survival", x, y) + c("quadrant", x, y) == c("x_tail", x, -math.inf) + c("y_tail", math.inf, y)
    assert c("rect", x, y) + c("quadrant", x, y) == c("y_tail", math.inf, y)


# --------------------------------------------------------------------------
# oracle consistency against every analytic limit

GRID = (-1.5, -0.5, 0.0, 0.5, 1.0, 3.0)


@pytest.mark.filterwarnings("ignore::cevmlab.estimators.LowCountWarning")
@pytest.mark.parametrize("sid", scenario_ids())
def test_oracle_consistency(sid):
    sc = get_scenario(sid)
    s = sc.sample(2024, 4_000_000)
    checked = 0
    for tag, m in sc.models.items():
        if m.measure is None or m.kind == "hrv":
            continue
        view = model_view(s, m)
        xs = m.measure.x_support
        for x in GRID:
            # points on the lower x boundary carry boundary mass and are not continuity sets
            if not xs.lower < x < xs.upper:
                continue
            for y in GRID:
                try:
                    lim = m.limit_value("rect", x, y)
                except Exception:
                    continue
                if lim is None:
                    continue
                e = estimate_model(view, m, "rect", min(1e3, m.mc_t), x, y)
                assert e.within(lim, 4.0, floor=1e-12), (tag, x, y, e.value, e.std_error, lim)
                checked += 1
    assert checked > 0
