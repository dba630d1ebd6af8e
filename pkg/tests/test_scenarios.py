import json
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from cevmlab.estimators import marginal_estimate
from cevmlab.margins import gev_tail
from cevmlab.norming import profile_regular_variation, quadruple
from cevmlab.scenarios import (
    BracketError,
    get_scenario,
    inverse_monotone,
    inverse_monotone_array,
    register_builtin_scenarios,
    scenario_ids,
)
from cevmlab.scenarios.hidden import required_lambda0, z2_quantile, z2_sf
from cevmlab.scenarios.irregular import X0, check_g7_decreasing, g_c, g_c_increasing, g_c_inverse

IDS = [f"S{i}" for i in range(1, 10)]


def test_registry():
    scs = register_builtin_scenarios()
    assert [s.id for s in scs] == IDS == scenario_ids()
    assert len({s.index for s in scs}) == 9
    with pytest.raises(KeyError):
        get_scenario("S10")


@pytest.mark.parametrize("sid", IDS)
def test_catalog_serializes(sid):
    sc = get_scenario(sid)
    doc = json.dumps(sc.to_json(), default=str)
    assert sid in doc
    for m in sc.models.values():
        assert m.checks, f"{sid}/{m.tag} has no checks"


def test_inverse_monotone_examples():
    g = lambda y: y * (2 + math.sin(math.log(y)))  # noqa: E731
    assert_allclose(inverse_monotone(g, 2.0, (0.5, 3.0)), 1.0, rtol=1e-12)
    psi = lambda x: math.log(x) + math.sin(math.log(math.log(x)))  # noqa: E731
    assert_allclose(inverse_monotone(psi, 1.0, (1.5, 10.0)), math.e, rtol=1e-12)
    assert_allclose(inverse_monotone(lambda u: float(g_c(0.5, u)), 1.0, (0.1, 1.0)), 1.0, rtol=1e-12)
    with pytest.raises(BracketError):
        inverse_monotone(g, 100.0, (0.5, 3.0))


def test_inverse_monotone_array():
    v = np.linspace(0.01, 0.99, 50)
    u = g_c_inverse(0.5, v)
    assert_allclose(g_c(0.5, u), v, rtol=5e-12)  # tolerance is 1e-12 relative in u
    r = inverse_monotone_array(lambda x: x ** 3, np.array([8.0, 27.0]), 0.0, 10.0)
    assert_allclose(r, [2.0, 3.0], rtol=1e-12)


def test_z2_quantile_inverts_sf():
    u = np.geomspace(1e-12, 1.0, 200)
    assert_allclose(z2_sf(z2_quantile(u)), u, rtol=1e-10)


@pytest.mark.parametrize("c", [0.5, -0.5])
def test_g_c_increasing(c):
    assert g_c_increasing(c)
    assert g_c(c, 1.0) == 1.0


def test_g7_decreasing_beyond_x0():
    assert X0 == 21.0
    assert check_g7_decreasing()


def test_s8_required_scaling_not_regularly_varying():
    sc = get_scenario("S8")
    q = quadruple(sc.extras["required_lambda0"], 0.0)
    p = profile_regular_variation(q, lambdas=(sc.extras["profile_lambda"],))
    assert not p.regular
    assert_allclose(required_lambda0(math.e ** (math.pi / 2)), math.exp(math.pi) / 3, rtol=1e-14)


@pytest.mark.parametrize("sid", IDS)
def test_sampling_deterministic_and_prefix(sid):
    sc = get_scenario(sid)
    a = sc.sample(11, 70_000)
    b = sc.sample(11, 70_000)
    assert a.shape == (70_000, 2)
    assert np.array_equal(a, b)
    assert np.array_equal(sc.sample(11, 1000), a[:1000])
    assert np.array_equal(sc.sample(11, 70_000, workers=4), a)
    assert not np.array_equal(sc.sample(12, 1000), a[:1000])
    assert sc.sample(11, 0).shape == (0, 2)


def test_s2_branch_frequency():
    x = get_scenario("S2").sample(3, 1_000_000)[:, 0]
    p = np.mean(x >= 2.0)
    assert abs(p - 0.5) <= 3 * math.sqrt(0.25 / x.size)


def _marginal_model(sc):
    for m in sc.models.values():
        if m.kind in ("cev_xy", "mevt", "standardized") and not m.swap:
            return m
    raise AssertionError("no model")


@pytest.mark.filterwarnings("ignore::cevmlab.estimators.LowCountWarning")
@pytest.mark.parametrize("sid", IDS)
def test_y_marginal_sanity(sid):
    sc = get_scenario(sid)
    m = _marginal_model(sc)
    q = m.quadruple
    t = min(1e3, m.mc_t)
    s = sc.sample(5, 1_000_000)
    supp = q.y_support()
    for y in (0.0, 1.0, 3.0):
        if q.standard_y:
            y = y + 0.5
            target = 1.0 / y
        elif supp.lower < y < supp.upper:
            target = float(gev_tail(q.gamma_y, y))
        else:
            target = 0.0
        est = marginal_estimate(s, q, t, y, axis="y")
        assert est.within(target, 4.0, floor=1e-12), (sid, y, est.value, target)
