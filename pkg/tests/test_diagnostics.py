import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from cevmlab.diagnostics import (
    MIN_SCAN_POINTS,
    classify,
    geometric_log_grid,
    mc_log_grid,
    probe,
    run_check,
    scan,
)
from cevmlab.scenarios import get_scenario, scenario_ids
from cevmlab.scenarios.base import ProbeSequence

GRID = geometric_log_grid()


def _check(sid, tag, functional, x, y):
    m = get_scenario(sid).model(tag)
    return next(c for c in m.checks if (c.functional, c.x, c.y) == (functional, x, y))


def test_geometric_grid():
    assert_allclose(np.exp(GRID[:3]), [10.0, 10 * math.sqrt(10), 100.0])
    assert len(GRID) == 24
    with pytest.raises(ValueError):
        geometric_log_grid(ratio=1.0)


def test_mc_grid_respects_sample_size():
    g = mc_log_grid(4_000_000, 1e6)
    assert len(g) == MIN_SCAN_POINTS
    assert_allclose(math.exp(g[-1]), 1000.0)


def test_scan_constant_converges():
    sr = scan(lambda lt: 0.25, log_t_grid=GRID)
    v = classify(sr)
    assert v.kind == "converges" and v.limit == 0.25
    assert len(v.evidence) == 24


def test_scan_needs_twelve_points():
    with pytest.raises(ValueError):
        scan(lambda lt: 1.0, log_t_grid=GRID[:MIN_SCAN_POINTS - 1])
    with pytest.raises(ValueError):
        scan(lambda lt: 1.0, log_t_grid=GRID[::-1])
    with pytest.raises(ValueError):
        scan(lambda lt: 1.0)


def test_degenerate_and_indeterminate():
    zero = scan(lambda lt: 0.0, log_t_grid=GRID)
    assert classify(zero, nondegenerate=True).kind == "degenerate"
    assert classify(zero).kind == "converges"
    drift = scan(lambda lt: lt, log_t_grid=GRID)
    assert classify(drift).kind == "indeterminate"


def test_s2_rect_converges_to_one():
    m = get_scenario("S2").model("cev_xy")
    fn = lambda lt: m.evaluate_prelimit("rect", lt, 1.0, 1.0)  # noqa: E731
    v = classify(scan(fn, log_t_grid=GRID))
    assert v.kind == "converges"
    assert_allclose(v.limit, 1.0, atol=1e-6)


@pytest.mark.parametrize("sid,bounds", [("S6", (1.0 / 6.0, 0.5)), ("S7", (1.0 / (4.0 * math.e), 0.25))])
def test_oscillating_quadrant(sid, bounds):
    sc = get_scenario(sid)
    m = sc.model("mevt")
    c = _check(sid, "mevt", "quadrant", 0.0, 0.0)
    fn = lambda lt: m.evaluate_prelimit("quadrant", lt, 0.0, 0.0)  # noqa: E731
    fits = [probe(fn, p, 4) for p in c.probes]
    assert all(f.stable for f in fits)
    assert_allclose(sorted(f.value for f in fits), bounds, atol=1e-6)
    for f in fits:
        assert_allclose(f.value, f.expected, atol=1e-6)
    grid = c.scan_log_t or GRID
    v = classify(scan(fn, log_t_grid=grid), fits)
    assert v.kind == "oscillates"
    assert_allclose(v.bounds, bounds, atol=1e-6)
    assert v.to_json()["bounds"] == [v.liminf, v.limsup]


def test_probe_truncation_and_overflow():
    p = ProbeSequence("dbl", lambda n, x, y: math.exp(2.0 * n), lambda x, y: 1.0, n_start=1)
    f = probe(lambda lt: 1.0, p, 5, log_t_cap=100.0)
    assert f.truncated == (3, 4, 5)
    assert len(f.terms) == 2 and f.value == 1.0
    g = probe(lambda lt: 1.0, p, 5)
    assert 4 in g.overflow and 5 in g.overflow
    with pytest.raises(ValueError):
        probe(lambda lt: 1.0, p, 2)


@settings(max_examples=60, deadline=None)
@given(a=st.floats(0.1, 10.0), b=st.floats(-1.0, 1.0), amp=st.floats(0.0, 0.5))
def test_classification_scale_equivariant(a, b, amp):
    base = lambda lt: b + amp * math.sin(lt) / (1.0 + lt)  # noqa: E731
    v1 = classify(scan(base, log_t_grid=GRID), threshold=0.02)
    v2 = classify(scan(lambda lt: a * base(lt), log_t_grid=GRID), threshold=0.02 * a)
    assert v1.kind == v2.kind
    if v1.kind == "converges":
        assert_allclose(v2.limit, a * v1.limit, rtol=1e-9, atol=1e-12)


def _all_checks():
    out = []
    for sid in scenario_ids():
        sc = get_scenario(sid)
        for tag, m in sc.models.items():
            for c in m.checks:
                out.append(pytest.param(sid, tag, c, id=f"{sid}-{tag}-{c.functional}({c.x:g},{c.y:g})"))
    return out


@pytest.mark.parametrize("sid,tag,check", _all_checks())
def test_analytic_verdicts(sid, tag, check):
    sc = get_scenario(sid)
    res = run_check(sc, sc.model(tag), check)
    assert res.passed, res.detail
    assert res.rows and res.to_json()["passed"] is True
