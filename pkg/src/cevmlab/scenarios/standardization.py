"""Scenarios S1-S4: dual CEVM limits and (im)possibility of standardization.

All four are driven by a standard Pareto ``Y`` (``Y = Y*``).  Pre-limit
functionals are exact for every ``t``; they are written in ``log t`` so that
the scan can run far beyond the Monte Carlo range.
"""

from __future__ import annotations

import math

import numpy as np

from ..margins import Interval
from ..measures import (
    INF,
    NU_1,
    NU_TILDE_1,
    CurveComponent,
    CurveCoord,
    DensityComponent,
    LimitMeasure,
    ProductComponent,
    support_interval,
)
from ..norming import quadruple
from .base import DEGENERATE, Check, ModelSpec, Relation, Scenario
from .inversion import inverse_monotone, sf_scalar, uniform_open

PARETO_Y = Interval(0.0, INF)


def _between(a: float, b: float) -> float:
    return max(sf_scalar(a) - sf_scalar(b), 0.0)


def _pow(x, p):
    return np.asarray(x, dtype=float) ** p


# --------------------------------------------------------------------------
# S1: X = B + (1 - B)(2 - 1/Y)


def _s1_draw(rng, m):
    y = 1.0 / uniform_open(rng, m)
    b = rng.integers(0, 2, m)
    x = np.where(b == 1, 1.0, 2.0 - 1.0 / y)
    return np.column_stack([x, y])


def _s1_coarse(functional, log_t, x, y):
    t = math.exp(log_t)
    big = t * (1.0 + y)
    if functional == "y_tail":
        return t * sf_scalar(big)
    if functional != "rect":
        raise NotImplementedError
    p = sf_scalar(big) if x >= 1 else 0.0
    p += sf_scalar(big) if x >= 2 else _between(big, 1.0 / (2.0 - x))
    return 0.5 * t * p


def _s1_fine(functional, log_t, x, y):
    t = math.exp(log_t)
    big = t * (1.0 + y)
    if functional == "y_tail":
        return t * sf_scalar(big)
    if functional != "rect":
        raise NotImplementedError
    p = sf_scalar(big) if x >= -t else 0.0
    p += sf_scalar(big) if x >= 0 else _between(big, t / abs(x))
    return 0.5 * t * p


def s1_measures():
    coarse = LimitMeasure(
        components=(ProductComponent(atoms=((1.0, 0.5), (2.0, 0.5)), tail=NU_1),),
        y_support=support_interval(1.0),
        name="S1 mu (alpha=1, beta=0)",
    )
    curve = CurveComponent(
        x=CurveCoord.increasing(lambda s: -1.0 / (1.0 + s), lambda v: -1.0 / v - 1.0, -INF, 0.0),
        y=CurveCoord.increasing(lambda s: s, lambda v: v, -1.0, INF),
        h=lambda r: 0.5 / (1.0 + r),
        s_min=-1.0,
        label="{(-1/(1+s), s)}",
    )
    fine = LimitMeasure(
        components=(curve,),
        y_support=support_interval(1.0),
        neg_inf=((0.5, NU_1),),
        name="S1 mu-tilde (alpha=1/t, beta=2)",
    )
    return coarse, fine


def build_s1(index=1) -> Scenario:
    coarse, fine = s1_measures()
    pts = [(1.5, 0.0), (2.0, 1.0), (-0.5, 0.0), (2.5, 3.0)]
    q_coarse = quadruple(1.0, 0.0, lambda t: t, lambda t: t, gamma_y=1.0,
                         labels={"alpha": "1", "beta": "0", "c": "t", "d": "t"})
    q_fine = quadruple(lambda t: 1.0 / np.asarray(t, dtype=float), 2.0, lambda t: t, lambda t: t, gamma_y=1.0,
                       labels={"alpha": "1/t", "beta": "2", "c": "t", "d": "t"})
    models = {
        "cev_xy": ModelSpec("cev_xy", q_coarse, coarse, _s1_coarse,
                            tuple(Check("rect", x, y, nondegenerate=True) for x, y in pts)),
        "cev_xy:fine": ModelSpec("cev_xy:fine", q_fine, fine, _s1_fine,
                                 tuple(Check("rect", x, y, nondegenerate=True) for x, y in pts)),
    }

    return Scenario(
        "S1", "Two CEVM limits for one vector: atoms vs mass at minus infinity",
        _s1_draw, models, params={"B": "uniform{0,1}", "Y": "standard Pareto"},
        relations=(Relation("equivalence", ("cev_xy", "cev_xy:fine"), "not_equivalent"),),
        index=index,
    )


# --------------------------------------------------------------------------
# S2: X = 2 + B/Y, B uniform on {-1, 1}


def _s2_draw(rng, m):
    y = 1.0 / uniform_open(rng, m)
    b = 2 * rng.integers(0, 2, m) - 1
    return np.column_stack([2.0 + b / y, y])


def _s2_cev(functional, log_t, x, y):
    t = math.exp(log_t)
    big = t * y
    if functional == "y_tail":
        return t * sf_scalar(big)
    if functional != "rect":
        raise NotImplementedError
    p = sf_scalar(max(t / x, big)) if x > 0 else 0.0
    p += sf_scalar(big) if x >= 0 else _between(big, t / abs(x))
    return 0.5 * t * p


def branch_exceedance(g, lower: float, thr: float, g_inf: float) -> float:
    """``P{Y > lower, g(Y) > thr}`` for Pareto ``Y`` and monotone ``g`` with ``g(inf) = g_inf``."""
    lower = max(lower, 1.0)
    a = g(lower) > thr
    b = g_inf > thr
    if a and b:
        return sf_scalar(lower)
    if not a and not b:
        return 0.0
    hi = 2.0 * lower
    while (g(hi) > thr) == a:
        hi *= 2.0
        if hi > 1e300:
            return sf_scalar(lower) if a else 0.0
    v = inverse_monotone(lambda s: g(s), thr, (lower, hi))
    return sf_scalar(lower) - sf_scalar(v) if a else sf_scalar(v)


def _s2_standardized(f):
    f2 = float(f(2.0))

    def pre(functional, log_t, x, y):
        t = math.exp(log_t)
        if functional == "y_tail":
            return t * sf_scalar(t * y)
        if functional != "quadrant":
            raise NotImplementedError
        p = 0.0
        for b in (1.0, -1.0):
            p += branch_exceedance(lambda v, b=b: float(f(2.0 + b / v)), t * y, t * x, f2)
        return 0.5 * t * p

    return pre


# monotone, positive maps on (1, 3)
S2_FAMILY = {
    "id": (lambda x: x, "x"),
    "exp": (np.exp, "exp(x)"),
    "pole3": (lambda x: 1.0 / (3.0 - np.asarray(x, dtype=float)), "1/(3-x)"),
    "pole1": (lambda x: 1.0 / (np.asarray(x, dtype=float) - 1.0), "1/(x-1)"),
    "square": (lambda x: np.asarray(x, dtype=float) ** 2, "x^2"),
}


def _recip(v):
    return INF if v == 0 else 1.0 / v


def s2_measure():
    h = lambda r: 0.5 / r  # noqa: E731
    y = CurveCoord.increasing(lambda s: s, lambda v: v, 0.0, INF)
    right = CurveComponent(CurveCoord.decreasing(_recip, _recip, 0.0, INF), y, h, 0.0,
                           label="{(1/s, s)}")
    left = CurveComponent(CurveCoord.increasing(lambda s: -_recip(s), lambda v: _recip(-v), -INF, 0.0), y, h, 0.0,
                          label="{(-1/s, s)}")
    return LimitMeasure((right, left), y_support=PARETO_Y, name="S2 mu* (two curves)")


def build_s2(index=2) -> Scenario:
    q = quadruple(lambda t: 1.0 / np.asarray(t, dtype=float), 2.0, lambda t: t, 0.0, gamma_y=1.0,
                  standard_y=True, labels={"alpha": "1/t", "beta": "2", "c": "t", "d": "0"})
    checks = (
        Check("rect", 1.0, 1.0, nondegenerate=True),
        Check("rect", -0.5, 1.0, nondegenerate=True),
        Check("rect", 0.5, 2.0, nondegenerate=True),
        Check("quadrant", 0.5, 0.5),
    )
    models = {"cev_xy": ModelSpec("cev_xy", q, s2_measure(), _s2_cev, checks)}
    qs = quadruple(lambda t: t, 0.0, lambda t: t, 0.0, gamma_y=1.0, standard_y=True,
                   labels={"alpha": "t", "beta": "0", "c": "t", "d": "0"})
    std_pts = [(0.5, 1.0), (1.0, 0.5), (2.0, 2.0)]
    for name, (f, label) in S2_FAMILY.items():
        tag = f"standardized:{name}"
        models[tag] = ModelSpec(
            tag, qs, None, _s2_standardized(f),
            tuple(Check("quadrant", x, y, DEGENERATE, nondegenerate=True) for x, y in std_pts),
            transform=f, transform_label=label,
        )
    return Scenario(
        "S2", "Non-product CEVM limit that cannot be standardized",
        _s2_draw, models, params={"B": "uniform{-1,1}", "Y": "standard Pareto"},
        x_range=Interval(1.0, 3.0), standardize_from="cev_xy", index=index,
    )


# --------------------------------------------------------------------------
# S3: X = B (1 - U/Y)


def _s3_draw(rng, m):
    y = 1.0 / uniform_open(rng, m)
    u = rng.random(m)
    b = 2 * rng.integers(0, 2, m) - 1
    return np.column_stack([b * (1.0 - u / y), y])


def _band(big, k):
    # int_0^1 P{big < Y <= u/k} du  (big >= 1, k > 0)
    kb = k * big
    if kb >= 1.0:
        return 0.0
    return (1.0 - kb) / big + k * math.log(kb)


def _int_min(big, m):
    # int_0^1 P{Y > max(big, u/m)} du  (big >= 1, 0 < m < 1)
    mb = m * big
    if mb >= 1.0:
        return 1.0 / big
    return m * (1.0 - math.log(mb))


def s3_rect_terms(t, y, k, m):
    """``t P{X <= x', Y > t y}`` with ``k = 1 - x'`` and ``m = 1 + x'`` passed separately."""
    big = max(t * y, 1.0)
    p1 = 1.0 / big if k <= 0 else _band(big, k)
    if m >= 1.0:
        p2 = 1.0 / big
    elif m <= 0.0:
        p2 = 0.0
    else:
        p2 = _int_min(big, m)
    return 0.5 * t * (p1 + p2)


def _s3_coarse(functional, log_t, x, y):
    t = math.exp(log_t)
    if functional == "y_tail":
        return t * sf_scalar(t * y)
    if functional != "rect":
        raise NotImplementedError
    return s3_rect_terms(t, y, 1.0 - x, 1.0 + x)


def _s3_fine(functional, log_t, x, y):
    t = math.exp(log_t)
    if functional == "y_tail":
        return t * sf_scalar(t * y)
    if functional != "rect":
        raise NotImplementedError
    return s3_rect_terms(t, y, -x / t, 2.0 + x / t)


def _s3_standardized(functional, log_t, x, y):
    t = math.exp(log_t)
    if functional == "y_tail":
        return t * sf_scalar(t * y)
    if functional != "rect":
        raise NotImplementedError
    if x <= 0:
        return 0.0
    k = 1.0 / (t * x)
    return s3_rect_terms(t, y, k, 2.0 - k)


def _fine_rect(x, y):
    if x >= 0:
        return 0.5 / y
    a = abs(x) * y
    if a >= 1.0:
        return 0.0
    return 0.5 * ((1.0 - a) / y + abs(x) * math.log(a))


def _double_star_rect(x, y):
    if x == INF:
        return 0.5 / y
    if x <= y:
        return 0.0
    return 0.5 * (1.0 / y - 1.0 / x + math.log(y / x) / x)


def s3_measures():
    coarse = LimitMeasure(
        (ProductComponent(atoms=((-1.0, 0.5), (1.0, 0.5)), tail=NU_TILDE_1),),
        y_support=PARETO_Y, name="S3 mu* (product)",
    )
    fine = LimitMeasure(
        (DensityComponent(_fine_rect, lambda y: 0.5 / y, lambda x: INF if x < 0 else 0.0,
                          label="x = -u/s, u uniform(0,1), s ~ nu_tilde_1 / 2"),),
        y_support=PARETO_Y, neg_inf=((0.5, NU_TILDE_1),), name="S3 mu* (alpha=1/t, beta=1)",
    )
    double_star = LimitMeasure(
        (
            ProductComponent(atoms=((0.0, 0.5),), tail=NU_TILDE_1),
            DensityComponent(_double_star_rect, lambda y: 0.5 / y, lambda x: INF,
                             density=lambda x, y: (0.5 / (x * x * y)) if x > y else 0.0,
                             label="(2 x^2 y)^-1 on {x > y}"),
        ),
        x_support=Interval(0.0, INF), y_support=PARETO_Y, standardized=True, name="S3 mu**",
    )
    return coarse, fine, double_star


def build_s3(index=3) -> Scenario:
    coarse, fine, dstar = s3_measures()
    lab = dict(c="t", d="0")
    q_coarse = quadruple(1.0, 0.0, lambda t: t, 0.0, gamma_y=1.0, standard_y=True,
                         labels=dict(alpha="1", beta="0", **lab))
    q_fine = quadruple(lambda t: 1.0 / np.asarray(t, dtype=float), 1.0, lambda t: t, 0.0, gamma_y=1.0,
                       standard_y=True, labels=dict(alpha="1/t", beta="1", **lab))
    q_std = quadruple(lambda t: t, 0.0, lambda t: t, 0.0, gamma_y=1.0, standard_y=True,
                      labels=dict(alpha="t", beta="0", **lab))
    f = lambda x: 1.0 / (1.0 - np.asarray(x, dtype=float))  # noqa: E731
    models = {
        "cev_xy": ModelSpec("cev_xy", q_coarse, coarse, _s3_coarse, (
            Check("rect", 0.5, 1.0, nondegenerate=True),
            Check("rect", 1.5, 2.0, nondegenerate=True),
            Check("rect", -1.5, 1.0, nondegenerate=True),
        )),
        "cev_xy:fine": ModelSpec("cev_xy:fine", q_fine, fine, _s3_fine, (
            Check("rect", -0.5, 1.0, nondegenerate=True),
            Check("rect", -2.0, 0.25, nondegenerate=True),
            Check("rect", 0.5, 1.0, nondegenerate=True),
        )),
        "standardized": ModelSpec("standardized", q_std, dstar, _s3_standardized, (
            Check("rect", 2.0, 1.0, nondegenerate=True),
            Check("rect", 1.0, 1.0, nondegenerate=True),
            Check("rect", 3.0, 0.5, nondegenerate=True),
            Check("quadrant", 2.0, 1.0),
        ), transform=f, transform_label="1/(1-x)"),
    }
    return Scenario(
        "S3", "Product CEVM limit whose fine normalization can be standardized",
        _s3_draw, models, params={"B": "uniform{-1,1}", "U": "uniform(0,1)", "Y": "standard Pareto"},
        x_range=Interval(-1.0, 1.0), standardize_from="cev_xy:fine", index=index,
    )


# --------------------------------------------------------------------------
# S4: X = exp(Y), f = log


def _s4_draw(rng, m):
    y = 1.0 / uniform_open(rng, m)
    with np.errstate(over="ignore"):
        x = np.exp(y)
    return np.column_stack([x, y])


def _s4_standardized(functional, log_t, x, y):
    t = math.exp(log_t)
    if functional == "y_tail":
        return t * sf_scalar(t * y)
    if functional == "quadrant":
        return t * sf_scalar(t * max(x, y))
    raise NotImplementedError


def _log_affine(kind):
    # log(alpha(t) x + beta(t)) as a function of (log t, x); -inf when the argument is not positive
    def safe(v):
        return math.log(v) if v > 0 else -INF

    return {
        "a1b0": lambda lt, x: safe(x),
        "atb0": lambda lt, x: lt + safe(x),
        "atbt": lambda lt, x: lt + safe(1.0 + x),
        "at2b0": lambda lt, x: 2.0 * lt + safe(x),
        "asqrt": lambda lt, x: 0.5 * lt + safe(x - 1.0),
    }[kind]


S4_FAMILY = {
    "a1b0": (lambda t: 1.0 + 0.0 * np.asarray(t, dtype=float), lambda t: 0.0 * np.asarray(t, dtype=float), "1", "0"),
    "atb0": (lambda t: np.asarray(t, dtype=float), lambda t: 0.0 * np.asarray(t, dtype=float), "t", "0"),
    "atbt": (lambda t: np.asarray(t, dtype=float), lambda t: np.asarray(t, dtype=float), "t", "t"),
    "at2b0": (lambda t: np.asarray(t, dtype=float) ** 2, lambda t: 0.0 * np.asarray(t, dtype=float), "t^2", "0"),
    "asqrt": (lambda t: np.sqrt(t), lambda t: -np.sqrt(t), "sqrt(t)", "-sqrt(t)"),
}


def _s4_cev(kind):
    la = _log_affine(kind)

    def pre(functional, log_t, x, y):
        t = math.exp(log_t)
        if functional == "y_tail":
            return t * sf_scalar(t * y)
        if functional != "rect":
            raise NotImplementedError
        L = la(log_t, x)
        # t P{t y < Y <= log(alpha x + beta)}
        return t * max(sf_scalar(t * y) - (sf_scalar(L) if L > -INF else 1.0), 0.0)

    return pre


def s4_measure():
    diag = CurveComponent(
        CurveCoord.increasing(lambda s: s, lambda v: v, 0.0, INF),
        CurveCoord.increasing(lambda s: s, lambda v: v, 0.0, INF),
        lambda r: 1.0 / r, 0.0, label="{(s, s)}",
    )
    return LimitMeasure((diag,), x_support=Interval(0.0, INF), y_support=PARETO_Y, standardized=True,
                        name="S4 mu** (diagonal)")


def build_s4(index=4) -> Scenario:
    qs = quadruple(lambda t: t, 0.0, lambda t: t, 0.0, gamma_y=1.0, standard_y=True,
                   labels={"alpha": "t", "beta": "0", "c": "t", "d": "0"})
    pts = [(2.0, 1.0), (1.0, 1.0), (0.5, 2.0), (3.0, 1.0), (1.0, 3.0), (2.0, 2.0)]
    models = {
        "standardized": ModelSpec(
            "standardized", qs, s4_measure(), _s4_standardized,
            tuple(Check("quadrant", x, y) for x, y in pts),
            transform=np.log, transform_label="log", mc_t=100.0, mc_t_max=100.0,
            note="exp(Y) overflows beyond Y ~ 709, so Monte Carlo stays at t <= 100",
        )
    }
    for kind, (a, b, la, lb) in S4_FAMILY.items():
        q = quadruple(a, b, lambda t: t, 0.0, gamma_y=1.0, standard_y=True,
                      labels={"alpha": la, "beta": lb, "c": "t", "d": "0"})
        tag = f"cev_xy:{kind}"
        models[tag] = ModelSpec(
            tag, q, None, _s4_cev(kind),
            (Check("rect", 2.0, 1.0, DEGENERATE, nondegenerate=True),
             Check("rect", 5.0, 0.5, DEGENERATE, nondegenerate=True)),
            mc_t=100.0, mc_t_max=100.0,
        )
    return Scenario(
        "S4", "Standardizable vector with no CEVM normalization",
        _s4_draw, models, params={"Y": "standard Pareto", "X": "exp(Y)", "f": "log"},
        extras={"cev_family": tuple(S4_FAMILY)}, index=index,
    )
