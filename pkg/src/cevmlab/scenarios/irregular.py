"""Scenarios S5-S7: slowly oscillating functions that break one model but not another.

* S5: MEVT holds, no CEVM (``g(y) = y (2 + sin log y)``).
* S6: both CEVMs hold, MEVT fails (``g_c(u) = u (1 + c sin log u)``).
* S7: CEVM and both margins hold, MEVT with ``b = psi`` fails
  (``psi(x) = log x + sin log log x``).
"""

from __future__ import annotations

import math

import numpy as np

from ..margins import support_interval
from ..measures import (
    INF,
    NU_MINUS_1,
    CurveComponent,
    CurveCoord,
    LimitMeasure,
    ProductComponent,
)
from ..norming import quadruple
from .base import Check, ModelSpec, ProbeSequence, Relation, Scenario, converges, oscillates
from .inversion import inverse_monotone, inverse_monotone_array, pareto_between, sf_scalar, uniform_open

TWO_PI = 2.0 * math.pi

# --------------------------------------------------------------------------
# S5


def g5(y):
    """``y (2 + sin log y)`` for ``y >= 1`` (extended by 2 below 1)."""
    y = np.asarray(y, dtype=float)
    out = np.where(y >= 1, y * (2.0 + np.sin(np.log(np.maximum(y, 1.0)))), 2.0)
    return out[()] if out.ndim == 0 else out


def g5_from_log(log_y: float) -> float:
    """``g(e^L)`` without forming ``e^L`` inside the sine."""
    return math.exp(log_y) * (2.0 + math.sin(log_y))


def g5_inverse(z):
    """``g^<-(z)`` on ``[2, inf)``; uses ``g(y) in [y, 3y]`` as bracket."""
    z = np.asarray(z, dtype=float)
    lo = np.maximum(1.0, z / 3.0)
    hi = np.maximum(1.0, z)
    d = lambda y: 2.0 + np.sin(np.log(y)) + np.cos(np.log(y))  # noqa: E731
    return inverse_monotone_array(g5, z, lo, hi, dfn=d)


def _s5_draw(rng, m):
    y = 1.0 / uniform_open(rng, m)
    b = rng.integers(0, 2, m)
    x = y.copy()
    neg = b == 0
    x[neg] = -g5_inverse(2.0 * y[neg])
    return np.column_stack([x, y])


def _s5_mevt(functional, log_t, x, y):
    t = math.exp(log_t)
    ty = t * (1.0 + y)
    tx = 0.5 * t * (1.0 + x)
    if functional == "survival":
        return 0.5 * t * (sf_scalar(min(tx, ty)) + sf_scalar(ty))
    if functional == "quadrant":
        return 0.5 * t * sf_scalar(max(tx, ty))
    if functional == "x_tail":
        return 0.5 * t * sf_scalar(tx)
    if functional == "y_tail":
        return t * sf_scalar(ty)
    raise NotImplementedError


def _s5_cev(functional, log_t, x, y):
    # alpha(t) = t, beta(t) = 0
    t = math.exp(log_t)
    big = t * (1.0 + y)
    if functional == "y_tail":
        return t * sf_scalar(big)
    if functional != "rect":
        raise NotImplementedError
    z = t * x
    p = pareto_between(big, z) if z > big else 0.0
    if x < 0 and log_t + math.log(-x) >= 0.0:  # -z >= 1
        p += sf_scalar(max(0.5 * g5_from_log(log_t + math.log(-x)), big))
    else:
        p += sf_scalar(big)
    return 0.5 * t * float(p)


def s5_mevt_measure():
    diag = CurveComponent(
        CurveCoord.increasing(lambda s: s, lambda v: v, -1.0, INF),
        CurveCoord.increasing(lambda s: 0.5 * (s - 1.0), lambda v: 2.0 * v + 1.0, -1.0, INF),
        lambda r: 1.0 / (1.0 + r), -1.0, label="{(s, (s-1)/2)}",
    )
    edge = CurveComponent(
        CurveCoord.constant(-1.0),
        CurveCoord.increasing(lambda s: s, lambda v: v, -1.0, INF),
        lambda r: 0.5 / (1.0 + r), -1.0, label="{(-1, s)}",
    )
    return LimitMeasure((diag, edge), x_support=support_interval(1.0), y_support=support_interval(1.0),
                        name="S5 mu (MEVT)")


def _s5_probe(label, phase, value):
    # log t = 2 pi n + phase - log|x|;  sin log(t|x|) = sin(phase)
    return ProbeSequence(
        label,
        lambda n, x, y: TWO_PI * n + phase - math.log(abs(x)),
        value,
        n_start=0,
        formula=f"t_n = exp(2 pi n + {phase:.6g}) / |x|",
    )


def build_s5(index=5) -> Scenario:
    lab = {"c": "t", "d": "t"}
    q_mevt = quadruple(lambda t: 0.5 * np.asarray(t, dtype=float), lambda t: 0.5 * np.asarray(t, dtype=float),
                       lambda t: t, lambda t: t, gamma_y=1.0, gamma_x_hint=1.0,
                       labels=dict(alpha="t/2", beta="t/2", **lab))
    q_cev = quadruple(lambda t: t, 0.0, lambda t: t, lambda t: t, gamma_y=1.0,
                      labels=dict(alpha="t", beta="0", **lab))
    probes = (
        _s5_probe("sin0", math.pi, lambda x, y: min(0.5 / (1.0 + y), 1.0 / (2.0 * abs(x)))),
        _s5_probe("sin1", math.pi / 2.0, lambda x, y: min(0.5 / (1.0 + y), 1.0 / (3.0 * abs(x)))),
    )
    models = {
        "mevt": ModelSpec("mevt", q_mevt, s5_mevt_measure(), _s5_mevt, (
            Check("survival", 0.0, 0.0),
            Check("survival", 1.0, 1.0),
            Check("survival", -0.5, 0.5),
            Check("quadrant", 0.0, 0.0),
        )),
        "cev_xy": ModelSpec("cev_xy", q_cev, None, _s5_cev, (
            Check("rect", -1.5, 0.0, oscillates(2.0 / 9.0, 1.0 / 3.0), probes=probes, mc=True),
            Check("rect", 0.5, 0.0, converges(0.5)),
        ), mc_t_max=2e3),
    }
    return Scenario(
        "S5", "MEVT without CEVM: oscillation below the lower endpoint",
        _s5_draw, models, params={"B": "Bernoulli(1/2)", "Y": "standard Pareto", "g": "y(2+sin log y)"},
        index=index,
    )


# --------------------------------------------------------------------------
# S6


def g_c(c: float, u):
    u = np.asarray(u, dtype=float)
    out = u * (1.0 + c * np.sin(np.log(u)))
    return out[()] if out.ndim == 0 else out


def g_c_from_log(c: float, log_u: float) -> float:
    return math.exp(log_u) * (1.0 + c * math.sin(log_u))


def g_c_inverse(c: float, v):
    """``g_c^<-(v)`` on ``(0, 1]`` using ``g_c(u) in [u (1-|c|), u (1+|c|)]``."""
    v = np.asarray(v, dtype=float)
    lo = v / (1.0 + abs(c))
    hi = np.minimum(1.0, v / (1.0 - abs(c)))
    d = lambda u: 1.0 + c * np.sin(np.log(u)) + c * np.cos(np.log(u))  # noqa: E731
    return inverse_monotone_array(lambda u: g_c(c, u), v, lo, hi, dfn=d)


def psi_c(c: float, z):
    """Strictly decreasing ``psi_c(z) = g_c^<-(1/z)`` for ``z >= 1``."""
    return g_c_inverse(c, 1.0 / np.asarray(z, dtype=float))


def _s6_draw(rng, m):
    z = 1.0 / uniform_open(rng, m)
    b = rng.integers(1, 5, m)
    x = np.empty(m)
    y = np.empty(m)
    for k, c, px in ((1, 0.5, 1.0), (2, -0.5, 0.5)):
        sel = b == k
        x[sel] = 2.0 - z[sel] ** (-px)
        y[sel] = 2.0 - psi_c(c, z[sel])
    sel = b == 3
    x[sel] = 2.0 - 1.0 / z[sel]
    y[sel] = 1.0 - 1.0 / z[sel]
    sel = b == 4
    x[sel] = 1.0 - 1.0 / z[sel]
    y[sel] = 2.0 - 1.0 / z[sel]
    return np.column_stack([x, y])


def _inv_g_level(c, w):
    # Z threshold 1/g_c(w) for the event psi_c(Z) < w; any Z works if w > 1
    return 1.0 if w > 1.0 else 1.0 / float(g_c(c, w))


def _s6_cev_xy(functional, log_t, x, y):
    t = math.exp(log_t)
    if y >= 1.0:
        return 0.0
    w = 4.0 * (1.0 - y) / (3.0 * t)
    if functional == "y_tail":
        x = INF
    elif functional != "rect":
        raise NotImplementedError
    ub1 = INF if x >= 2 else 1.0 / (2.0 - x)
    ub2 = INF if x >= 2 else (2.0 - x) ** -2
    ub4 = INF if x >= 1 else 1.0 / (1.0 - x)
    p = pareto_between(_inv_g_level(0.5, w), ub1)
    p += pareto_between(_inv_g_level(-0.5, w), ub2)
    if w > 1.0:
        p += pareto_between(1.0 / (w - 1.0), ub1)
    p += pareto_between(1.0 / w, ub4)
    return 0.25 * t * float(p)


def _s6_cev_yx(functional, log_t, u, v):
    # coordinates (Y, X): u bounds Y from above, X exceeds 2 - w
    t = math.exp(log_t)
    if v >= 1.0:
        return 0.0
    w = 2.0 * (1.0 - v) / t
    if functional == "y_tail":
        u = INF
    elif functional != "rect":
        raise NotImplementedError

    def ub_psi(c):
        if u >= 2.0:
            return INF
        if u < 1.0:
            return 0.0
        return 1.0 / float(g_c(c, 2.0 - u))

    p = pareto_between(1.0 / w, ub_psi(0.5))
    p += pareto_between(w ** -2, ub_psi(-0.5))
    ub3 = INF if u >= 1.0 else (0.0 if u < 0.0 else 1.0 / (1.0 - u))
    p += pareto_between(1.0 / w, ub3)
    if w > 1.0:
        ub4 = INF if u >= 2.0 else (0.0 if u < 1.0 else 1.0 / (2.0 - u))
        p += pareto_between(1.0 / (w - 1.0), ub4)
    return 0.25 * t * float(p)


def _s6_mevt(functional, log_t, x, y):
    if functional != "quadrant":
        raise NotImplementedError
    t = math.exp(log_t)
    if x >= 1.0 or y >= 1.0:
        return 0.0
    log_wy = math.log(4.0 * (1.0 - y) / 3.0) - log_t
    wx = 2.0 * (1.0 - x) / t
    wy = math.exp(log_wy)
    p = sf_scalar(max(1.0 / wx, 1.0 / g_c_from_log(0.5, log_wy) if wy <= 1 else 1.0))
    p += sf_scalar(max(wx ** -2, 1.0 / g_c_from_log(-0.5, log_wy) if wy <= 1 else 1.0))
    if wy > 1.0:
        p += sf_scalar(max(1.0 / wx, 1.0 / (wy - 1.0)))
    if wx > 1.0:
        p += sf_scalar(max(1.0 / (wx - 1.0), 1.0 / wy))
    return 0.25 * t * p


def s6_measures():
    xy = LimitMeasure((ProductComponent(atoms=((1.0, 1.0 / 3.0), (2.0, 2.0 / 3.0)), tail=NU_MINUS_1),),
                      y_support=support_interval(-1.0), name="S6 mu_{X,Y>}")
    yx = LimitMeasure((ProductComponent(atoms=((1.0, 0.5), (2.0, 0.5)), tail=NU_MINUS_1),),
                      y_support=support_interval(-1.0), name="S6 mu_{Y,X>} (coordinates (Y, X))")
    return xy, yx


def _s6_probe(label, half_turn, value):
    return ProbeSequence(
        label,
        lambda n, x, y: math.log(4.0 * (1.0 - y) / 3.0) + (2 * n + half_turn) * math.pi,
        value,
        n_start=1,
        formula=f"t_n = 4(1-y) exp((2n {'+' if half_turn > 0 else '-'} 1/2) pi) / 3",
    )


def build_s6(index=6) -> Scenario:
    xy, yx = s6_measures()
    inv = lambda t: np.asarray(t, dtype=float)  # noqa: E731
    q_xy = quadruple(1.0, 0.0, lambda t: 4.0 / (3.0 * inv(t)), lambda t: 2.0 - 4.0 / (3.0 * inv(t)),
                     gamma_y=-1.0, labels={"alpha": "1", "beta": "0", "c": "4/(3t)", "d": "2-4/(3t)"})
    q_yx = quadruple(1.0, 0.0, lambda t: 2.0 / inv(t), lambda t: 2.0 - 2.0 / inv(t), gamma_y=-1.0,
                     labels={"alpha": "1", "beta": "0", "c": "2/t", "d": "2-2/t"})
    q_mevt = quadruple(lambda t: 2.0 / inv(t), lambda t: 2.0 - 2.0 / inv(t),
                       lambda t: 4.0 / (3.0 * inv(t)), lambda t: 2.0 - 4.0 / (3.0 * inv(t)),
                       gamma_y=-1.0, gamma_x_hint=-1.0,
                       labels={"alpha": "2/t", "beta": "2-2/t", "c": "4/(3t)", "d": "2-4/(3t)"})
    probes = (
        _s6_probe("upper", -0.5, lambda x, y: min((1.0 - x) / 2.0, (1.0 - y) / 2.0)),
        _s6_probe("lower", 0.5, lambda x, y: min((1.0 - x) / 2.0, (1.0 - y) / 6.0)),
    )
    models = {
        "cev_xy": ModelSpec("cev_xy", q_xy, xy, _s6_cev_xy, (
            Check("rect", 1.5, 0.0, nondegenerate=True),
            Check("rect", 2.5, 0.0, nondegenerate=True),
            Check("rect", 2.5, 0.5, nondegenerate=True),
            Check("rect", 1.5, -1.0, nondegenerate=True),
        )),
        "cev_yx": ModelSpec("cev_yx", q_yx, yx, _s6_cev_yx, (
            Check("rect", 1.5, 0.0, nondegenerate=True),
            Check("rect", 2.5, 0.0, nondegenerate=True),
            Check("rect", 2.5, -1.0, nondegenerate=True),
        ), swap=True),
        "mevt": ModelSpec("mevt", q_mevt, None, _s6_mevt, (
            Check("quadrant", 0.0, 0.0, oscillates(1.0 / 6.0, 0.5), probes=probes, mc=False),
        )),
    }
    return Scenario(
        "S6", "Both CEVMs without MEVT: incompatible normalizations",
        _s6_draw, models, params={"B": "uniform{1,2,3,4}", "Z": "standard Pareto", "c": [0.5, -0.5]},
        relations=(Relation("overlap", ("cev_xy", "cev_yx"), "inconsistent"),),
        index=index,
    )


# --------------------------------------------------------------------------
# S7

X0 = 21.0


def psi7(x):
    """``log x + sin log log x`` for ``x >= e``."""
    x = np.asarray(x, dtype=float)
    lx = np.log(x)
    out = lx + np.sin(np.log(lx))
    return out[()] if out.ndim == 0 else out


def log_psi7_inverse(z):
    """``log psi^<-(z)``: solves ``L + sin log L = z`` with ``L in [z-1, z+1]``."""
    z = np.asarray(z, dtype=float)
    f = lambda L: L + np.sin(np.log(L))  # noqa: E731
    d = lambda L: 1.0 + np.cos(np.log(L)) / L  # noqa: E731
    return inverse_monotone_array(f, z, np.maximum(1.0, z - 1.0), np.maximum(1.0, z + 1.0), dfn=d)


def g7(x):
    """``4 / (3 psi^<-(x)) - exp(-x)/3``: survival of ``Z`` beyond ``x0``."""
    x = np.asarray(x, dtype=float)
    out = (4.0 / 3.0) * np.exp(-log_psi7_inverse(x)) - np.exp(-x) / 3.0
    return out[()] if out.ndim == 0 else out


def z7_sf(x: float) -> float:
    return 1.0 if x < X0 else float(g7(x))


def _g7_inverse(u):
    # g7 is decreasing with 0.15 e^-z < g7(z) < 3.7 e^-z on [x0, inf)
    lo = np.maximum(X0, np.log(0.15 / u))
    hi = np.maximum(X0, np.log(3.7 / u))
    return inverse_monotone_array(g7, u, lo, hi, increasing=False)


def _s7_draw(rng, m):
    y = 1.0 / uniform_open(rng, m)
    u = uniform_open(rng, m)
    z = np.full(m, X0)
    tail = u < g7(X0)
    if tail.any():
        z[tail] = _g7_inverse(u[tail])
    x = np.where(y > 4.0, np.log(np.maximum(y, 4.0) / 4.0), z)
    return np.column_stack([x, y])


def _s7_cev(functional, log_t, x, y):
    t = math.exp(log_t)
    big = t * (1.0 + y)
    if functional == "y_tail":
        return t * sf_scalar(big)
    if functional != "quadrant":
        raise NotImplementedError
    p = sf_scalar(max(4.0 * t * math.exp(x), big, 4.0))
    if big < 4.0:
        p += z7_sf(x + log_t) * float(pareto_between(big, 4.0))
    return t * p


def _s7_mevt(functional, log_t, x, y):
    if functional != "quadrant":
        raise NotImplementedError
    s = math.sin(math.log(log_t))
    main = 1.0 / max(4.0 * math.exp(x + s), 1.0 + y, 4.0 * math.exp(-log_t))
    if log_t + math.log1p(y) < math.log(4.0):
        t = math.exp(log_t)
        main += t * z7_sf(x + log_t + s) * float(pareto_between(t * (1.0 + y), 4.0))
    return main


def s7_measure():
    c = CurveComponent(
        CurveCoord.increasing(lambda s: math.log(s / 4.0), lambda v: 4.0 * math.exp(v), -INF, INF),
        CurveCoord.increasing(lambda s: s - 1.0, lambda v: v + 1.0, -1.0, INF),
        lambda r: 1.0 / r, 0.0, label="{(log(s/4), s-1)}",
    )
    return LimitMeasure((c,), y_support=support_interval(1.0), name="S7 mu_{X,Y>}")


def build_s7(index=7) -> Scenario:
    q_cev = quadruple(1.0, lambda t: np.log(t), lambda t: t, lambda t: t, gamma_y=1.0,
                      labels={"alpha": "1", "beta": "log t", "c": "t", "d": "t"})
    q_mevt = quadruple(1.0, psi7, lambda t: t, lambda t: t, gamma_y=1.0, gamma_x_hint=0.0, t_min=math.e,
                       labels={"alpha": "1", "beta": "log t + sin log log t", "c": "t", "d": "t"})
    probes = (
        ProbeSequence("sin0", lambda n, x, y: math.exp(TWO_PI * n),
                      lambda x, y: 1.0 / max(4.0 * math.exp(x), 1.0 + y), n_start=1,
                      formula="t_n = exp(exp(2 pi n))"),
        ProbeSequence("sin1", lambda n, x, y: math.exp(TWO_PI * n + math.pi / 2.0),
                      lambda x, y: 1.0 / max(4.0 * math.exp(x + 1.0), 1.0 + y), n_start=0,
                      formula="t_n = exp(exp(2 pi n + pi/2))"),
    )
    # doubly geometric scan: log t from 1 to 1e4
    scan = tuple(float(v) for v in np.geomspace(1.0, 1e4, 24))
    models = {
        "cev_xy": ModelSpec("cev_xy", q_cev, s7_measure(), _s7_cev, (
            Check("quadrant", 0.0, 0.0),
            Check("quadrant", 0.0, 5.0),
            Check("quadrant", -1.0, 0.0),
            Check("rect", 0.0, 0.0, nondegenerate=True),
        )),
        "mevt": ModelSpec("mevt", q_mevt, None, _s7_mevt, (
            Check("quadrant", 0.0, 0.0, oscillates(1.0 / (4.0 * math.e), 0.25), probes=probes, mc=False,
                  scan_log_t=scan),
        )),
    }
    return Scenario(
        "S7", "CEVM and Gumbel margin without MEVT: non-equivalent shifts",
        _s7_draw, models, params={"x0": X0, "Y": "standard Pareto", "psi": "log x + sin log log x"},
        relations=(Relation("equivalence", ("cev_xy", "mevt"), "not_equivalent"),),
        index=index,
    )


def check_g7_decreasing(n: int = 10_000, upper: float = 200.0) -> bool:
    """Ordered-grid check that ``g7`` decreases on ``[x0, upper]`` with values in (0, 1]."""
    grid = np.linspace(X0, upper, n)
    v = g7(grid)
    return bool(np.all(np.diff(v) < 0) and np.all((v > 0) & (v <= 1)))


def g_c_increasing(c: float, n: int = 10_000) -> bool:
    u = np.linspace(1e-6, 1.0, n)
    return bool(np.all(np.diff(g_c(c, u)) > 0))


__all__ = [
    "build_s5", "build_s6", "build_s7", "g5", "g5_inverse", "g_c", "g_c_inverse", "psi_c", "psi7",
    "log_psi7_inverse", "g7", "X0", "check_g7_decreasing", "g_c_increasing", "inverse_monotone",
]
