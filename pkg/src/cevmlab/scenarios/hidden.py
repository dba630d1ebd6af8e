"""Scenario S8: CEVM in both orientations but no hidden regular variation.

``B`` uniform on {1, 2, 3}; ``(X, Y) = (Z1^tau, Z1), (Z1, Z1^tau)`` or
``(Z2, Z2)`` with ``Z1`` standard Pareto and
``P{Z2 > z} = z^-2 (2 + sin log z) / 2``.
"""

from __future__ import annotations

import math

import numpy as np

from ..margins import Interval, support_interval
from ..measures import INF, CurveComponent, CurveCoord, LimitMeasure
from ..norming import quadruple
from .base import Branch, Check, ModelSpec, ProbeSequence, Scenario, converges, oscillates
from .inversion import inverse_monotone_array, sf_scalar, uniform_open

TAU = 0.25


def z2_sf(z):
    """``P{Z2 > z}``; equal to 1 for ``z <= 1``."""
    z = np.asarray(z, dtype=float)
    zz = np.maximum(z, 1.0)
    with np.errstate(over="ignore", invalid="ignore"):
        out = np.where(z <= 1.0, 1.0, np.where(np.isinf(zz), 0.0, 0.5 * (2.0 + np.sin(np.log(zz))) / (zz * zz)))
    return out[()] if out.ndim == 0 else out


def z2_sf_scalar(z: float) -> float:
    if z <= 1.0:
        return 1.0
    if z == INF:
        return 0.0
    return 0.5 * (2.0 + math.sin(math.log(z))) / (z * z)


def z2_quantile(u):
    """Solve ``P{Z2 > z} = u`` for ``u in (0, 1]`` in ``L = log z``."""
    u = np.asarray(u, dtype=float)
    logu = np.log(u)
    # log S2 = -2L + log(2 + sin L) - log 2 is strictly decreasing in L
    f = lambda L: -2.0 * L + np.log(2.0 + np.sin(L)) - math.log(2.0)  # noqa: E731
    d = lambda L: -2.0 + np.cos(L) / (2.0 + np.sin(L))  # noqa: E731
    lo = np.maximum(0.0, 0.5 * (math.log(0.5) - logu))
    hi = np.maximum(0.0, 0.5 * (math.log(1.5) - logu))
    return np.exp(inverse_monotone_array(f, logu, lo, hi, increasing=False, dfn=d))


def z2_beyond(rng, z0: float, m: int):
    """``m`` draws of ``Z2`` conditioned on ``Z2 > z0``."""
    return z2_quantile(uniform_open(rng, m) * z2_sf_scalar(z0))


def pareto_beyond(rng, z0: float, m: int):
    return max(z0, 1.0) / uniform_open(rng, m)


def _s8_draw(rng, m):
    z1 = 1.0 / uniform_open(rng, m)
    z2 = z2_quantile(uniform_open(rng, m))
    b = rng.integers(1, 4, m)
    zt = z1 ** TAU
    x = np.where(b == 1, zt, np.where(b == 2, z1, z2))
    y = np.where(b == 1, z1, np.where(b == 2, zt, z2))
    return np.column_stack([x, y])


def _s8_cev(functional, log_t, x, y):
    # alpha = beta = (t/3)^tau, c = d = t/3
    t = math.exp(log_t)
    a = (t / 3.0) ** TAU
    big = t * (1.0 + y) / 3.0
    y_tail = sf_scalar(big) + sf_scalar(big ** (1.0 / TAU) if big > 0 else 0.0) + z2_sf_scalar(big)
    if functional == "y_tail":
        return t / 3.0 * y_tail
    lx = a * (1.0 + x)  # X > lx
    if functional == "x_tail":
        return t / 3.0 * (sf_scalar(lx ** (1.0 / TAU) if lx > 0 else 0.0) + sf_scalar(lx) + z2_sf_scalar(lx))
    if functional != "quadrant":
        raise NotImplementedError
    p = sf_scalar(max(lx ** (1.0 / TAU) if lx > 0 else 0.0, big))
    p += sf_scalar(max(lx, big ** (1.0 / TAU) if big > 0 else 0.0))
    p += z2_sf_scalar(max(lx, big))
    return t / 3.0 * p


def _joint_standard(log_t, x, y):
    # P{X > t x, Y > t y}
    t = math.exp(log_t)
    tx, ty = t * x, t * y
    p = sf_scalar(max(tx ** (1.0 / TAU), ty)) + sf_scalar(max(tx, ty ** (1.0 / TAU)))
    return (p + z2_sf_scalar(max(tx, ty))) / 3.0


def _s8_mevt(functional, log_t, x, y):
    t = math.exp(log_t)
    if functional == "quadrant":
        return t * _joint_standard(log_t, x, y)
    if functional in ("x_tail", "y_tail"):
        v = x if functional == "x_tail" else y
        tv = t * v
        return t / 3.0 * (sf_scalar(tv ** (1.0 / TAU)) + sf_scalar(tv) + z2_sf_scalar(tv))
    raise NotImplementedError


def _hrv_prelimit(power):
    def fn(functional, log_t, x, y):
        if functional != "quadrant":
            raise NotImplementedError
        return math.exp(power * log_t) * _joint_standard(log_t, x, y)

    return fn


def s8_cev_measure():
    c = CurveComponent(
        CurveCoord.increasing(lambda s: s ** TAU - 1.0, lambda v: (1.0 + v) ** (1.0 / TAU), -1.0, INF),
        CurveCoord.increasing(lambda s: s - 1.0, lambda v: v + 1.0, -1.0, INF),
        lambda r: 1.0 / r, 0.0, label="{(s^tau - 1, s - 1)}", params={"tau": TAU},
    )
    return LimitMeasure((c,), y_support=support_interval(1.0), name="S8 mu_{X,Y>}")


def s8_axes_measure():
    """``mu*``: mass ``(3r)^-1`` on each positive axis, none inside the open quadrant."""
    pos = Interval(0.0, INF)
    xa = CurveComponent(
        CurveCoord.increasing(lambda s: s, lambda v: v, 0.0, INF), CurveCoord.constant(0.0),
        lambda r: 1.0 / (3.0 * r), 0.0, label="{(s, 0)}",
    )
    ya = CurveComponent(
        CurveCoord.constant(0.0), CurveCoord.increasing(lambda s: s, lambda v: v, 0.0, INF),
        lambda r: 1.0 / (3.0 * r), 0.0, label="{(0, s)}",
    )
    return LimitMeasure((xa, ya), x_support=pos, y_support=pos, standardized=True, name="S8 mu* (axes)")


def required_lambda0(t):
    """The only scaling that would stabilize the joint tail: ``t^2 / (2 + sin log t)``."""
    t = np.asarray(t, dtype=float)
    return t * t / (2.0 + np.sin(np.log(t)))


def _branches():
    inv_tau = 1.0 / TAU

    def thr1(t, x, y):
        return 0.5 * max((t * x) ** inv_tau, t * y)

    def thr2(t, x, y):
        return 0.5 * max(t * x, (t * y) ** inv_tau)

    def thr3(t, x, y):
        return 0.5 * t * max(x, y)

    def sf1(z):
        return sf_scalar(z)

    return (
        Branch(1.0 / 3.0, sf1, pareto_beyond, lambda z: (z ** TAU, z), thr1),
        Branch(1.0 / 3.0, sf1, pareto_beyond, lambda z: (z, z ** TAU), thr2),
        Branch(1.0 / 3.0, z2_sf_scalar, z2_beyond, lambda z: (z, z), thr3),
    )


def _probe(label, phase, sign):
    return ProbeSequence(
        label,
        lambda n, x, y: 2.0 * math.pi * n + phase - math.log(max(x, y)),
        lambda x, y: (2.0 + sign) / (6.0 * max(x, y) ** 2),
        n_start=1,
        formula=f"t_n = exp(2 pi n {'+' if sign > 0 else '-'} pi/2) / max(x, y)",
    )


def build_s8(index=8) -> Scenario:
    lin = lambda t: np.asarray(t, dtype=float)  # noqa: E731
    third = lambda t: lin(t) / 3.0  # noqa: E731
    pw = lambda t: (lin(t) / 3.0) ** TAU  # noqa: E731
    q_cev = quadruple(pw, pw, third, third, gamma_y=1.0,
                      labels={"alpha": "(t/3)^tau", "beta": "(t/3)^tau", "c": "t/3", "d": "t/3"})
    q_std = quadruple(lin, 0.0, lin, 0.0, gamma_y=1.0, standard_y=True,
                      labels={"alpha": "t", "beta": "0", "c": "t", "d": "0"})
    probes = (_probe("upper", math.pi / 2.0, 1.0), _probe("lower", -math.pi / 2.0, -1.0))
    models = {
        "cev_xy": ModelSpec("cev_xy", q_cev, s8_cev_measure(), _s8_cev, (
            Check("rect", 0.0, 0.0),
            Check("rect", 1.0, 0.0),
            Check("rect", 0.5, 1.0),
            Check("quadrant", 1.0, 0.0),
        )),
        "mevt": ModelSpec("mevt", q_std, s8_axes_measure(), _s8_mevt, (
            Check("survival", 1.0, 1.0),
            Check("x_tail", 1.0, 1.0),
            Check("x_tail", 2.0, 1.0),
            Check("quadrant", 1.0, 1.0),
        )),
        "hrv": ModelSpec("hrv", q_std, None, _hrv_prelimit(2.0), (
            Check("quadrant", 1.0, 1.0, oscillates(1.0 / 6.0, 0.5), probes=probes, mc=True),
        ), lambda0=lambda t: float(t) ** 2, note="t^2"),
        "hrv:first": ModelSpec("hrv:first", q_std, None, _hrv_prelimit(1.0), (
            Check("quadrant", 1.0, 1.0, converges(0.0)),
        ), lambda0=float, note="t"),
    }
    return Scenario(
        "S8", "Asymptotic independence without hidden regular variation",
        _s8_draw, models,
        params={"tau": TAU, "B": "uniform{1,2,3}", "Z1": "standard Pareto",
                "Z2": "P{Z2>z} = z^-2 (2 + sin log z)/2"},
        branches=_branches(),
        extras={"required_lambda0": required_lambda0, "profile_lambda": math.exp(math.pi)},
        index=index,
    )


__all__ = ["build_s8", "TAU", "z2_sf", "z2_quantile", "required_lambda0", "s8_axes_measure", "s8_cev_measure"]
