"""Scenario S9: two-component mixture ``X = omega_B - Y^(-tau_B)``.

Global CEVM sees only atoms at the accumulation points; localized CEVMs
around each ``omega_i`` recover per-component curves; the MEVT keeps only
the component with the larger accumulation point.
"""

from __future__ import annotations

import math

import numpy as np

from ..margins import support_interval
from ..measures import INF, NU_1, CurveComponent, CurveCoord, LimitMeasure, ProductComponent
from ..norming import quadruple
from .base import Check, ModelSpec, Scenario
from .inversion import uniform_open

OMEGA = (1.0, 2.0)
TAUS = (1.0, 2.0)


def _s9_draw(rng, m):
    y = 1.0 / uniform_open(rng, m)
    b = rng.integers(0, 2, m)
    om = np.where(b == 0, OMEGA[0], OMEGA[1])
    tau = np.where(b == 0, TAUS[0], TAUS[1])
    return np.column_stack([om - y ** (-tau), y])


def _y_window(i: int, d_lo: float, d_hi: float):
    """``Y``-interval on which ``d_lo <= Y^-tau_i < d_hi``.

    Bounds are expressed as gaps ``D = omega_i - X = Y^-tau_i`` so that
    normalized levels near ``omega_i`` keep full precision.
    """
    tau = TAUS[i]
    lo = 0.0 if d_hi == INF else (INF if d_hi <= 0 else d_hi ** (-1.0 / tau))
    hi = INF if d_lo <= 0 else (0.0 if d_lo == INF else d_lo ** (-1.0 / tau))
    return lo, hi


def _between(lo: float, hi: float) -> float:
    """``P{lo < Y <= hi}`` for standard Pareto ``Y``."""
    s = lambda v: 1.0 if v <= 1.0 else (0.0 if v == INF else 1.0 / v)  # noqa: E731
    return max(s(lo) - s(hi), 0.0)


def component_probability(i: int, x_lower: float, x_upper: float, y_lower: float) -> float:
    """``P{x_lower < X_i <= x_upper, Y > y_lower}`` on component ``i``."""
    w = OMEGA[i]
    lo, hi = _y_window(i, w - x_upper, w - x_lower)
    return _between(max(lo, y_lower), hi)


def _localized_prelimit(alpha, beta, window):
    lo_n, hi_n = window

    def fn(functional, log_t, x, y):
        if functional not in ("y_tail", "rect", "quadrant"):
            raise NotImplementedError
        t = math.exp(log_t)
        a, b = alpha(t), beta(t)
        big = t * (1.0 + y)
        total = 0.0
        for i, w in enumerate(OMEGA):
            # gaps omega_i - X for the neighborhood ends and the normalized level
            g_lo, g_hi = w - lo_n, w - hi_n
            g_lev = -x if abs(x) == INF else (w - b) - a * x
            if functional == "y_tail":
                d_lo, d_hi = g_hi, g_lo
            elif functional == "rect":
                d_lo, d_hi = max(g_hi, g_lev), g_lo
            else:
                d_lo, d_hi = g_hi, min(g_lo, g_lev)
            if d_hi <= d_lo:
                continue
            ylo, yhi = _y_window(i, d_lo, d_hi)
            total += _between(max(ylo, big), yhi)
        return 0.5 * t * total

    return fn


def _s9_mevt(functional, log_t, x, y):
    if functional not in ("survival", "x_tail", "y_tail"):
        raise NotImplementedError
    t = math.exp(log_t)
    big = t * (1.0 + y)
    r = 0.0
    for w, tau in zip(OMEGA, TAUS):
        ri = (w - 2.0) + (4.0 - 8.0 * x) / (t * t)
        ti = INF if ri <= 0 else ri ** (-1.0 / tau)
        if functional == "survival":
            lev = min(ti, big)
        elif functional == "x_tail":
            lev = ti
        else:
            lev = big
        r += 1.0 if lev <= 1.0 else (0.0 if lev == INF else 1.0 / lev)
    return 0.5 * t * r


def s9_global_measure():
    return LimitMeasure(
        (ProductComponent(atoms=((OMEGA[0], 0.5), (OMEGA[1], 0.5)), tail=NU_1),),
        y_support=support_interval(1.0), name="S9 mu_{X,Y>} (atoms)",
    )


def s9_local_measure(i: int):
    tau = TAUS[i]
    c = CurveComponent(
        CurveCoord.increasing(lambda s: -(s ** -tau), lambda v: (-v) ** (-1.0 / tau), -INF, 0.0),
        CurveCoord.increasing(lambda s: s - 1.0, lambda v: v + 1.0, -1.0, INF),
        lambda r: 0.5 / r, 0.0, label=f"{{(-s^-{tau:g}, s - 1)}}", params={"tau": tau},
    )
    return LimitMeasure((c,), y_support=support_interval(1.0), name=f"S9 localized mu (omega={OMEGA[i]:g})")


def s9_mevt_measure():
    c = CurveComponent(
        CurveCoord.increasing(lambda s: 0.5 - 0.125 / (s * s), lambda v: (0.125 / (0.5 - v)) ** 0.5, -INF, 0.5),
        CurveCoord.increasing(lambda s: s - 1.0, lambda v: v + 1.0, -1.0, INF),
        lambda r: 0.5 / r, 0.0, label="{(1/2 - 1/(8 s^2), s - 1)}",
    )
    return LimitMeasure((c,), x_support=support_interval(-2.0), y_support=support_interval(1.0),
                        neg_inf=((0.5, NU_1),), name="S9 mu (MEVT)")


def build_s9(index=9) -> Scenario:
    lin = lambda t: np.asarray(t, dtype=float)  # noqa: E731
    q_cev = quadruple(1.0, 0.0, lin, lin, gamma_y=1.0, labels={"alpha": "1", "beta": "0", "c": "t", "d": "t"})
    q1 = quadruple(lambda t: 1.0 / lin(t), 1.0, lin, lin, gamma_y=1.0,
                   labels={"alpha": "1/t", "beta": "1", "c": "t", "d": "t"})
    q2 = quadruple(lambda t: lin(t) ** -2, 2.0, lin, lin, gamma_y=1.0,
                   labels={"alpha": "t^-2", "beta": "2", "c": "t", "d": "t"})
    q_mevt = quadruple(lambda t: 8.0 / lin(t) ** 2, lambda t: 2.0 - 4.0 / lin(t) ** 2, lin, lin,
                       gamma_y=1.0, gamma_x_hint=-2.0,
                       labels={"alpha": "8/t^2", "beta": "2 - 4/t^2", "c": "t", "d": "t"})
    everywhere = (-INF, INF)
    grid = tuple(Check("rect", x, y) for x in (0.5, 1.5, 2.5) for y in (-0.5, 0.0, 1.0))
    local_checks = (
        Check("quadrant", -1.0, 0.0),
        Check("quadrant", -0.5, 0.0),
        Check("rect", -0.5, 0.0),
        Check("rect", INF, 0.0),
    )
    models = {
        "cev_xy": ModelSpec("cev_xy", q_cev, s9_global_measure(),
                            _localized_prelimit(lambda t: 1.0, lambda t: 0.0, everywhere), grid),
        "cev_xy:local1": ModelSpec("cev_xy:local1", q1, s9_local_measure(0),
                                   _localized_prelimit(lambda t: 1.0 / t, lambda t: 1.0, (0.5, 1.5)),
                                   local_checks, neighborhood=(0.5, 1.5)),
        "cev_xy:local2": ModelSpec("cev_xy:local2", q2, s9_local_measure(1),
                                   _localized_prelimit(lambda t: t ** -2.0, lambda t: 2.0, (1.5, 2.0)),
                                   local_checks, neighborhood=(1.5, 2.0)),
        "mevt": ModelSpec("mevt", q_mevt, s9_mevt_measure(), _s9_mevt, (
            Check("survival", 0.0, 0.0),
            Check("survival", -1.0, 1.0),
            Check("survival", 0.25, 0.0),
            Check("x_tail", 0.0, 0.0),
        )),
    }
    return Scenario(
        "S9", "Mixture with two accumulation points: localized versus global limits",
        _s9_draw, models,
        params={"omega": list(OMEGA), "tau": list(TAUS), "gamma_y": 1.0, "g_i": "y^-tau_i"},
        index=index,
    )


__all__ = ["build_s9", "OMEGA", "TAUS", "component_probability", "s9_global_measure", "s9_local_measure",
           "s9_mevt_measure"]
