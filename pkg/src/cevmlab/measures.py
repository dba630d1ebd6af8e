"""Closed-form tail measures on compactified rectangles.

A :class:`LimitMeasure` is a finite sum of components, each evaluated in
closed form on the two generating set families

* rectangles ``[-inf, x] x (y, inf]``  (:meth:`BaseMeasure.rect_mass`), and
* quadrants ``(x, inf] x (y, inf]``    (:meth:`BaseMeasure.quadrant_mass`),

plus slice masses.  Mass on the vertical lines ``{-inf} x .`` and
``{+inf} x .`` is kept apart from the finite components so that the two
flavours of the no-mass-at-infinity condition can be checked.

Boundary conventions: x-intervals are closed on the right, y-intervals are
open on the left.  An atom located exactly at a queried ``x`` is included
in the rectangle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .margins import DomainError, EviSupport, Interval, gev_tail, support_interval

INF = math.inf


def _num(v):
    """JSON-safe float."""
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


# --------------------------------------------------------------------------
# named y-tail measures


@dataclass(frozen=True)
class YTail:
    """Tail measure in the conditioning coordinate.

    ``kind="gev"`` gives ``nu(y, inf] = (1 + gamma y)^(-1/gamma)`` on
    ``E^(gamma)``; ``kind="pareto"`` gives ``nu(y, inf] = 1/y`` on ``(0, inf)``.
    """

    kind: str = "gev"
    gamma: float = 1.0

    @property
    def support(self) -> Interval:
        if self.kind == "pareto":
            return Interval(0.0, INF)
        return support_interval(self.gamma)

    def __call__(self, y: float) -> float:
        supp = self.support
        if y >= supp.upper:
            return 0.0
        if y <= supp.lower:
            return INF
        if self.kind == "pareto":
            return 1.0 / y
        return float(gev_tail(self.gamma, y))

    @property
    def name(self) -> str:
        if self.kind == "pareto":
            return "nu_tilde_1"
        g = self.gamma
        if g == 1:
            return "nu_1"
        if g == -1:
            return "nu_-1"
        return f"gev({g:g})"

    def describe(self):
        return {"name": self.name, "kind": self.kind, "gamma": self.gamma}


NU_1 = YTail("gev", 1.0)
NU_MINUS_1 = YTail("gev", -1.0)
NU_GUMBEL = YTail("gev", 0.0)
NU_TILDE_1 = YTail("pareto", 1.0)


# --------------------------------------------------------------------------
# components


class Component:
    """One summand of a limit measure.  Subclasses return plain floats."""

    kind = "abstract"

    def rect(self, x: float, y: float) -> float:  # [-inf, x] x (y, inf]
        raise NotImplementedError

    def quad(self, x: float, y: float) -> float:  # (x, inf] x (y, inf]
        raise NotImplementedError

    def y_tail(self, y: float) -> float:
        raise NotImplementedError

    def x_tail(self, x: float) -> float:  # (x, inf] x [q_Y, inf]
        raise NotImplementedError

    def describe(self) -> dict:
        return {"kind": self.kind}


def _wmul(w, v):
    # weight 0 times an infinite tail is 0
    return 0.0 if w == 0 else w * v


@dataclass(frozen=True)
class ProductComponent(Component):
    """``(sum_i w_i delta_{a_i} + w G) (x) nu`` with finite atom locations.

    ``x_cdf`` is an optional continuous distribution function on the real
    line carrying total weight ``x_weight``.
    """

    atoms: tuple = ()
    tail: YTail = NU_1
    x_cdf: Callable[[float], float] | None = None
    x_weight: float = 0.0
    label: str = ""

    kind = "product"

    def __post_init__(self):
        for loc, w in self.atoms:
            if not math.isfinite(loc):
                raise ValueError("atoms at +-inf belong in the measure's infinity slots")
            if w < 0:
                raise ValueError("negative atom weight")

    def _below(self, x):
        m = sum(w for loc, w in self.atoms if loc <= x)
        if self.x_cdf is not None and self.x_weight:
            m += self.x_weight * (1.0 if x == INF else 0.0 if x == -INF else self.x_cdf(x))
        return m

    @property
    def total(self):
        return sum(w for _, w in self.atoms) + (self.x_weight if self.x_cdf is not None else 0.0)

    def rect(self, x, y):
        return _wmul(self._below(x), self.tail(y))

    def quad(self, x, y):
        return _wmul(self.total - self._below(x), self.tail(y))

    def y_tail(self, y):
        return _wmul(self.total, self.tail(y))

    def x_tail(self, x):
        return _wmul(self.total - self._below(x), INF)

    def describe(self):
        d = {
            "kind": self.kind,
            "atoms": [[_num(a), w] for a, w in self.atoms],
            "y_tail": self.tail.describe(),
        }
        if self.x_cdf is not None:
            d["x_density_weight"] = self.x_weight
        if self.label:
            d["label"] = self.label
        return d


@dataclass(frozen=True)
class CurveCoord:
    """Monotone coordinate ``s -> value`` of a curve parametrization.

    ``direction`` is +1 (increasing), -1 (decreasing) or 0 (constant
    ``value``).  ``lo``/``hi`` are the infimum/supremum of the coordinate
    over the parameter range, ``inv`` its inverse on ``(lo, hi)``.
    """

    direction: int
    fn: Callable[[float], float] | None = None
    inv: Callable[[float], float] | None = None
    lo: float = -INF
    hi: float = INF
    value: float = 0.0

    @classmethod
    def increasing(cls, fn, inv, lo=-INF, hi=INF):
        return cls(1, fn, inv, lo, hi)

    @classmethod
    def decreasing(cls, fn, inv, lo=-INF, hi=INF):
        return cls(-1, fn, inv, lo, hi)

    @classmethod
    def constant(cls, value):
        return cls(0, None, None, value, value, value)

    def __call__(self, s):
        return self.value if self.direction == 0 else self.fn(s)


@dataclass(frozen=True)
class CurveComponent(Component):
    """Mass on ``{(x(s), y(s)) : s > s_min}`` with ``mu{s > r} = h(r)``.

    ``h`` must be nonincreasing with ``h(r) -> 0``; it may be infinite at
    ``s_min``.
    """

    x: CurveCoord
    y: CurveCoord
    h: Callable[[float], float]
    s_min: float = 0.0
    label: str = ""
    params: dict = field(default_factory=dict)

    kind = "curve"

    def _above(self, c: CurveCoord, v: float):
        """Parameter interval (a, b) on which ``c(s) > v``."""
        s0 = self.s_min
        if c.direction == 0:
            return (s0, INF) if c.value > v else (s0, s0)
        if c.direction > 0:
            if v == -INF or v < c.lo:
                return (s0, INF)
            if v >= c.hi:
                return (INF, INF)
            return (max(s0, c.inv(v)), INF)
        if v >= c.hi:
            return (s0, s0)
        if v == -INF or v < c.lo:
            return (s0, INF)
        return (s0, max(s0, c.inv(v)))

    def _atmost(self, c: CurveCoord, v: float):
        a, b = self._above(c, v)
        s0 = self.s_min
        if c.direction == 0:
            return (s0, s0) if b > a else (s0, INF)
        if c.direction > 0:
            return (s0, a)
        return (b, INF)

    def _mass(self, iv):
        a, b = iv
        if not b > a:
            return 0.0
        ha = self.h(a)
        hb = 0.0 if b == INF else self.h(b)
        if ha == INF:
            return INF
        return max(ha - hb, 0.0)

    @staticmethod
    def _cap(i, j):
        return (max(i[0], j[0]), min(i[1], j[1]))

    def rect(self, x, y):
        return self._mass(self._cap(self._atmost(self.x, x), self._above(self.y, y)))

    def quad(self, x, y):
        return self._mass(self._cap(self._above(self.x, x), self._above(self.y, y)))

    def y_tail(self, y):
        return self._mass(self._above(self.y, y))

    def x_tail(self, x):
        return self._mass(self._above(self.x, x))

    def describe(self):
        d = {"kind": self.kind, "s_min": _num(self.s_min)}
        if self.label:
            d["support"] = self.label
        if self.params:
            d["params"] = self.params
        return d


@dataclass(frozen=True)
class PointMass(Component):
    x0: float
    y0: float
    weight: float = 1.0

    kind = "atom"

    def rect(self, x, y):
        return self.weight if (self.x0 <= x and self.y0 > y) else 0.0

    def quad(self, x, y):
        return self.weight if (self.x0 > x and self.y0 > y) else 0.0

    def y_tail(self, y):
        return self.weight if self.y0 > y else 0.0

    def x_tail(self, x):
        return self.weight if self.x0 > x else 0.0

    def describe(self):
        return {"kind": self.kind, "at": [_num(self.x0), _num(self.y0)], "weight": self.weight}


@dataclass(frozen=True)
class DensityComponent(Component):
    """Absolutely continuous component given by closed-form set masses.

    ``rect_fn(x, y)`` is the mass of ``[-inf, x] x (y, inf]``; ``y_tail_fn``
    and ``x_tail_fn`` are the slice masses.  ``density`` is kept for
    numerical cross-checks and is not used in evaluation.
    """

    rect_fn: Callable[[float, float], float]
    y_tail_fn: Callable[[float], float]
    x_tail_fn: Callable[[float], float]
    density: Callable[[float, float], float] | None = None
    label: str = ""
    params: dict = field(default_factory=dict)

    kind = "density"

    def rect(self, x, y):
        return self.rect_fn(x, y)

    def quad(self, x, y):
        return max(self.y_tail_fn(y) - self.rect_fn(x, y), 0.0)

    def y_tail(self, y):
        return self.y_tail_fn(y)

    def x_tail(self, x):
        return self.x_tail_fn(x)

    def describe(self):
        d = {"kind": self.kind}
        if self.label:
            d["density"] = self.label
        if self.params:
            d["params"] = self.params
        return d


# --------------------------------------------------------------------------
# measures


class BaseMeasure:
    """Evaluation interface shared by limit measures and derived views."""

    x_support: Interval
    y_support: Interval
    standardized: bool = False
    name: str = ""

    def _check_y(self, y):
        if math.isnan(y) or y <= self.y_support.lower:
            raise DomainError(f"y={y} at or below the lower endpoint {self.y_support.lower}")

    def rect_mass(self, x: float, y: float) -> float:
        """``mu([-inf, x] x (y, inf])``."""
        raise NotImplementedError

    def quadrant_mass(self, x: float, y: float) -> float:
        """``mu((x, inf] x (y, inf])``."""
        raise NotImplementedError

    def marginal_x_tail(self, x: float) -> float:
        """``mu((x, inf] x [q_Y, inf])``."""
        raise NotImplementedError

    def marginal_y_tail(self, y: float) -> float:
        return self.rect_mass(INF, y)

    def survival_complement(self, x: float, y: float) -> float:
        """Mass of the complement of ``[q_X, x] x [q_Y, y]`` (inclusion-exclusion)."""
        if not (self.x_support.contains(x) and self.y_support.contains(y)):
            raise DomainError(f"({x}, {y}) outside the support interior")
        px, py = self.marginal_x_tail(x), self.marginal_y_tail(y)
        if math.isinf(px) or math.isinf(py):
            return INF
        return px + py - self.quadrant_mass(x, y)

    def mass_at_x_infinity(self, y: float) -> tuple[float, float]:
        """Masses of ``{-inf} x (y, inf]`` and ``{+inf} x (y, inf]``."""
        self._check_y(y)
        neg = self.rect_mass(-INF, y)
        pos = self.marginal_y_tail(y) - self.rect_mass(np.finfo(float).max, y)
        return neg, max(pos, 0.0)

    def satisfies_ii_star(self, y_grid: Sequence[float] | None = None) -> bool:
        if y_grid is None:
            y_grid = _default_y_grid(self.y_support)
        return all(max(self.mass_at_x_infinity(y)) == 0 for y in y_grid)

    def to_json(self) -> dict:
        raise NotImplementedError


def _default_y_grid(supp: Interval):
    lo, hi = supp.lower, supp.upper
    if math.isinf(lo) and math.isinf(hi):
        return [-1.0, 0.0, 1.0, 3.0]
    if math.isinf(hi):
        return [lo + d for d in (0.25, 1.0, 2.0, 4.0)]
    if math.isinf(lo):
        return [hi - d for d in (0.25, 1.0, 2.0, 4.0)]
    return list(np.linspace(lo, hi, 6)[1:-1])


@dataclass(frozen=True)
class LimitMeasure(BaseMeasure):
    """Sum of closed-form components plus mass on the lines ``x = +-inf``.

    ``neg_inf`` and ``pos_inf`` are tuples of ``(weight, YTail)``.
    """

    components: tuple = ()
    x_support: Interval = Interval(-INF, INF)
    y_support: Interval = field(default_factory=lambda: support_interval(1.0))
    neg_inf: tuple = ()
    pos_inf: tuple = ()
    standardized: bool = False
    name: str = ""

    def _line(self, slot, y):
        return sum(_wmul(w, tail(y)) for w, tail in slot)

    def rect_mass(self, x, y):
        self._check_y(y)
        m = sum(c.rect(x, y) for c in self.components) + self._line(self.neg_inf, y)
        if x == INF:
            m += self._line(self.pos_inf, y)
        return m

    def quadrant_mass(self, x, y):
        self._check_y(y)
        m = sum(c.quad(x, y) for c in self.components)
        if x < INF:
            m += self._line(self.pos_inf, y)
        return m

    def marginal_x_tail(self, x):
        m = sum(c.x_tail(x) for c in self.components)
        if x < INF and any(w > 0 for w, _ in self.pos_inf):
            m = INF
        return m

    def mass_at_x_infinity(self, y):
        self._check_y(y)
        return self._line(self.neg_inf, y), self._line(self.pos_inf, y)

    def satisfies_ii_star(self, y_grid=None):
        return not any(w > 0 for w, _ in self.neg_inf + self.pos_inf)

    def to_json(self):
        def sup(s):
            d = {"lower": _num(s.lower), "upper": _num(s.upper)}
            if isinstance(s, EviSupport):
                d["gamma"] = s.gamma
            return d

        return {
            "name": self.name,
            "standardized": self.standardized,
            "x_support": sup(self.x_support),
            "y_support": sup(self.y_support),
            "components": [c.describe() for c in self.components],
            "mass_at_minus_inf": [[w, t.describe()] for w, t in self.neg_inf],
            "mass_at_plus_inf": [[w, t.describe()] for w, t in self.pos_inf],
            "condition_ii_star": self.satisfies_ii_star(),
        }


# --------------------------------------------------------------------------
# structural checks


def rect_mass(m: BaseMeasure, x, y):
    return m.rect_mass(x, y)


def quadrant_mass(m: BaseMeasure, x, y):
    return m.quadrant_mass(x, y)


def survival_complement(m: BaseMeasure, x, y):
    return m.survival_complement(x, y)


def marginal_x_tail(m: BaseMeasure, x):
    return m.marginal_x_tail(x)


def marginal_y_tail(m: BaseMeasure, y):
    return m.marginal_y_tail(y)


def is_product(m: BaseMeasure, grid, tol: float = 1e-9) -> bool:
    """Whether ``x -> mu([-inf, x] x (y, inf])`` is the same law for every probed y.

    Uses a single reference slice at the midpoint of the probed y-range.
    """
    pts = [(float(x), float(y)) for x, y in grid]
    ys = [y for _, y in pts]
    y0 = 0.5 * (min(ys) + max(ys))
    tot0 = m.rect_mass(INF, y0)
    for x, y in pts:
        lhs = m.rect_mass(x, y) * tot0
        rhs = m.rect_mass(x, y0) * m.rect_mass(INF, y)
        if not abs(lhs - rhs) <= tol * max(1.0, abs(lhs), abs(rhs)):
            return False
    return True


def homogeneity_defect(m: BaseMeasure, scale: float, grid) -> float:
    """``max |mu(sA) - mu(A)/s|`` over quadrants and survival sets on ``grid``."""
    if not m.standardized:
        raise DomainError("homogeneity is defined for the standardized form only")
    s = float(scale)
    defect = 0.0
    for x, y in grid:
        pairs = [(m.quadrant_mass(s * x, s * y), m.quadrant_mass(x, y))]
        try:
            pairs.append((m.survival_complement(s * x, s * y), m.survival_complement(x, y)))
        except DomainError:
            pass
        for scaled, base in pairs:
            if math.isfinite(scaled) and math.isfinite(base):
                defect = max(defect, abs(scaled - base / s))
    return defect


def is_nondegenerate(m: BaseMeasure, x_grid, y_grid) -> bool:
    """Finite-grid proxy: every y-slice puts different mass below two grid x values."""
    for y in y_grid:
        vals = {round(m.rect_mass(x, y), 14) for x in x_grid}
        if len(vals) < 2:
            return False
    return True
