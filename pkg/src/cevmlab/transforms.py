"""Standardization plans and the CEVM/MEVT measure relations.

* :func:`plan_standardization` decides whether ``X`` can be standardized
  under a registered normalization and constructs the monotone map ``f``.
* :func:`pushforward_standardized` maps a CEVM limit through
  ``T(x, y) = (phi(x), y)`` with ``phi = max(x, 0)^(1/rho)`` or
  ``|x|^(1/rho)``.
* :func:`cev_pair_from_mevt`, :func:`mevt_from_cev_pair` and
  :func:`overlap_consistency` relate a bivariate extreme value limit to the
  two conditional limits obtained by conditioning on either coordinate.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .margins import DomainError, EviSupport, Interval, support_interval
from .measures import (
    INF,
    BaseMeasure,
    CurveComponent,
    CurveCoord,
    LimitMeasure,
    ProductComponent,
    YTail,
    _default_y_grid,
)
from .norming import NormalizingQuadruple, check_equivalence, profile_regular_variation
from .scenarios.inversion import inverse_monotone

RHO_ZERO_TOL = 1e-6
CONSISTENCY_TOL = 1e-9
LOG_T_RANGE = (-700.0, 700.0)


class LostMassWarning(UserWarning):
    """Mass on the discarded half-line collapses onto ``x = 0`` under ``T``."""


class ConsistencyError(ValueError):
    """Two CEVM limits disagree on their common quadrant."""


class PreconditionError(ValueError):
    """Inputs violate a hypothesis of the construction."""


# --------------------------------------------------------------------------
# standardization


@dataclass(frozen=True)
class StandardizationPlan:
    """Outcome of :func:`plan_standardization`.

    ``f`` is the standardizing map (absent when ``case == 'impossible'``),
    ``scale`` the factor ``alpha(1)`` divided out so that the rescaled
    ``alpha`` satisfies ``alpha(1) = 1``.
    """

    case: str  # case_i | case_ii_left | case_ii_right | impossible
    f: Callable | None = None
    rho: float = math.nan
    beta0: float | None = None
    scale: float = 1.0
    reason: str = ""
    profile: object = None

    @property
    def pushforward_exponent(self) -> float:
        return 1.0 / self.rho if self.rho and math.isfinite(self.rho) else math.nan

    @property
    def feasible(self) -> bool:
        return self.case != "impossible"

    def phi(self, x: float) -> float:
        """The first coordinate of ``T``."""
        e = self.pushforward_exponent
        if self.case == "case_i":
            return max(x, 0.0) ** e
        if self.case in ("case_ii_left", "case_ii_right"):
            return _safe_pow(abs(x), e)
        raise DomainError("no pushforward for an impossible plan")

    def to_json(self) -> dict:
        d = {"case": self.case, "reason": self.reason}
        if math.isfinite(self.rho):
            d["rho"] = self.rho
            d["pushforward_exponent"] = self.pushforward_exponent
        if self.beta0 is not None:
            d["beta0"] = self.beta0
        if self.feasible:
            d["alpha_scale"] = self.scale
        if self.profile is not None:
            d["profile"] = self.profile.to_json()
        return d


def _safe_pow(v: float, e: float) -> float:
    if v == 0.0:
        return INF if e < 0 else 0.0
    if v == INF:
        return 0.0 if e < 0 else INF
    return v ** e


def alpha_inverse(alpha: Callable, scale: float = 1.0) -> Callable[[float], float]:
    """Generalized inverse of the monotone ``alpha / scale``, solved in ``log t``.

    The bracket ``[-w, w]`` in ``log t`` starts at ``w = 1`` and doubles until
    it contains the target.
    """

    def la(L):
        return math.log(float(alpha(math.exp(L))) / scale)

    def inv(s: float) -> float:
        if not s > 0:
            raise DomainError("alpha inverse needs a positive argument")
        target = math.log(s)
        w = 1.0
        while True:
            lo, hi = la(-w), la(w)
            if min(lo, hi) <= target <= max(lo, hi):
                break
            if w >= LOG_T_RANGE[1]:
                raise DomainError(f"alpha^<-({s:g}) outside the representable range")
            w = min(2.0 * w, LOG_T_RANGE[1])
        return math.exp(inverse_monotone(la, target, (-w, w)))

    return inv


def _constant_beta(q: NormalizingQuadruple, t_grid) -> float | None:
    b = np.asarray(q.beta(t_grid), dtype=float) * np.ones_like(t_grid)
    if np.ptp(b) <= 1e-12 * max(1.0, abs(b[0])):
        return float(b[0])
    return None


def plan_standardization(q: NormalizingQuadruple, x_range: Interval | None, mu_star: BaseMeasure | None = None,
                         *, t_grid: Sequence[float] | None = None, y_grid: Sequence[float] | None = None
                         ) -> StandardizationPlan:
    """Decide between the two standardizable cases and build ``f``.

    case_i: ``alpha`` regularly varying with ``rho > 0``, ``beta = 0`` and
    positive limit mass on ``(0, inf) x (y, inf]``; ``f = alpha^<-`` on
    ``[1, inf)`` and ``1/(2 - x)`` below 1.  case_ii: ``rho < 0``,
    ``beta = beta0`` constant and ``x_range`` on one side of ``beta0``;
    ``f(x) = alpha^<-(beta0 - x)`` (left) or ``alpha^<-(x - beta0)``
    (right).  Everything else is impossible, with a reason.
    """
    t = np.asarray(t_grid if t_grid is not None else 10.0 ** np.arange(2, 11), dtype=float)
    prof = profile_regular_variation(q, t_grid=t)
    if not prof.regular:
        return StandardizationPlan("impossible", reason=f"alpha not regularly varying: {prof.reason}", profile=prof)
    rho = prof.rho
    if abs(rho) <= RHO_ZERO_TOL:
        return StandardizationPlan("impossible", rho=rho, reason="rho = 0 is excluded (beta not Pi-varying)",
                                   profile=prof)
    beta0 = _constant_beta(q, t)
    scale = float(q.alpha(1.0))
    inv = alpha_inverse(q.alpha, scale)
    if rho > 0:
        if beta0 is None or beta0 != 0.0:
            return StandardizationPlan("impossible", rho=rho, reason="rho > 0 requires beta = 0", profile=prof)
        if mu_star is not None:
            ys = y_grid if y_grid is not None else _default_y_grid(mu_star.y_support)
            if not any(mu_star.quadrant_mass(0.0, y) > 0 for y in ys):
                return StandardizationPlan("impossible", rho=rho, beta0=0.0,
                                           reason="no limit mass on (0, inf) x (y, inf]", profile=prof)

        def f_i(x):
            return inv(x) if x >= 1.0 else 1.0 / (2.0 - x)

        return StandardizationPlan("case_i", _vectorize(f_i), rho, 0.0, scale, "alpha -> inf, beta = 0", prof)

    if beta0 is None:
        return StandardizationPlan("impossible", rho=rho, reason="rho < 0 requires a constant beta", profile=prof)
    if x_range is None:
        return StandardizationPlan("impossible", rho=rho, beta0=beta0, reason="range of X unknown", profile=prof)
    if x_range.upper <= beta0:
        return StandardizationPlan("case_ii_left", _vectorize(lambda x: inv(beta0 - x)), rho, beta0, scale,
                                   "range of X lies below beta0", prof)
    if x_range.lower >= beta0:
        return StandardizationPlan("case_ii_right", _vectorize(lambda x: inv(x - beta0)), rho, beta0, scale,
                                   "range of X lies above beta0", prof)
    return StandardizationPlan("impossible", rho=rho, beta0=beta0,
                               reason=f"range of X ({x_range.lower:g}, {x_range.upper:g}) straddles beta0={beta0:g}",
                               profile=prof)


def _vectorize(fn):
    def f(x):
        a = np.asarray(x, dtype=float)
        if a.ndim == 0:
            return fn(float(a))
        return np.array([fn(float(v)) for v in a.ravel()]).reshape(a.shape)

    return f


@dataclass(frozen=True)
class PushforwardMeasure(BaseMeasure):
    """``(mu*)^T`` evaluated through the base measure; standardized.

    ``degenerate`` is set when no base mass reaches the kept half-line.
    """

    base: BaseMeasure = None
    plan: StandardizationPlan = None
    degenerate: bool = False
    lost_mass: float = 0.0
    x_support: Interval = Interval(0.0, INF)
    y_support: Interval = field(default_factory=lambda: support_interval(1.0))
    standardized: bool = True
    name: str = ""

    def _pre(self, xp: float) -> float:
        """Base-side x level corresponding to ``xp`` (for the increasing maps)."""
        r = self.plan.rho
        if self.plan.case == "case_i":
            return _safe_pow(xp, r)
        return -_safe_pow(xp, r)

    def rect_mass(self, x, y):
        self._check_y(y)
        if x < 0:
            return 0.0
        if x == INF:
            return self.base.rect_mass(INF, y)
        if self.plan.case == "case_ii_right":
            # phi decreasing: {phi <= x} = {base x >= x^rho}
            return self.base.quadrant_mass(_safe_pow(x, self.plan.rho), y)
        return self.base.rect_mass(self._pre(x), y)

    def quadrant_mass(self, x, y):
        self._check_y(y)
        if self.plan.case == "case_ii_right":
            return self.base.rect_mass(INF, y) - self.rect_mass(max(x, 0.0), y)
        if x < 0:
            return self.base.rect_mass(INF, y)
        return self.base.quadrant_mass(self._pre(x), y)

    def marginal_x_tail(self, x):
        if self.plan.case == "case_ii_right":
            raise NotImplementedError("x-marginal of a decreasing pushforward is not tracked")
        return self.base.marginal_x_tail(self._pre(max(x, 0.0)))

    def to_json(self):
        return {"name": self.name, "pushforward_of": self.base.to_json(), "plan": self.plan.to_json(),
                "degenerate": self.degenerate, "lost_mass": self.lost_mass}


def pushforward_standardized(mu_star: BaseMeasure, plan: StandardizationPlan,
                             y_grid: Sequence[float] | None = None) -> PushforwardMeasure:
    """``(mu*)^T``; warns when case_i discards mass on ``x < 0``."""
    if not plan.feasible:
        raise DomainError(f"cannot push forward under an impossible plan: {plan.reason}")
    ys = list(y_grid) if y_grid is not None else _default_y_grid(mu_star.y_support)
    lost, degenerate = 0.0, False
    if plan.case == "case_i":
        below = np.nextafter(0.0, -1.0)
        lost = max(mu_star.rect_mass(below, y) for y in ys)
        degenerate = all(mu_star.quadrant_mass(0.0, y) == 0.0 for y in ys)
        if lost > 0:
            warnings.warn("mass on x < 0 collapses to x = 0: information about that side is lost",
                          LostMassWarning, stacklevel=2)
    return PushforwardMeasure(mu_star, plan, degenerate, lost, y_support=mu_star.y_support,
                              name=f"T-pushforward of {mu_star.name}")


# --------------------------------------------------------------------------
# CEVM <-> MEVT


@dataclass(frozen=True)
class ConditionedView(BaseMeasure):
    """``mu`` restricted to ``R x E^(gamma_Y)``: the CEVM limit given ``Y`` large."""

    mu: BaseMeasure = None
    x_support: Interval = Interval(-INF, INF)
    y_support: Interval = Interval(-INF, INF)
    name: str = ""

    def rect_mass(self, x, y):
        return self.mu.rect_mass(x, y)

    def quadrant_mass(self, x, y):
        return self.mu.quadrant_mass(x, y)

    def marginal_x_tail(self, x):
        return self.mu.marginal_x_tail(x)

    def mass_at_x_infinity(self, y):
        return self.mu.mass_at_x_infinity(y)

    def satisfies_ii_star(self, y_grid=None):
        return self.mu.satisfies_ii_star(y_grid)

    def to_json(self):
        return {"name": self.name, "restriction_of": self.mu.to_json(), "condition_ii_star": self.satisfies_ii_star()}


@dataclass(frozen=True)
class SwappedMeasure(BaseMeasure):
    """``mu^S`` with ``S(x, y) = (y, x)``; coordinates ``(Y, X)``."""

    mu: BaseMeasure = None
    x_support: Interval = Interval(-INF, INF)
    y_support: Interval = Interval(-INF, INF)
    name: str = ""

    def rect_mass(self, u, v):
        # mu{Y <= u, X > v}
        self._check_y(v)
        if u == INF:
            return self.mu.marginal_x_tail(v)
        if u <= self.mu.y_support.lower:
            return 0.0
        tail = self.mu.marginal_x_tail(v)
        if math.isinf(tail):
            return INF
        return max(tail - self.mu.quadrant_mass(v, u), 0.0)

    def quadrant_mass(self, u, v):
        self._check_y(v)
        if u <= self.mu.y_support.lower:
            return self.mu.marginal_x_tail(v)
        return self.mu.quadrant_mass(v, u)

    def marginal_x_tail(self, u):
        return self.mu.marginal_y_tail(u)

    def marginal_y_tail(self, v):
        return self.mu.marginal_x_tail(v)

    def to_json(self):
        return {"name": self.name, "swap_of": self.mu.to_json()}


def _check_nonpositive(g: EviSupport, label: str):
    if g.gamma > 0:
        raise PreconditionError(f"{label}: extreme value index {g.gamma:g} > 0; the construction needs gamma <= 0")


def cev_pair_from_mevt(mu: BaseMeasure, gx: EviSupport, gy: EviSupport, y_grid=None):
    """Both conditional limits ``(mu_{X,Y>}, mu_{Y,X>})`` of a bivariate extreme value limit.

    Requires ``gamma_X, gamma_Y <= 0`` and some mass on the upper quadrant.
    Each output carries the (ii*) flag via :meth:`satisfies_ii_star`.
    """
    _check_nonpositive(gx, "X")
    _check_nonpositive(gy, "Y")
    ys = y_grid if y_grid is not None else _default_y_grid(gy)
    if not any(mu.marginal_y_tail(y) > 0 for y in ys):
        raise PreconditionError("limit measure is degenerate on the probed grid")
    xy = ConditionedView(mu, x_support=Interval(-INF, INF), y_support=gy, name=f"{mu.name} | Y large")
    yx = SwappedMeasure(mu, x_support=Interval(-INF, INF), y_support=gx, name=f"{mu.name} | X large (swapped)")
    return xy, yx


def overlap_consistency(mu_xy: BaseMeasure, mu_yx: BaseMeasure, grid) -> float:
    """``max |mu_xy((x, inf] x (y, inf]) - mu_yx((y, inf] x (x, inf])|`` over ``grid``."""
    defect = 0.0
    for x, y in grid:
        a = mu_xy.quadrant_mass(x, y)
        b = mu_yx.quadrant_mass(y, x)
        if math.isinf(a) and math.isinf(b):
            continue
        defect = max(defect, abs(a - b))
    return defect


def default_overlap_grid(gx: Interval, gy: Interval) -> list:
    xs = _default_y_grid(gx)
    ys = _default_y_grid(gy)
    return [(x, y) for x in xs for y in ys]


@dataclass(frozen=True)
class ReconstructedMeasure(BaseMeasure):
    """Bivariate limit assembled from two conditional limits.

    ``mu([q_X, x] x (y, inf]) = mu_xy([-inf, x] x (y, inf])`` and
    ``mu((x, inf] x [q_Y, y]) = mu_yx([-inf, y] x (x, inf])``; arguments
    below the lower endpoints are projected onto them first.
    """

    mu_xy: BaseMeasure = None
    mu_yx: BaseMeasure = None
    x_support: Interval = Interval(-INF, INF)
    y_support: Interval = Interval(-INF, INF)
    name: str = ""

    def _pr(self, x, y):
        return max(x, self.x_support.lower), max(y, self.y_support.lower)

    def rect_mass(self, x, y):
        x, y = self._pr(x, y)
        self._check_y(y)
        return self.mu_xy.rect_mass(x, y)

    def quadrant_mass(self, x, y):
        x, y = self._pr(x, y)
        if y <= self.y_support.lower:
            return self.marginal_x_tail(x)
        return self.mu_xy.quadrant_mass(x, y)

    def lower_band_mass(self, x, y):
        """``mu((x, inf] x [q_Y, y])`` from the swapped limit."""
        x, y = self._pr(x, y)
        return self.mu_yx.rect_mass(y, x)

    def marginal_x_tail(self, x):
        x = max(x, self.x_support.lower)
        return self.mu_yx.marginal_y_tail(x)

    def marginal_y_tail(self, y):
        return self.mu_xy.marginal_y_tail(max(y, self.y_support.lower))

    def boundary_masses(self, x_grid=None, y_grid=None) -> tuple[float, float]:
        """Masses on ``{q_X} x (y, inf]`` and ``(x, inf] x {q_Y}``, maximized over grids."""
        xs = x_grid if x_grid is not None else _default_y_grid(self.x_support)
        ys = y_grid if y_grid is not None else _default_y_grid(self.y_support)
        qx, qy = self.x_support.lower, self.y_support.lower
        mx = max(self.mu_xy.rect_mass(qx, y) for y in ys)
        my = max(self.mu_yx.rect_mass(qy, x) for x in xs)
        return mx, my

    def to_json(self):
        return {"name": self.name, "from": [self.mu_xy.to_json(), self.mu_yx.to_json()]}


def mevt_from_cev_pair(mu_xy: BaseMeasure, mu_yx: BaseMeasure, gx: EviSupport, gy: EviSupport,
                       grid=None, tol: float = CONSISTENCY_TOL) -> ReconstructedMeasure:
    """Assemble the bivariate limit; raises :class:`ConsistencyError` if the overlap defect exceeds ``tol``."""
    _check_nonpositive(gx, "X")
    _check_nonpositive(gy, "Y")
    g = grid if grid is not None else default_overlap_grid(gx, gy)
    d = overlap_consistency(mu_xy, mu_yx, g)
    if d > tol:
        raise ConsistencyError(f"conditional limits disagree on the upper quadrant (defect {d:.3g})")
    return ReconstructedMeasure(mu_xy, mu_yx, x_support=gx, y_support=gy, name="reconstructed mu")


# --------------------------------------------------------------------------
# synthetic measures with non-positive indices


def gumbel_diagonal() -> LimitMeasure:
    """Mass ``e^-r`` on ``{(s, s) : s > r}``; both margins Gumbel type."""
    ident = CurveCoord.increasing(lambda s: s, lambda v: v, -INF, INF)
    c = CurveComponent(ident, ident, lambda r: math.exp(-r) if r < 700 else 0.0, -INF, label="{(s, s)}")
    return LimitMeasure((c,), x_support=support_interval(0.0), y_support=support_interval(0.0),
                        name="Gumbel diagonal")


def _logistic_cdf(x):
    if x == INF:
        return 1.0
    if x == -INF:
        return 0.0
    return 1.0 / (1.0 + math.exp(-x))


def product_plus_diagonal() -> LimitMeasure:
    """Half Gumbel diagonal plus half logistic law times the Gumbel tail."""
    ident = CurveCoord.increasing(lambda s: s, lambda v: v, -INF, INF)
    diag = CurveComponent(ident, ident, lambda r: 0.5 * math.exp(-r) if r < 700 else 0.0, -INF, label="{(s, s)}/2")
    prod = ProductComponent(atoms=(), tail=YTail("gev", 0.0), x_cdf=_logistic_cdf, x_weight=0.5,
                            label="logistic x Lambda / 2")
    return LimitMeasure((diag, prod), x_support=support_interval(0.0), y_support=support_interval(0.0),
                        name="product plus diagonal")


def atomic_mix() -> LimitMeasure:
    """Atoms at ``x = -1/2, 1/2`` (weights 1/4, 3/4) times the reversed-Weibull tail."""
    prod = ProductComponent(atoms=((-0.5, 0.25), (0.5, 0.75)), tail=YTail("gev", -1.0))
    return LimitMeasure((prod,), x_support=support_interval(-1.0), y_support=support_interval(-1.0),
                        name="atomic mix")


def minus_infinity_line() -> LimitMeasure:
    """All mass on ``{-inf} x (y, inf]`` with the Gumbel tail: zero joint mass."""
    return LimitMeasure((), x_support=support_interval(0.0), y_support=support_interval(0.0),
                        neg_inf=((1.0, YTail("gev", 0.0)),), name="mass at x = -inf")


# --------------------------------------------------------------------------
# scenario relations

OVERLAP_GRID = tuple((x, y) for x in (0.0, 0.5, 1.5, 2.5) for y in (-0.5, 0.0, 0.5))
OVERLAP_FAILURE = 0.1


def evaluate_relation(scenario, relation) -> dict:
    """Evaluate a declared cross-model relation; ``passed`` compares with its expectation."""
    a, b = (scenario.model(tag) for tag in relation.tags)
    out = {"scenario": scenario.id, "kind": relation.kind, "models": list(relation.tags),
           "expected": relation.expected}
    if relation.kind == "equivalence":
        eq = check_equivalence(a.quadruple, b.quadruple)
        out.update(observed=eq.verdict, constants=eq.to_json())
    elif relation.kind == "overlap":
        d = overlap_consistency(a.measure, b.measure, OVERLAP_GRID)
        out.update(observed="inconsistent" if d > OVERLAP_FAILURE else "consistent", defect=d)
    else:
        raise ValueError(f"unknown relation kind {relation.kind!r}")
    out["passed"] = out["observed"] == relation.expected
    return out


__all__ = [
    "StandardizationPlan", "PushforwardMeasure", "ConditionedView", "SwappedMeasure", "ReconstructedMeasure",
    "LostMassWarning", "ConsistencyError", "PreconditionError", "plan_standardization", "pushforward_standardized",
    "cev_pair_from_mevt", "mevt_from_cev_pair", "overlap_consistency", "default_overlap_grid", "alpha_inverse",
    "evaluate_relation", "gumbel_diagonal", "product_plus_diagonal", "atomic_mix", "minus_infinity_line",
]
