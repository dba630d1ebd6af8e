"""Normalizing functions and their regular-variation profiles.

A :class:`NormalizingQuadruple` bundles closed-form evaluators for the scale
and shift of both coordinates.  :func:`profile_regular_variation` measures
the index ``rho`` and the shift constant ``C`` of the pair ``(alpha, beta)``
along a t-grid; :func:`check_equivalence` compares two quadruples in the
convergence-to-types sense.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .margins import Interval, marginal_transform, support_interval

Fn = Callable[[float], float]

STABILIZATION_TOL = 1e-3
STABILIZATION_WINDOW = 5


def _const(v):
    return lambda t: v + 0.0 * np.asarray(t, dtype=float)


def _ident(t):
    return np.asarray(t, dtype=float)


@dataclass(frozen=True)
class NormalizingQuadruple:
    """Normalizers ``(alpha, beta, c, d)`` targeting ``gamma_y`` (and optionally ``gamma_x``).

    ``standard_y`` marks the Pareto-scaled form ``Y*/t`` whose limit lives on
    ``(0, inf)`` instead of ``E^(gamma_y)``.  ``labels`` carry human-readable
    formulas for reports.
    """

    alpha: Fn = _const(1.0)
    beta: Fn = _const(0.0)
    c: Fn = _ident
    d: Fn = _ident
    gamma_y: float = 1.0
    gamma_x_hint: float | None = None
    t_min: float = 1.0
    standard_y: bool = False
    labels: dict = field(default_factory=dict)

    def y_support(self) -> Interval:
        if self.standard_y:
            return Interval(0.0, math.inf)
        return support_interval(self.gamma_y)

    def normalize_x(self, x, t):
        return (np.asarray(x, dtype=float) - self.beta(t)) / self.alpha(t)

    def normalize_y(self, y, t):
        return (np.asarray(y, dtype=float) - self.d(t)) / self.c(t)

    def validate(self, t_grid: Sequence[float]) -> None:
        t = np.asarray(t_grid, dtype=float)
        if np.any(t < self.t_min):
            raise ValueError("t below the declared domain")
        vals = [np.broadcast_to(f(t), t.shape) for f in (self.alpha, self.beta, self.c, self.d)]
        if not all(np.all(np.isfinite(v)) for v in vals):
            raise ValueError("normalizing functions must be finite on the domain")
        if np.any(vals[0] <= 0) or np.any(vals[2] <= 0):
            raise ValueError("scales alpha and c must be positive")

    def describe(self) -> dict:
        d = {k: self.labels.get(k, "?") for k in ("alpha", "beta", "c", "d")}
        d["gamma_y"] = self.gamma_y
        if self.gamma_x_hint is not None:
            d["gamma_x"] = self.gamma_x_hint
        if self.standard_y:
            d["standard_y"] = True
        return d


def quadruple(alpha=None, beta=None, c=None, d=None, *, labels=None, **kw) -> NormalizingQuadruple:
    """Build a quadruple, accepting constants in place of functions."""

    def fn(v, default):
        if v is None:
            return default
        if callable(v):
            return v
        return _const(float(v))

    return NormalizingQuadruple(
        fn(alpha, _const(1.0)), fn(beta, _const(0.0)), fn(c, _ident), fn(d, _ident),
        labels=labels or {}, **kw,
    )


# --------------------------------------------------------------------------
# regular variation


@dataclass(frozen=True)
class RegVarProfile:
    """Measured ``rho`` and ``C`` with the full ratio trace.

    ``evidence`` holds ``(lambda, t, alpha(lambda t)/alpha(t))`` triples.  When
    ``regular`` is false, ``rho`` and ``c_shift`` are NaN and ``reason``
    explains which sequence failed to settle.
    """

    rho: float
    c_shift: float
    evidence: tuple
    regular: bool = True
    reason: str = ""

    def to_json(self):
        f = lambda v: None if not math.isfinite(v) else v  # noqa: E731
        return {
            "rho": f(self.rho),
            "C": f(self.c_shift),
            "regular": self.regular,
            "reason": self.reason,
        }


def profile_regular_variation(
    q: NormalizingQuadruple,
    lambdas: Sequence[float] = (0.5, 2.0),
    t_grid: Sequence[float] | None = None,
    tol: float = STABILIZATION_TOL,
) -> RegVarProfile:
    """Profile ``alpha(l t)/alpha(t) -> l^rho`` and ``(beta(l t) - beta(t))/alpha(t) -> C (l^rho - 1)/rho``.

    The log-ratio ``log(alpha(l t)/alpha(t)) / log l`` is tracked over the
    upper half of ``t_grid``; if its spread exceeds ``tol`` for some ``l`` the
    profile is returned flagged non-regular instead of with a fitted index.
    """
    if t_grid is None:
        t_grid = 10.0 ** np.arange(2, 11)
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or len(t) < 2 or np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must be increasing with at least two points")
    lams = [float(v) for v in lambdas if float(v) != 1.0]
    if any(v <= 0 for v in lams) or not lams:
        raise ValueError("lambdas must be positive and not all equal to one")

    a_t = np.asarray(q.alpha(t), dtype=float) * np.ones_like(t)
    b_t = np.asarray(q.beta(t), dtype=float) * np.ones_like(t)
    half = t.size // 2
    evidence = []
    rho_est, reason = [], ""
    for lam in lams:
        ratio = np.asarray(q.alpha(lam * t), dtype=float) / a_t
        evidence.extend((lam, float(tt), float(r)) for tt, r in zip(t, ratio))
        logr = np.log(ratio) / math.log(lam)
        top = logr[half:]
        if not np.all(np.isfinite(top)) or np.ptp(top) > tol:
            reason = f"alpha ratio does not settle at lambda={lam:g}"
            continue
        rho_est.append(float(np.mean(logr[-2:])))
    if reason:
        return RegVarProfile(math.nan, math.nan, tuple(evidence), False, reason)
    rho = float(np.mean(rho_est))

    cs = []
    for lam in lams:
        shift = (np.asarray(q.beta(lam * t), dtype=float) - b_t) / a_t
        denom = float(marginal_transform(rho, lam))
        c = shift / denom
        top = c[half:]
        if not np.all(np.isfinite(top)) or np.ptp(top) > tol * max(1.0, abs(top[-1])):
            return RegVarProfile(rho, math.nan, tuple(evidence), False,
                                 f"beta increments do not settle at lambda={lam:g}")
        cs.append(float(c[-1]))
    spread = max(cs) - min(cs)
    if spread > tol * max(1.0, max(abs(v) for v in cs)):
        return RegVarProfile(rho, math.nan, tuple(evidence), False, "shift constant depends on lambda")
    return RegVarProfile(rho, float(np.mean(cs)), tuple(evidence), True, "")


# --------------------------------------------------------------------------
# equivalence


@dataclass(frozen=True)
class EquivalenceConstants:
    A: float
    B: float
    C_pair: float
    D: float
    verdict: str  # equivalent | not_equivalent | indeterminate
    traces: dict = field(default_factory=dict, repr=False)

    def to_json(self):
        f = lambda v: None if not math.isfinite(v) else v  # noqa: E731
        return {"A": f(self.A), "B": f(self.B), "C": f(self.C_pair), "D": f(self.D), "verdict": self.verdict}


def _settled(seq, tol):
    tail = seq[-STABILIZATION_WINDOW:]
    if not np.all(np.isfinite(tail)):
        return False, math.inf
    spread = float(np.ptp(tail))
    return spread < tol * max(1.0, abs(float(tail[-1]))), spread


def check_equivalence(
    q1: NormalizingQuadruple,
    q2: NormalizingQuadruple,
    t_grid: Sequence[float] | None = None,
    tol: float = STABILIZATION_TOL,
) -> EquivalenceConstants:
    """Compare ``q1 = (alpha, beta, chi, delta)`` with ``q2 = (a, b, c, d)``.

    Tracks ``alpha/a``, ``(beta - b)/a``, ``chi/c`` and ``(delta - d)/c``.
    Equivalent iff all four settle over the last five grid points and the
    two scale ratios settle inside ``(0, inf)``.  Spreads above 0.1, or a
    scale ratio settling at 0, give ``not_equivalent``; anything else is
    ``indeterminate``.
    """
    if t_grid is None:
        t_grid = 10.0 ** np.arange(1, 11)
    t = np.asarray(t_grid, dtype=float)
    if len(t) < STABILIZATION_WINDOW:
        raise ValueError(f"t_grid needs at least {STABILIZATION_WINDOW} points")

    def ev(f):
        return np.asarray(f(t), dtype=float) * np.ones_like(t)

    a1, b1, c1, d1 = (ev(f) for f in (q1.alpha, q1.beta, q1.c, q1.d))
    a2, b2, c2, d2 = (ev(f) for f in (q2.alpha, q2.beta, q2.c, q2.d))
    with np.errstate(all="ignore"):
        seqs = {"A": a1 / a2, "B": (b1 - b2) / a2, "C": c1 / c2, "D": (d1 - d2) / c2}
    status = {k: _settled(v, tol) for k, v in seqs.items()}
    last = {k: float(v[-1]) for k, v in seqs.items()}

    scale_ok = all(status[k][0] and last[k] > 1e-6 and math.isfinite(last[k]) for k in ("A", "C"))
    if scale_ok and status["B"][0] and status["D"][0]:
        verdict = "equivalent"
    elif any(s[1] > 0.1 for s in status.values()) or any(
        status[k][0] and abs(last[k]) <= 1e-6 for k in ("A", "C")
    ):
        verdict = "not_equivalent"
    else:
        verdict = "indeterminate"
    return EquivalenceConstants(last["A"], last["B"], last["C"], last["D"], verdict, seqs)
