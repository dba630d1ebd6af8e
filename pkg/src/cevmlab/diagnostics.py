"""Convergence diagnostics for scaled tail functionals.

A functional is scanned along a geometric t-grid and evaluated along the
probe subsequences declared by its scenario; :func:`classify` folds both
into a :class:`ConvergenceVerdict`.  Functionals are always called with
``log t`` so that doubly exponential probes stay representable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .estimators import TailEstimate, branch_conditional_hrv_estimate, estimate_model, model_view

DETECTION_THRESHOLD = 0.02
MIN_SCAN_POINTS = 12
TAIL_WINDOW = 4
PROBE_STABILITY = 1e-4
ANALYTIC_TOL = 1e-6
MC_SIGMAS = 4.0
MC_MIN_EXPECTED_HITS = 400  # probe terms kept in Monte Carlo mode need t <= n / 400
LOG_DOUBLE_MAX = math.log(np.finfo(float).max)


def _value_se(r) -> tuple[float, float, int | None, int | None]:
    if isinstance(r, TailEstimate):
        return r.value, r.std_error, r.raw_count, r.n
    return float(r), 0.0, None, None


@dataclass(frozen=True)
class ScanResult:
    """Values of a functional along ``log_t`` (analytic values carry zero standard error)."""

    log_t: np.ndarray
    values: np.ndarray
    std_errors: np.ndarray
    raw: tuple = ()

    def __len__(self):
        return len(self.log_t)

    @property
    def t(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_t)

    def evidence(self):
        return [(float(t), float(v), float(s)) for t, v, s in zip(self.t, self.values, self.std_errors)]


def geometric_log_grid(start: float = 10.0, ratio: float = math.sqrt(10.0), count: int = 24) -> np.ndarray:
    """``log`` of the geometric grid ``start * ratio**k``."""
    if ratio <= 1.0 or start <= 0:
        raise ValueError("need start > 0 and ratio > 1")
    return math.log(start) + math.log(ratio) * np.arange(count)


def scan(functional: Callable[[float], float | TailEstimate], t_grid: Sequence[float] | None = None, *,
         log_t_grid: Sequence[float] | None = None) -> ScanResult:
    """Evaluate ``functional(log t)`` along an increasing grid of at least 12 points.

    Pass either ``t_grid`` (values of ``t``) or ``log_t_grid``.
    """
    if (t_grid is None) == (log_t_grid is None):
        raise ValueError("give exactly one of t_grid and log_t_grid")
    lt = np.log(np.asarray(t_grid, dtype=float)) if log_t_grid is None else np.asarray(log_t_grid, dtype=float)
    if lt.ndim != 1 or len(lt) < MIN_SCAN_POINTS:
        raise ValueError(f"scan needs at least {MIN_SCAN_POINTS} grid points")
    if np.any(np.diff(lt) <= 0):
        raise ValueError("t grid must be strictly increasing")
    raw = tuple(functional(float(v)) for v in lt)
    vs = np.array([_value_se(r)[0] for r in raw])
    ses = np.array([_value_se(r)[1] for r in raw])
    return ScanResult(lt, vs, ses, raw)


@dataclass(frozen=True)
class ProbeFit:
    """Constant fitted along one probe subsequence.

    ``terms`` holds ``(n, log t_n, value, std_error)``; ``truncated`` lists
    the indices dropped because ``t_n`` exceeded the allowed range and
    ``overflow`` those whose ``t_n`` is not representable as a double (kept,
    since evaluation happens in ``log t``).
    """

    label: str
    value: float
    std_error: float
    stable: bool
    terms: tuple
    truncated: tuple = ()
    overflow: tuple = ()
    expected: float | None = None


def probe(functional: Callable[[float], float | TailEstimate], p, n_terms: int = 4, *, x: float = 0.0,
          y: float = 0.0, log_t_cap: float = math.inf, stab_tol: float = PROBE_STABILITY) -> ProbeFit:
    """Evaluate ``functional`` along ``t_n = p.generator(n)`` and fit its constant.

    Terms with ``log t_n > log_t_cap`` are dropped and recorded.  The fit is
    stable when the last two kept terms agree to ``stab_tol`` (widened by
    four combined standard errors for Monte Carlo values); the fitted value
    is the last term for exact values and the inverse-variance mean of the
    kept terms for noisy ones.
    """
    if n_terms < 3:
        raise ValueError("probe needs n_terms >= 3")
    terms, truncated, overflow = [], [], []
    for n in range(p.n_start, p.n_start + n_terms):
        lt = float(p.log_t(n, x, y))
        if lt > log_t_cap:
            truncated.append(n)
            continue
        if lt > LOG_DOUBLE_MAX:
            overflow.append(n)
        v, se, _, _ = _value_se(functional(lt))
        terms.append((n, lt, v, se))
    exp_v = p.expected(x, y) if p.expected is not None else None
    if len(terms) < 2:
        v = terms[-1][2] if terms else math.nan
        return ProbeFit(p.label, v, math.nan, False, tuple(terms), tuple(truncated), tuple(overflow), exp_v)
    (_, _, v1, s1), (_, _, v2, s2) = terms[-2], terms[-1]
    stable = abs(v2 - v1) <= stab_tol + MC_SIGMAS * math.hypot(s1, s2)
    ses = np.array([t[3] for t in terms])
    if np.all(ses == 0):
        value, se = v2, 0.0
    else:
        w = 1.0 / np.maximum(ses, 1e-300) ** 2
        vals = np.array([t[2] for t in terms])
        value, se = float(np.sum(w * vals) / np.sum(w)), float(1.0 / math.sqrt(np.sum(w)))
    return ProbeFit(p.label, value, se, stable, tuple(terms), tuple(truncated), tuple(overflow), exp_v)


@dataclass(frozen=True)
class ConvergenceVerdict:
    """Outcome of :func:`classify`.

    ``kind`` is one of ``converges``, ``oscillates``, ``degenerate`` or
    ``indeterminate``.  ``liminf``/``limsup`` come from the probe fits when
    oscillating; ``scan_range`` is the raw min/max over the scan, reported
    but never used alone.
    """

    kind: str
    limit: float | None = None
    liminf: float | None = None
    limsup: float | None = None
    evidence: tuple = ()
    probe_values: dict = field(default_factory=dict)
    truncations: dict = field(default_factory=dict)
    scan_range: tuple = ()
    threshold: float = DETECTION_THRESHOLD

    @property
    def bounds(self):
        return (self.liminf, self.limsup)

    def to_json(self, **context) -> dict:
        d = dict(context)
        d["kind"] = self.kind
        if self.kind in ("converges", "degenerate") and self.limit is not None:
            d["limit"] = self.limit
        if self.kind == "oscillates":
            d["bounds"] = [self.liminf, self.limsup]
        d["probes"] = dict(self.probe_values)
        d["truncations"] = {k: list(v) for k, v in self.truncations.items()}
        if self.scan_range:
            d["scan_range"] = list(self.scan_range)
        d["threshold"] = self.threshold
        return d


def classify(scan_result: ScanResult, probes_result: Sequence[ProbeFit] = (), threshold: float = DETECTION_THRESHOLD,
             *, nondegenerate: bool = False) -> ConvergenceVerdict:
    """Fold a scan and probe fits into a verdict.

    Oscillates when two stable probes differ by more than the threshold;
    Converges when the last four scan values spread less than the
    threshold (Degenerate instead if the limit is zero where a
    non-degenerate limit is required); Indeterminate otherwise.  In Monte
    Carlo mode the threshold widens by four of the largest standard errors.
    """
    if len(scan_result) < MIN_SCAN_POINTS:
        raise ValueError(f"scan needs at least {MIN_SCAN_POINTS} points")
    vals = scan_result.values
    max_se = float(np.max(scan_result.std_errors)) if len(vals) else 0.0
    probe_se = max((pf.std_error for pf in probes_result if math.isfinite(pf.std_error)), default=0.0)
    thr_scan = threshold + MC_SIGMAS * max_se
    thr_probe = threshold + MC_SIGMAS * probe_se
    pv = {pf.label: pf.value for pf in probes_result}
    trunc = {pf.label: pf.truncated + pf.overflow for pf in probes_result if pf.truncated or pf.overflow}
    common = dict(evidence=tuple(scan_result.evidence()), probe_values=pv, truncations=trunc,
                  scan_range=(float(np.min(vals)), float(np.max(vals))))

    stable = [pf for pf in probes_result if pf.stable and math.isfinite(pf.value)]
    if len(stable) >= 2:
        lo = min(pf.value for pf in stable)
        hi = max(pf.value for pf in stable)
        if hi - lo > thr_probe:
            return ConvergenceVerdict("oscillates", None, lo, hi, threshold=thr_probe, **common)
    tail = vals[-TAIL_WINDOW:]
    if np.all(np.isfinite(tail)) and float(np.ptp(tail)) < thr_scan:
        limit = float(tail[-1]) if max_se == 0 else float(np.mean(tail))
        if nondegenerate and abs(limit) < thr_scan:
            return ConvergenceVerdict("degenerate", limit, threshold=thr_scan, **common)
        return ConvergenceVerdict("converges", limit, threshold=thr_scan, **common)
    return ConvergenceVerdict("indeterminate", threshold=max(thr_scan, thr_probe), **common)


# --------------------------------------------------------------------------
# scenario checks


@dataclass
class CheckResult:
    scenario: str
    model_tag: str
    functional: str
    x: float
    y: float
    mode: str
    verdict: ConvergenceVerdict
    expected: object
    passed: bool
    detail: str = ""
    rows: list = field(default_factory=list)
    reference: TailEstimate | None = None

    def to_json(self) -> dict:
        from .measures import _num

        d = self.verdict.to_json(scenario=self.scenario, model_tag=self.model_tag, functional=self.functional,
                                 point=[_num(self.x), _num(self.y)], mode=self.mode)
        d["expected"] = self.expected.describe()
        d["passed"] = self.passed
        if self.detail:
            d["detail"] = self.detail
        if self.reference is not None:
            d["reference_estimate"] = self.reference.to_json()
        return d


def mc_log_grid(n: int, t_max: float, count: int = MIN_SCAN_POINTS, start: float = 10.0) -> np.ndarray:
    """Monte Carlo scan grid: ``count`` geometric points from ``start`` to ``min(sqrt(n)/2, t_max)``."""
    top = max(min(math.sqrt(n) / 2.0, t_max), start * 1.5)
    return np.linspace(math.log(start), math.log(top), count)


def _is_hrv(model, scenario) -> bool:
    return model.kind == "hrv" and bool(scenario.branches)


def make_functional(scenario, model, functional: str, x: float, y: float, *, mode: str = "analytic",
                    samples=None, seed: int = 0, n: int = 0) -> Callable[[float], float | TailEstimate]:
    """``log t -> value`` for one check, analytic pre-limit or Monte Carlo estimate."""
    if mode == "analytic":
        return lambda lt: model.evaluate_prelimit(functional, lt, x, y)
    if _is_hrv(model, scenario):
        counter = iter(range(10 ** 9))

        def hrv_fn(lt):
            t = math.exp(lt)
            return branch_conditional_hrv_estimate(scenario, seed, n, model.scale(t), t, x, y,
                                                   domain=next(counter))

        return hrv_fn
    if samples is None:
        raise ValueError("Monte Carlo mode needs samples")
    view = model_view(samples, model)
    return lambda lt: estimate_model(view, model, functional, math.exp(lt), x, y)


def _rows(scenario, model, check, mode, scan_result, probe_fits):
    rows = []
    base = f"functional={check.functional}|mode={mode}"
    for lt, r in zip(scan_result.log_t, scan_result.raw):
        v, se, c, n = _value_se(r)
        rows.append(dict(scenario=scenario.id, model_tag=model.tag, log_t=float(lt), x=check.x, y=check.y,
                         value=v, std_error=se, raw_count=c, n=n, flags=base))
    for pf in probe_fits:
        for (k, lt, v, se) in pf.terms:
            rows.append(dict(scenario=scenario.id, model_tag=model.tag, log_t=float(lt), x=check.x, y=check.y,
                             value=v, std_error=se, raw_count=None, n=None,
                             flags=f"{base}|probe={pf.label}|term={k}"))
    return rows


def _compare(verdict: ConvergenceVerdict, expected, tol: float) -> tuple[bool, str]:
    if expected.kind == "degenerate":
        ok = verdict.kind == "degenerate"
        return ok, "" if ok else f"expected degenerate, got {verdict.kind}"
    if expected.kind == "oscillates":
        if verdict.kind != "oscillates":
            return False, f"expected oscillation, got {verdict.kind}"
        lo, hi = expected.bounds
        ok = abs(verdict.liminf - lo) <= tol and abs(verdict.limsup - hi) <= tol
        return ok, "" if ok else f"bounds ({verdict.liminf:.6g}, {verdict.limsup:.6g}) vs ({lo:.6g}, {hi:.6g})"
    if verdict.kind != "converges":
        return False, f"expected convergence to {expected.value:.6g}, got {verdict.kind}"
    ok = abs(verdict.limit - expected.value) <= tol
    return ok, "" if ok else f"limit {verdict.limit:.8g} vs {expected.value:.8g}"


def run_check(scenario, model, check, *, mode: str = "analytic", samples=None, seed: int = 0, n: int = 0,
              threshold: float = DETECTION_THRESHOLD, log_t_grid=None, n_probe_terms: int = 4) -> CheckResult:
    """Scan, probe, classify and compare one declared check against its expectation."""
    expected = model.expected_for(check)
    fn = make_functional(scenario, model, check.functional, check.x, check.y, mode=mode, samples=samples,
                         seed=seed, n=n)
    if mode == "analytic":
        grid = log_t_grid if log_t_grid is not None else (check.scan_log_t or _default_log_t())
        cap = math.inf
    else:
        grid = log_t_grid if log_t_grid is not None else mc_log_grid(n, model.mc_t_max)
        cap = math.inf if _is_hrv(model, scenario) else math.log(max(n / MC_MIN_EXPECTED_HITS, 1.0))
    sr = scan(fn, log_t_grid=grid)
    fits = [probe(fn, p, n_probe_terms, x=check.x, y=check.y, log_t_cap=cap) for p in check.probes]
    # a declared zero limit is an expectation, not a degeneracy
    nondeg = check.nondegenerate and not (expected.kind == "converges" and expected.value == 0.0)
    verdict = classify(sr, fits, threshold, nondegenerate=nondeg)
    reference = None
    if mode == "analytic":
        passed, detail = _compare(verdict, expected, ANALYTIC_TOL)
        for pf in fits:
            if pf.expected is not None and abs(pf.value - pf.expected) > ANALYTIC_TOL:
                passed, detail = False, f"probe {pf.label}: {pf.value:.8g} vs closed form {pf.expected:.8g}"
    else:
        passed, detail = _compare_mc(verdict, expected, fits)
        if expected.kind == "converges" and not _is_hrv(model, scenario):
            reference = fn(math.log(model.mc_t))
            if not reference.within(expected.value, MC_SIGMAS, floor=1e-12):
                passed = False
                detail = (f"estimate {reference.value:.6g} +- {reference.std_error:.2g} at t={model.mc_t:g} "
                          f"vs {expected.value:.6g}")
    res = CheckResult(scenario.id, model.tag, check.functional, check.x, check.y, mode, verdict, expected, passed,
                      detail, _rows(scenario, model, check, mode, sr, fits), reference)
    return res


def _compare_mc(verdict, expected, fits):
    if expected.kind == "oscillates":
        if verdict.kind != "oscillates":
            return False, f"expected oscillation, got {verdict.kind}"
        lo, hi = expected.bounds
        stable = [pf for pf in fits if pf.stable]
        f_lo = min(stable, key=lambda pf: pf.value)
        f_hi = max(stable, key=lambda pf: pf.value)
        ok = all(abs(pf.value - target) <= MC_SIGMAS * pf.std_error + DETECTION_THRESHOLD
                 for pf, target in ((f_lo, lo), (f_hi, hi)))
        return ok, "" if ok else f"bounds ({verdict.liminf:.4g}, {verdict.limsup:.4g}) vs ({lo:.4g}, {hi:.4g})"
    if expected.kind == "degenerate":
        ok = verdict.kind == "degenerate"
        return ok, "" if ok else f"expected degenerate, got {verdict.kind}"
    ok = verdict.kind in ("converges", "degenerate") and (verdict.kind == "converges" or expected.value == 0)
    return ok, "" if ok else f"expected convergence, got {verdict.kind}"


def _default_log_t():
    from .scenarios.base import DEFAULT_LOG_T

    return DEFAULT_LOG_T


__all__ = [
    "ScanResult", "ProbeFit", "ConvergenceVerdict", "CheckResult", "scan", "probe", "classify",
    "geometric_log_grid", "mc_log_grid", "make_functional", "run_check", "DETECTION_THRESHOLD",
]
