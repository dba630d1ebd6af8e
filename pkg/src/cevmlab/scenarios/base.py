"""Declarative scenario types: models, checks, probe subsequences."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .. import rng as _rng
from ..margins import Interval
from ..measures import BaseMeasure, DomainError, _num
from ..norming import NormalizingQuadruple

FUNCTIONALS = ("rect", "quadrant", "survival", "x_tail", "y_tail")
MODEL_KINDS = ("cev_xy", "cev_yx", "mevt", "hrv", "standardized")

# default analytic scan: t from 10 to 10^12.5, ratio sqrt(10)
DEFAULT_LOG_T = tuple(math.log(10.0) * (1.0 + 0.5 * k) for k in range(24))


@dataclass(frozen=True)
class ProbeSequence:
    """Explicit subsequence ``t_n`` along which a pre-limit settles.

    ``log_t(n, x, y)`` returns ``log t_n``; the probe may depend on the
    evaluation point.  ``expected(x, y)`` is the closed-form constant along
    the probe.
    """

    label: str
    log_t: Callable[[int, float, float], float]
    expected: Callable[[float, float], float] | None = None
    n_start: int = 0
    formula: str = ""

    def generator(self, n: int, x: float = 0.0, y: float = 0.0) -> float:
        """``t_n`` itself (may overflow to inf for doubly exponential probes)."""
        lt = self.log_t(n, x, y)
        return math.exp(lt) if lt < 709.78 else math.inf

    def describe(self):
        return {"label": self.label, "t_n": self.formula, "n_start": self.n_start}


@dataclass(frozen=True)
class Expected:
    kind: str  # converges | oscillates | degenerate
    value: float | None = None
    bounds: tuple | None = None

    def describe(self):
        d = {"kind": self.kind}
        if self.value is not None:
            d["limit"] = _num(self.value)
        if self.bounds is not None:
            d["bounds"] = [_num(b) for b in self.bounds]
        return d


def converges(value: float | None = None) -> Expected:
    """Expected convergence; ``None`` means "to the registered measure's value"."""
    return Expected("converges", value)


def oscillates(lo: float, hi: float) -> Expected:
    return Expected("oscillates", None, (lo, hi))


DEGENERATE = Expected("degenerate")


@dataclass(frozen=True)
class Check:
    """One (functional, point) pair with its expected verdict."""

    functional: str
    x: float
    y: float
    expected: Expected = field(default_factory=converges)
    probes: tuple = ()
    mc: bool = True
    nondegenerate: bool = False
    scan_log_t: tuple | None = None

    def __post_init__(self):
        if self.functional not in FUNCTIONALS:
            raise ValueError(f"unknown functional {self.functional!r}")

    def describe(self):
        return {
            "functional": self.functional,
            "point": [_num(self.x), _num(self.y)],
            "expected": self.expected.describe(),
            "probes": [p.describe() for p in self.probes],
            "montecarlo": self.mc,
        }


@dataclass(frozen=True)
class ModelSpec:
    """A normalization of a scenario together with its limit and checks.

    ``prelimit(functional, log_t, x, y)`` evaluates the exact pre-limit
    functional.  Quadrants default to ``y_tail - rect`` when the model only
    supplies rectangles, and survival sets to ``x_tail + y_tail - quadrant``.
    For ``swap`` models (the ``cev_yx`` family) coordinates are
    ``(Y, X)``: the first is the non-extreme one.
    """

    tag: str
    quadruple: NormalizingQuadruple
    measure: BaseMeasure | None = None
    prelimit: Callable | None = None
    checks: tuple = ()
    swap: bool = False
    neighborhood: tuple | None = None  # half-open (lo, hi] for X
    lambda0: Callable[[float], float] | None = None
    transform: Callable | None = None
    transform_label: str = ""
    mc_t: float = 1e3
    mc_t_max: float = 1e4
    note: str = ""

    @property
    def kind(self) -> str:
        return self.tag.split(":", 1)[0]

    def scale(self, t: float) -> float:
        return float(self.lambda0(t)) if self.lambda0 is not None else float(t)

    def evaluate_prelimit(self, functional: str, log_t: float, x: float, y: float) -> float:
        if self.prelimit is None:
            raise ValueError(f"model {self.tag} has no closed-form pre-limit")
        try:
            return float(self.prelimit(functional, log_t, x, y))
        except NotImplementedError:
            pass
        if functional == "quadrant":
            return self.evaluate_prelimit("y_tail", log_t, x, y) - self.evaluate_prelimit("rect", log_t, x, y)
        if functional == "rect":
            return self.evaluate_prelimit("y_tail", log_t, x, y) - self.evaluate_prelimit("quadrant", log_t, x, y)
        if functional == "survival":
            return (
                self.evaluate_prelimit("x_tail", log_t, x, y)
                + self.evaluate_prelimit("y_tail", log_t, x, y)
                - self.evaluate_prelimit("quadrant", log_t, x, y)
            )
        raise ValueError(f"model {self.tag} has no pre-limit for {functional}")

    def limit_value(self, functional: str, x: float, y: float) -> float | None:
        m = self.measure
        if m is None:
            return None
        if functional == "rect":
            return m.rect_mass(x, y)
        if functional == "quadrant":
            return m.quadrant_mass(x, y)
        if functional == "survival":
            return m.survival_complement(x, y)
        if functional == "x_tail":
            return m.marginal_x_tail(x)
        if functional == "y_tail":
            return m.marginal_y_tail(y)
        raise ValueError(functional)

    def expected_for(self, check: Check) -> Expected:
        e = check.expected
        if e.kind == "converges" and e.value is None:
            v = self.limit_value(check.functional, check.x, check.y)
            if v is None:
                raise ValueError(f"{self.tag}: no limit registered for {check.functional}")
            return Expected("converges", v)
        return e

    def describe(self):
        d = {
            "tag": self.tag,
            "normalization": self.quadruple.describe(),
            "has_limit_measure": self.measure is not None,
            "checks": [c.describe() for c in self.checks],
        }
        if self.neighborhood is not None:
            d["neighborhood"] = [_num(v) for v in self.neighborhood]
        if self.transform_label:
            d["f"] = self.transform_label
        if self.swap:
            d["orientation"] = "(Y, X)"
        if self.lambda0 is not None:
            d["scale"] = self.note or "lambda0(t)"
        return d


@dataclass(frozen=True)
class Branch:
    """Mixture branch for rare-event sampling: ``(X, Y) = to_xy(Z)`` with prob ``prob``."""

    prob: float
    survival: Callable[[float], float]
    sample_beyond: Callable[[np.random.Generator, float, int], np.ndarray]
    to_xy: Callable[[np.ndarray], tuple]
    threshold: Callable[[float, float, float], float]  # (t, x, y) -> Z level needed for the joint event


@dataclass(frozen=True)
class Relation:
    """Cross-model assertion: ``equivalence`` of normalizations or ``overlap`` of two CEVM limits."""

    kind: str
    tags: tuple
    expected: str

    def describe(self):
        return {"kind": self.kind, "models": list(self.tags), "expected": self.expected}


@dataclass(frozen=True)
class Scenario:
    id: str
    title: str
    draw: Callable[[np.random.Generator, int], np.ndarray]
    models: dict
    params: dict = field(default_factory=dict)
    x_range: Interval | None = None
    standardize_from: str | None = None
    relations: tuple = ()
    branches: tuple = ()
    extras: dict = field(default_factory=dict)
    index: int = 0

    # views matching the catalog vocabulary
    @property
    def quadruples(self):
        return {k: m.quadruple for k, m in self.models.items()}

    @property
    def analytic(self):
        return {k: m.measure for k, m in self.models.items()}

    @property
    def probes(self):
        return [p for m in self.models.values() for c in m.checks for p in c.probes]

    @property
    def expected(self):
        return {k: [c.expected for c in m.checks] for k, m in self.models.items()}

    def sampler(self, seed: int, n: int):
        return self.sample(seed, n)

    def sample(self, seed: int, n: int, *, workers: int | None = None) -> np.ndarray:
        """``n`` iid pairs as an ``(n, 2)`` array; deterministic in ``(seed, n)``."""
        if n < 0:
            raise ValueError("n must be non-negative")
        if n == 0:
            return np.empty((0, 2))
        return _rng.chunked(self.draw, seed, n, domain=self.index, workers=workers)

    def model(self, tag: str) -> ModelSpec:
        try:
            return self.models[tag]
        except KeyError:
            raise KeyError(f"scenario {self.id} has no model {tag!r}") from None

    def to_json(self):
        return {
            "id": self.id,
            "title": self.title,
            "parameters": {k: _num(v) if isinstance(v, float) else v for k, v in self.params.items()},
            "models": {k: m.describe() for k, m in self.models.items()},
            "relations": [r.describe() for r in self.relations],
            "standardize_from": self.standardize_from,
        }


def sample(s: Scenario, seed: int, n: int) -> np.ndarray:
    return s.sample(seed, n)


def in_support(m: ModelSpec, functional, x, y) -> bool:
    try:
        m.limit_value(functional, x, y)
    except DomainError:
        return False
    return True
