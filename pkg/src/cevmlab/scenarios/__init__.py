"""Registry of the built-in constructed distributions S1-S9."""

from __future__ import annotations

from functools import lru_cache

from .base import (
    DEFAULT_LOG_T,
    DEGENERATE,
    FUNCTIONALS,
    Branch,
    Check,
    Expected,
    ModelSpec,
    ProbeSequence,
    Relation,
    Scenario,
    converges,
    in_support,
    oscillates,
    sample,
)
from .hidden import build_s8
from .inversion import BracketError, inverse_monotone, inverse_monotone_array
from .irregular import build_s5, build_s6, build_s7
from .mixture import build_s9
from .standardization import build_s1, build_s2, build_s3, build_s4

_BUILDERS = (build_s1, build_s2, build_s3, build_s4, build_s5, build_s6, build_s7, build_s8, build_s9)


@lru_cache(maxsize=1)
def _registry() -> tuple:
    return tuple(b(index=i + 1) for i, b in enumerate(_BUILDERS))


def register_builtin_scenarios() -> list:
    """The nine built-in scenarios in order S1..S9 (immutable, cached)."""
    return list(_registry())


def get_scenario(sid: str) -> Scenario:
    for s in _registry():
        if s.id.lower() == str(sid).lower():
            return s
    raise KeyError(f"unknown scenario {sid!r}; known: {', '.join(s.id for s in _registry())}")


def scenario_ids() -> list:
    return [s.id for s in _registry()]


__all__ = [
    "DEFAULT_LOG_T", "DEGENERATE", "FUNCTIONALS", "Branch", "BracketError", "Check", "Expected", "ModelSpec",
    "ProbeSequence", "Relation", "Scenario", "converges", "get_scenario", "in_support", "inverse_monotone",
    "inverse_monotone_array", "oscillates", "register_builtin_scenarios", "sample", "scenario_ids",
]
