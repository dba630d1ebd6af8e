"""Univariate extreme value primitives.

Support intervals of the GEV family, the GEV tail function
``(1 + gamma x)^(-1/gamma)``, the power/log marginal transform and Pareto
standardization.  All functions accept scalars or numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# below this |gamma| the log/exp branch is used
GAMMA_ZERO_TOL = 1e-10


class DomainError(ValueError):
    """Argument outside the support of the requested object."""


@dataclass(frozen=True)
class Interval:
    """Open interval ``(lower, upper)`` on the extended real line."""

    lower: float
    upper: float

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        return (x > self.lower) & (x < self.upper)

    def clamp(self, x):
        return np.clip(x, self.lower, self.upper)


@dataclass(frozen=True)
class EviSupport(Interval):
    """Interior of the support of ``G_gamma``, i.e. ``{x : 1 + gamma x > 0}``."""

    gamma: float = 0.0

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError("empty support interval")


def support_interval(gamma: float) -> EviSupport:
    """Return the open interval ``E^(gamma)`` with its endpoints."""
    gamma = float(gamma)
    if not np.isfinite(gamma):
        raise DomainError("gamma must be finite")
    if abs(gamma) < GAMMA_ZERO_TOL:
        return EviSupport(-np.inf, np.inf, gamma)
    if gamma < 0:
        return EviSupport(-np.inf, -1.0 / gamma, gamma)
    return EviSupport(-1.0 / gamma, np.inf, gamma)


def _check_in_support(gamma, x):
    supp = support_interval(gamma)
    if not np.all(supp.contains(x)):
        raise DomainError(f"x outside E^({gamma}) = ({supp.lower}, {supp.upper})")


def gev_tail(gamma: float, x):
    """GEV tail function ``(1 + gamma x)^(-1/gamma)``, ``exp(-x)`` at gamma = 0.

    Raises
    ------
    DomainError
        If any ``x`` lies outside ``E^(gamma)``.
    """
    x = np.asarray(x, dtype=float)
    _check_in_support(gamma, x)
    if abs(gamma) < GAMMA_ZERO_TOL:
        out = np.exp(-x)
    else:
        out = np.exp(-np.log1p(gamma * x) / gamma)
    return out[()] if out.ndim == 0 else out


def marginal_transform(gamma: float, x):
    """``(x^gamma - 1) / gamma`` for ``x > 0``; ``log x`` at gamma = 0."""
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("marginal_transform requires x > 0")
    logx = np.log(x)
    if abs(gamma) < GAMMA_ZERO_TOL:
        out = logx
    else:
        out = np.expm1(gamma * logx) / gamma
    return out[()] if out.ndim == 0 else out


def inverse_marginal_transform(gamma: float, u):
    """Inverse of :func:`marginal_transform`: ``(1 + gamma u)^(1/gamma)``."""
    u = np.asarray(u, dtype=float)
    _check_in_support(gamma, u)
    if abs(gamma) < GAMMA_ZERO_TOL:
        out = np.exp(u)
    else:
        out = np.exp(np.log1p(gamma * u) / gamma)
    return out[()] if out.ndim == 0 else out


def pareto_standardize(cdf_value):
    """Pareto standardization ``1 / (1 - F)``.

    A cdf value of exactly one (an atom at the upper endpoint) has no finite
    standardization and raises :class:`DomainError`.
    """
    p = np.asarray(cdf_value, dtype=float)
    if np.any((p < 0) | (p > 1)):
        raise DomainError("cdf value must lie in [0, 1)")
    if np.any(p == 1):
        raise DomainError("cdf value 1: standardization is infinite")
    out = 1.0 / (1.0 - p)
    return out[()] if out.ndim == 0 else out
