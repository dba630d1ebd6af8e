"""Numerical inverses of monotone functions and Pareto helpers."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy.optimize import brentq

INVERSION_TOL = 1e-12
MAX_ITER = 200


class BracketError(ValueError):
    """Target value not in the image of the bracket."""


def inverse_monotone(fn: Callable[[float], float], target: float, bracket, tol: float = INVERSION_TOL) -> float:
    """Solve ``fn(x) = target`` for a monotone ``fn`` on ``bracket`` (Brent's method).

    Raises :class:`BracketError` when ``target`` lies outside the image of the
    bracket.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    flo, fhi = fn(lo), fn(hi)
    tgt = float(target)
    if not (min(flo, fhi) <= tgt <= max(flo, fhi)):
        raise BracketError(f"target {tgt} outside [{min(flo, fhi)}, {max(flo, fhi)}]")
    eps = tol * max(1.0, abs(tgt))
    if abs(flo - tgt) <= eps:
        return lo
    if abs(fhi - tgt) <= eps:
        return hi
    xtol = tol * 1e-2 * max(1.0, min(abs(lo), abs(hi)))
    return brentq(lambda v: fn(v) - tgt, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=MAX_ITER)


def inverse_monotone_array(fn, target, lo, hi, *, increasing=True, dfn=None, rtol=INVERSION_TOL, max_iter=MAX_ITER):
    """Vectorized root of ``fn(x) = target`` on per-element brackets ``[lo, hi]``.

    With ``dfn`` (the derivative) Newton steps are taken and replaced by
    bisection whenever they leave the current bracket.  Iteration stops once
    every bracket is narrower than ``rtol`` relative to its location.
    """
    target = np.asarray(target, dtype=float)
    shape = target.shape
    tg = target.ravel()
    lo = np.broadcast_to(np.asarray(lo, dtype=float), shape).ravel().copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), shape).ravel().copy()
    x = 0.5 * (lo + hi)
    idx = np.arange(tg.size)
    sign = 1.0 if increasing else -1.0
    for _ in range(max_iter):
        if idx.size == 0:
            break
        xi, li, hi_ = x[idx], lo[idx], hi[idx]
        f = sign * (fn(xi) - tg[idx])
        below = f < 0
        li = np.where(below, xi, li)
        hi_ = np.where(below, hi_, xi)
        if dfn is not None:
            with np.errstate(all="ignore"):
                step = xi - sign * f / dfn(xi)
            ok = (step > li) & (step < hi_) & np.isfinite(step)
            new = np.where(ok, step, 0.5 * (li + hi_))
        else:
            new = 0.5 * (li + hi_)
        exact = f == 0
        new = np.where(exact, xi, new)
        scale = np.maximum(np.abs(new), np.finfo(float).tiny)
        done = exact | (np.abs(new - xi) <= rtol * scale) | (hi_ - li <= rtol * scale)
        x[idx], lo[idx], hi[idx] = new, li, hi_
        idx = idx[~done]
    out = x.reshape(shape)
    return out[()] if out.ndim == 0 else out


# --------------------------------------------------------------------------
# standard Pareto


def pareto_sf(u):
    """``P{Z > u}`` for standard Pareto ``Z``; works on extended reals."""
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(u <= 1.0, 1.0, 1.0 / np.where(u <= 1.0, 1.0, u))
    return out[()] if out.ndim == 0 else out


def pareto_between(a, b):
    """``P{a < Z <= b}`` for standard Pareto ``Z``."""
    return np.maximum(pareto_sf(a) - pareto_sf(b), 0.0)


def sf_scalar(u: float) -> float:
    if u <= 1.0:
        return 1.0
    return 0.0 if u == math.inf else 1.0 / u


def pareto_from_uniform(u):
    """Inverse-transform Pareto draw ``1/U`` with ``U`` on ``(0, 1]``."""
    return 1.0 / u


def uniform_open(rng: np.random.Generator, size):
    """Uniform draws on ``(0, 1]`` (never zero)."""
    return 1.0 - rng.random(size)
