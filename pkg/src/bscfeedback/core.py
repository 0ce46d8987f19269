"""Scalar information-theoretic primitives and 1-D root finding / maximization.

Everything is in nats. The ``0 ln 0 = 0`` convention is used throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

LN2 = math.log(2.0)
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

BISECT_TOL = 1e-12
OPT_TOL = 1e-9
OPT_GRID = 512


class DomainError(ValueError):
    """An argument lies outside the domain where a quantity is defined."""


class BracketError(ValueError):
    """A root-finding bracket does not contain a sign change."""


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float
    tol: float = BISECT_TOL

    def __post_init__(self):
        if not (self.lo < self.hi):
            raise BracketError(f"empty bracket [{self.lo}, {self.hi}]")
        if not self.tol > 0:
            raise BracketError(f"tolerance must be positive, got {self.tol}")


def _check_prob(x: float, name: str = "x") -> None:
    if not (0.0 <= x <= 1.0):
        raise DomainError(f"{name}={x!r} is not a probability")


def binary_entropy(x: float) -> float:
    """h(x) = -x ln x - (1-x) ln(1-x)."""
    _check_prob(x)
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log(x) - (1.0 - x) * math.log1p(-x)


def kl_bernoulli(x: float, y: float) -> float:
    """Binary divergence D(x || y) in nats.

    Written through ``log1p`` of the relative gaps so that values near
    ``x == y`` (of order (x-y)^2) keep full relative precision.
    """
    _check_prob(x, "x")
    _check_prob(y, "y")
    total = 0.0
    if x > 0.0:
        if y == 0.0:
            raise DomainError("D(x||0) is infinite for x > 0")
        total += x * _log_ratio(x, y, (x - y) / y)
    if x < 1.0:
        if y == 1.0:
            raise DomainError("D(x||1) is infinite for x < 1")
        total += (1.0 - x) * _log_ratio(1.0 - x, 1.0 - y, (y - x) / (1.0 - y))
    return max(total, 0.0)


def _log_ratio(a: float, b: float, rel: float) -> float:
    # ln(a/b) given rel = a/b - 1; log1p only where it gains accuracy
    return math.log1p(rel) if abs(rel) < 0.5 else math.log(a) - math.log(b)


def bisect_root(f: Callable[[float], float], b: Bracket, max_iter: int = 200) -> float:
    """Root of a monotone function on ``[b.lo, b.hi]`` by plain bisection.

    Stops once the bracket is narrower than ``b.tol`` or can no longer be
    split in floating point.
    """
    lo, hi = b.lo, b.hi
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise BracketError(f"no sign change on [{lo}, {hi}]: f={flo}, {fhi}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= b.tol or mid <= lo or mid >= hi:
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def golden_max(
    f: Callable[[float], float], lo: float, hi: float, tol: float = OPT_TOL, max_iter: int = 200
) -> tuple[float, float]:
    """Golden-section search for a maximum of a unimodal ``f`` on [lo, hi]."""
    x1 = hi - INV_PHI * (hi - lo)
    x2 = lo + INV_PHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        if f1 >= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - INV_PHI * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + INV_PHI * (hi - lo)
            f2 = f(x2)
    return (x1, f1) if f1 >= f2 else (x2, f2)


def maximize_scalar(
    f: Callable[[float], float],
    b: Bracket,
    grid: int = OPT_GRID,
    vectorized: bool = False,
) -> tuple[float, float]:
    """Maximize ``f`` on ``[b.lo, b.hi]``; returns ``(argmax, max)``.

    A uniform grid of ``grid`` points (endpoints included) locates the best
    cell, then golden-section search refines inside the two neighbouring
    cells. No unimodality is assumed globally. Points where ``f`` is -inf
    are allowed and simply never win.

    With ``vectorized=True`` the grid stage calls ``f`` once on an array;
    the refinement stage always passes floats.
    """
    if grid < 3:
        raise ValueError("grid must have at least 3 points")
    xs = np.linspace(b.lo, b.hi, grid)
    if vectorized:
        vals = np.asarray(f(xs), dtype=float)
    else:
        vals = np.array([f(float(x)) for x in xs])
    k = int(np.argmax(vals))  # first occurrence on ties
    best_x, best_v = float(xs[k]), float(vals[k])
    if math.isinf(best_v) and best_v < 0:
        return best_x, best_v
    lo = xs[max(k - 1, 0)]
    hi = xs[min(k + 1, grid - 1)]
    x, v = golden_max(f, float(lo), float(hi), tol=b.tol)
    if v > best_v:
        best_x, best_v = x, v
    return best_x, best_v


def delta_gv(R: float) -> float:
    """Gilbert-Varshamov distance: the delta in [0, 1/2] with h(delta) = ln 2 - R."""
    if not (0.0 <= R <= LN2):
        raise DomainError(f"rate R={R!r} outside [0, ln 2]")
    if R == 0.0:
        return 0.5
    if R == LN2:
        return 0.0
    target = LN2 - R
    # run to full double precision; the flat top of h near 1/2 needs it
    return bisect_root(lambda x: binary_entropy(x) - target, Bracket(0.0, 0.5, tol=1e-16))
