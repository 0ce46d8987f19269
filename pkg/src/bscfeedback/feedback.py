"""Exponents of the one-switch transmission scheme over BSC(p) with BSC(p1) feedback.

Phase I (a fraction ``gamma`` of the block) uses a fixed code; the receiver
keeps its two best candidates, and phase II resolves them with a pair of
opposite codewords. With noisy feedback the receiver decodes right after
phase I unless its 2nd and 3rd candidates are separated by more than a
threshold fraction ``t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import (
    LN2,
    Bracket,
    BracketError,
    DomainError,
    bisect_root,
    kl_bernoulli,
    maximize_scalar,
)
from .exponents import (
    _check_p,
    capacity,
    e2,
    e_ex,
    e_low,
    e_sp,
    e_zero,
    e_zero_list2,
    r_crit,
)

GAMMA_GRID = 2048
GAMMA_EDGE = 1e-6


class InfeasibleError(ValueError):
    """The scheme cannot be operated at the requested point.

    ``reason`` is a short machine-readable tag (``"rate"``, ``"threshold"``,
    ``"gamma"``, ``"no-feedback-gain"``).
    """

    def __init__(self, reason: str, message: str):
        super().__init__(message)
        self.reason = reason


@dataclass(frozen=True)
class ChannelPair:
    p: float
    p1: float = 0.0

    def __post_init__(self):
        _check_p(self.p)
        if not (0.0 <= self.p1 <= 0.5):
            raise DomainError(f"feedback crossover p1={self.p1!r} outside [0, 1/2]")


@dataclass(frozen=True)
class SchemeParams:
    gamma: float
    t: float

    def __post_init__(self):
        if not (0.0 < self.gamma <= 1.0):
            raise DomainError(f"gamma={self.gamma!r} outside (0, 1]")
        if self.t < 0.0:
            raise DomainError(f"threshold t={self.t!r} is negative")


@dataclass(frozen=True)
class BoundBreakdown:
    branch_list2: float
    branch_pair: float
    gamma_star: float
    t_star: float
    value: float


def _log_qp(p: float) -> float:
    return math.log1p(-p) - math.log(p)


def t0(R: float, p: float) -> float:
    """Threshold at which the list-2 gain is used up: 3[E_low(R,p,2) - E_low(R,p)] / ln(q/p)."""
    gain = e_low(R, p, 2) - e_low(R, p, 1)
    return max(0.0, 3.0 * gain / _log_qp(p))


_LOG_TINY = math.log(1e-300)


def _kl_log_y(t: float, u: float) -> float:
    """D(t || e^u), also valid where e^u underflows."""
    if u >= _LOG_TINY:
        return kl_bernoulli(t, min(math.exp(u), t))
    return t * (math.log(t) - u) + (1.0 - t) * math.log1p(-t) - (1.0 - t) * math.log1p(-math.exp(u))


def log_p0(R: float, p: float) -> float:
    """ln p0(R, p); finite even where p0 itself is below the double range."""
    t = t0(R, p)
    if t <= 0.0:
        raise InfeasibleError("no-feedback-gain", f"t0(R={R}, p={p}) = 0; no critical level")
    if R == 0.0:
        return math.log(t)
    # D(t || e^u) falls monotonically to 0 on u in (-inf, ln t] with slope >= -t
    hi = math.log(t)
    lo = min(_LOG_TINY, hi - 4.0 * R / t - 1.0)
    return bisect_root(lambda u: _kl_log_y(t, u) - 2.0 * R, Bracket(lo, hi, tol=1e-14))


def p0(R: float, p: float) -> float:
    """Critical feedback crossover: the root p0 <= t0(R,p) of D(t0 || p0) = 2R.

    Near R_crit the root can drop below the smallest double; the result then
    rounds to 0.0.
    """
    if R == 0.0:
        t = t0(R, p)
        if t <= 0.0:
            raise InfeasibleError("no-feedback-gain", f"t0(0, p={p}) = 0")
        return t
    return min(math.exp(log_p0(R, p)), t0(R, p))


def t1(R: float, p1: float) -> float:
    """Decision threshold: the root t1 >= p1 of D(t1 || p1) = 2R."""
    if not (0.0 < p1 <= 0.5):
        raise DomainError(f"feedback crossover p1={p1!r} outside (0, 1/2]")
    if R < 0.0:
        raise DomainError(f"rate R={R!r} is negative")
    if R == 0.0:
        return p1
    if 2.0 * R >= -math.log(p1):
        raise InfeasibleError("threshold", f"D(t || p1={p1}) never reaches 2R={2 * R}")
    return bisect_root(
        lambda t: kl_bernoulli(t, p1) - 2.0 * R, Bracket(p1, 1.0, tol=1e-16)
    )


def _threshold(R: float, p1: float) -> float:
    return 0.0 if p1 == 0.0 else t1(R, p1)


def scheme_T_threshold(R: float, ch: ChannelPair, params: SchemeParams) -> BoundBreakdown:
    """Both branches of the scheme bound for an explicit threshold ``t``.

    The threshold must satisfy D(t || p1) >= 2R/gamma (``t >= t1``); the list
    mismatch term is then negligible and the exponent is the min of the two
    branches.
    """
    p, p1 = ch.p, ch.p1
    gamma, t = params.gamma, params.t
    r = R / gamma
    if r >= capacity(p):
        raise InfeasibleError("rate", f"R/gamma={r} is not below capacity {capacity(p)}")
    if p1 > 0.0 and t < t1(r, p1):
        raise InfeasibleError("threshold", f"t={t} is below t1(R/gamma, p1)")
    b1 = gamma * e_low(r, p, 2) - gamma * t / 3.0 * _log_qp(p)
    b2 = gamma * e_low(r, p, 1) + (1.0 - gamma) * e2(p)
    return BoundBreakdown(b1, b2, gamma, t, min(b1, b2))


def scheme_T(R: float, ch: ChannelPair, gamma: float) -> BoundBreakdown:
    """Scheme exponent at switching fraction ``gamma`` with t = t1(R/gamma, p1)."""
    if not (0.0 < gamma <= 1.0):
        raise InfeasibleError("gamma", f"gamma={gamma!r} outside (0, 1]")
    r = R / gamma
    if r >= capacity(ch.p):
        raise InfeasibleError("rate", f"R/gamma={r} is not below capacity")
    t = _threshold(r, ch.p1)
    return scheme_T_threshold(R, ch, SchemeParams(gamma, t))


def _gamma_lower(R: float, ch: ChannelPair) -> float:
    lo = R / capacity(ch.p)
    if ch.p1 > 0.0:
        # t1(R/gamma, p1) exists only while 2R/gamma < ln(1/p1)
        lo = max(lo, 2.0 * R / -math.log(ch.p1))
    return lo + GAMMA_EDGE


def f1_noisy(R: float, ch: ChannelPair, grid: int = GAMMA_GRID) -> BoundBreakdown:
    """Best scheme exponent over the switching fraction gamma (noisy feedback)."""
    if not (0.0 <= R < r_crit(ch.p)):
        raise DomainError(f"rate R={R!r} outside [0, R_crit(p))")
    g_lo = _gamma_lower(R, ch)
    if g_lo >= 1.0:
        raise InfeasibleError("gamma", f"no feasible gamma at R={R}, p1={ch.p1}")

    def value(g: float) -> float:
        try:
            return scheme_T(R, ch, g).value
        except InfeasibleError:
            return -math.inf

    g_best, v_best = maximize_scalar(value, Bracket(g_lo, 1.0), grid=grid)

    # the list-2 branch rises and the pair branch falls in gamma, so the
    # optimum is their crossing whenever it lies inside the range
    def diff(g: float) -> float:
        b = scheme_T(R, ch, g)
        return b.branch_list2 - b.branch_pair

    try:
        g_cross = bisect_root(diff, Bracket(g_lo, 1.0, tol=1e-15))
    except BracketError:
        pass
    else:
        v_cross = scheme_T(R, ch, g_cross).value
        if v_cross > v_best:
            g_best, v_best = g_cross, v_cross
    return scheme_T(R, ch, g_best)


def gamma0(R: float, p: float) -> float:
    """Switching fraction balancing the two noiseless-feedback error terms."""
    rc = r_crit(p)
    if not (0.0 < R < rc):
        raise DomainError(f"rate R={R!r} outside (0, R_crit(p))")
    E2 = e2(p)

    def diff(g: float) -> float:
        r = min(R / g, rc)
        return g * (e_low(r, p, 2) - e_low(r, p, 1)) - (1.0 - g) * E2

    return bisect_root(diff, Bracket(R / rc, 1.0, tol=1e-16))


def f1_noiseless(R: float, p: float) -> float:
    """Scheme exponent with noiseless feedback, gamma0 E_low(R/gamma0, p, 2)."""
    g = gamma0(R, p)
    return g * e_low(R / g, p, 2)


def straight_line_upper(R: float, p: float) -> float:
    """Chord from E(0,p) to E(R_crit,p); an upper bound on E(R,p) on [0, R_crit]."""
    rc = r_crit(p)
    if not (0.0 <= R <= rc):
        raise DomainError(f"rate R={R!r} outside [0, R_crit(p)]")
    E0 = e_zero(p)
    return E0 - (E0 - e_sp(rc, p)) * R / rc


def gamma0_parametric(u: float, p: float) -> tuple[float, float]:
    """``(gamma0, R)`` parametrized by the phase-I rate u = R / gamma0."""
    if not (0.0 < u < r_crit(p)):
        raise DomainError(f"u={u!r} outside (0, R_crit(p))")
    E2 = e2(p)
    g = E2 / (E2 + e_ex(u, p, 2) - e_ex(u, p, 1))
    return g, u * g


def zero_rate_f1(ch: ChannelPair) -> float:
    """Scheme exponent at R = 0 in closed form."""
    E0, E02 = e_zero(ch.p), e_zero_list2(ch.p)
    k = ch.p1 * _log_qp(ch.p) / 3.0
    if E02 - k <= 0.0:
        raise DomainError(f"p1={ch.p1} too large: list-2 branch is not positive")
    return 2.0 * E0 * (E02 - k) / (E02 + E0 - k)


def p11(p: float, alpha: float) -> float:
    """Feedback noise level keeping a (1 - alpha) share of the zero-rate gain."""
    _check_p(p)
    if not (0.0 <= alpha <= 1.0):
        raise DomainError(f"alpha={alpha!r} outside [0, 1]")
    return 3.0 * alpha * (e_zero_list2(p) - e_zero(p)) / _log_qp(p)


def t0_asymptotic(R: float, eps: float) -> float:
    """Leading-order t0 for p = (1 - eps)/2 as eps -> 0."""
    C = eps * eps / 2.0
    if R <= C / 9.0:
        v = C - 6.0 * R
    elif R <= C / 4.0:
        v = 3.0 * (math.sqrt(C) - 2.0 * math.sqrt(R)) ** 2
    else:
        v = 0.0
    return v / (4.0 * eps)


def e_reference(R: float, p: float) -> float:
    """Comparison exponent: E_ex below R_2(p), exact E = E_r from R_2 upward.

    Both coincide with E_low(R, p) on [0, C(p)].
    """
    return e_low(R, p, 1)

