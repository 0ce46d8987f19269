"""Error exponents of the BSC(p) without feedback, including list decoding.

All rates and exponents are in nats per channel use. ``L`` is the decoding
list size (``L = 1`` is ordinary decoding).
"""

from __future__ import annotations

import functools
import math

import numpy as np

from .core import (
    LN2,
    Bracket,
    BracketError,
    DomainError,
    binary_entropy,
    bisect_root,
    delta_gv,
    kl_bernoulli,
    maximize_scalar,
)

RHO_MAX_START = 64.0
RHO_MAX_CAP = 2.0**60
RHO_DECADE_TOL = 1e-10
# slack for rates that land a rounding error above their upper limit
RATE_SLACK = 1e-13


def _check_p(p: float) -> None:
    if not (0.0 < p < 0.5):
        raise DomainError(f"crossover p={p!r} outside (0, 1/2)")


def _check_L(L: int) -> None:
    if int(L) != L or L < 1:
        raise DomainError(f"list size L={L!r} must be a positive integer")


def _check_rate(R: float, p: float) -> float:
    C = capacity(p)
    if R < 0.0 or R > C + RATE_SLACK:
        raise DomainError(f"rate R={R!r} outside [0, C(p)={C!r}]")
    return min(R, C)


def capacity(p: float) -> float:
    """C(p) = ln 2 - h(p)."""
    _check_p(p)
    return LN2 - binary_entropy(p)


def e_sp(R: float, p: float) -> float:
    """Sphere-packing exponent D(delta_GV(R) || p), for 0 <= R <= C(p)."""
    _check_p(p)
    if R > LN2:
        raise DomainError(f"rate R={R!r} exceeds ln 2")
    R = _check_rate(R, p)
    return kl_bernoulli(delta_gv(R), p)


def _root_sum(p: float, L: int) -> float:
    """p^{1/(L+1)} + q^{1/(L+1)}."""
    e = 1.0 / (L + 1)
    return p**e + (1.0 - p) ** e


def r_crit(p: float, L: int = 1) -> float:
    """Critical rate of list-L decoding."""
    _check_p(p)
    _check_L(L)
    e = 1.0 / (L + 1)
    a, b = p**e, (1.0 - p) ** e
    return LN2 - binary_entropy(a / (a + b))


def e_r(R: float, p: float, L: int = 1) -> float:
    """Random-coding exponent for list size L (sphere packing above R_crit,L)."""
    _check_p(p)
    _check_L(L)
    R = _check_rate(R, p)
    if R > r_crit(p, L):
        return e_sp(R, p)
    return L * (LN2 - R) - (L + 1) * math.log(_root_sum(p, L))


@functools.lru_cache(maxsize=1024)
def _coeffs(p: float, L: int) -> tuple[np.ndarray, np.ndarray]:
    """(C(L+1, i), ln a_i) for i = 1..L, a_i = p (q/p)^{i/(L+1)} + q (p/q)^{i/(L+1)}."""
    lp, lq = math.log(p), math.log1p(-p)
    theta = np.arange(1, L + 1) / (L + 1)
    log_a = np.logaddexp((1 - theta) * lp + theta * lq, (1 - theta) * lq + theta * lp)
    binoms = np.array([math.comb(L + 1, i) for i in range(1, L + 1)], dtype=float)
    log_a.setflags(write=False)
    binoms.setflags(write=False)
    return binoms, log_a


def _log_f(p: float, L: int, rho):
    # 2 + sum C(L+1,i) = 2^{L+1}, so f = 1 + 2^{-(L+1)} sum C(L+1,i) (a_i^{1/rho} - 1);
    # expm1/log1p keep rho * ln f accurate for very large rho.
    binoms, log_a = _coeffs(p, L)
    scale = 2.0 ** -(L + 1)
    if np.ndim(rho) == 0:
        x = sum(c * math.expm1(la / rho) for c, la in zip(binoms.tolist(), log_a.tolist()))
        return math.log1p(x * scale)
    rho = np.asarray(rho, dtype=float)
    return np.log1p(np.expm1(log_a[None, :] / rho[:, None]) @ binoms * scale)


def gallager_f(p: float, L: int, rho: float) -> float:
    """The expurgation kernel f(p, L, rho), a number in (0, 1]."""
    _check_p(p)
    _check_L(L)
    if rho < 1.0:
        raise DomainError(f"rho={rho!r} must be >= 1")
    return math.exp(_log_f(p, L, rho))


def ex_objective(R: float, p: float, L: int, rho):
    """-rho L R - rho ln f(p, L, rho): the quantity maximized over rho >= 1.

    Accepts a scalar or an array of ``rho``.
    """
    return -rho * (L * R + _log_f(p, L, rho))


def _ex_limit_zero_rate(p: float, L: int) -> float:
    # rho -> inf limit of the objective at R = 0: -2^{-(L+1)} sum C(L+1,i) ln a_i
    binoms, log_a = _coeffs(p, L)
    return -float(binoms @ log_a) / 2.0 ** (L + 1)


def _rho_upper(R: float, p: float, L: int) -> float:
    rho = RHO_MAX_START
    while rho < RHO_MAX_CAP:
        gain = ex_objective(R, p, L, rho) - ex_objective(R, p, L, rho / 10.0)
        if gain < RHO_DECADE_TOL:
            break
        rho *= 2.0
    return rho


@functools.lru_cache(maxsize=8192)
def e_ex_argmax(R: float, p: float, L: int = 1) -> tuple[float, float]:
    """``(rho*, E_ex)``; ``rho*`` is ``inf`` when the supremum is the rho -> inf limit."""
    _check_p(p)
    _check_L(L)
    if R < 0.0:
        raise DomainError(f"rate R={R!r} is negative")
    rho_hi = _rho_upper(R, p, L)

    # search in ln(rho): the optimum moves out like R^{-1/2} as R -> 0
    def obj(u):
        return ex_objective(R, p, L, np.exp(u) if np.ndim(u) else math.exp(u))

    u, val = maximize_scalar(obj, Bracket(0.0, math.log(rho_hi)), vectorized=True)
    rho = math.exp(u)
    if R == 0.0:
        lim = _ex_limit_zero_rate(p, L)
        if lim >= val:
            return math.inf, lim
    return rho, val


def e_ex(R: float, p: float, L: int = 1) -> float:
    """Expurgated exponent: sup over rho >= 1 of -rho L R - rho ln f(p, L, rho)."""
    return e_ex_argmax(R, p, L)[1]


def r_min(p: float, L: int = 1) -> float:
    """Rate below which expurgation beats random coding for list size L.

    It is the rate at which the rho-derivative of the expurgation objective
    vanishes at rho = 1.
    """
    _check_p(p)
    _check_L(L)
    s = _root_sum(p, L)
    binoms, la = _coeffs(p, L)
    weighted = float(binoms @ (np.exp(la) * la))
    return LN2 - (L + 1) / L * math.log(s) + weighted / (2.0 * L * s ** (L + 1))


@functools.lru_cache(maxsize=1024)
def _r_min_cached(p: float, L: int) -> float:
    return r_min(p, L)


def _a1(p: float) -> float:
    q = 1.0 - p
    return p ** (1 / 3) * q ** (2 / 3) + p ** (2 / 3) * q ** (1 / 3)


def _v_root(R: float) -> float:
    """v in [0, 3/4] with ln 4 - h(v) - v ln 3 = 2R."""
    if R == 0.0:
        return 0.75
    ln3 = math.log(3.0)
    return bisect_root(
        lambda v: 2 * LN2 - binary_entropy(v) - v * ln3 - 2.0 * R,
        Bracket(0.0, 0.75, tol=1e-16),
    )


def e_ex_low_rate(R: float, p: float, L: int = 1) -> float:
    """Closed form of E_ex on [0, R_min,L] for L in {1, 2}."""
    _check_p(p)
    if L not in (1, 2):
        raise DomainError("closed form exists only for L = 1, 2")
    if R < 0.0 or R > r_min(p, L) + RATE_SLACK:
        raise DomainError(f"rate R={R!r} outside [0, R_min,{L}(p)]")
    if L == 1:
        return 0.5 * delta_gv(R) * -math.log(4.0 * p * (1.0 - p))
    return -_v_root(R) * math.log(_a1(p))


def e_low(R: float, p: float, L: int = 1) -> float:
    """Best known lower bound max{E_r, E_ex} for list size L.

    At or above R_min,L the expurgated bound never exceeds E_r (they agree up
    to R_crit,L and E_ex falls below E_sp after it), so the rho search only
    runs below R_min,L.
    """
    R = _check_rate(R, p)
    er = e_r(R, p, L)
    if R >= _r_min_cached(p, L):
        return er
    return max(er, e_ex(R, p, L))


def e2(p: float) -> float:
    """Best exponent for two codewords, (1/2) ln(1/(4pq))."""
    _check_p(p)
    return -0.5 * math.log(4.0 * p * (1.0 - p))


def e_zero(p: float) -> float:
    """E(0, p) = (1/4) ln(1/(4pq))."""
    _check_p(p)
    return -0.25 * math.log(4.0 * p * (1.0 - p))


def e_zero_list2(p: float) -> float:
    """E(0, p, 2) = -(3/4) ln(p^{1/3} q^{2/3} + p^{2/3} q^{1/3})."""
    _check_p(p)
    return -0.75 * math.log(_a1(p))


def berlekamp_zero_rate(p: float) -> float:
    """Noiseless-feedback zero-rate exponent F(0, p)."""
    _check_p(p)
    return -math.log(_a1(p))


# ---------------------------------------------------------------------------
# R_2(p): lower end of the rate range where E(R, p) is known exactly


def r2_objective(tau: float, R: float) -> float | None:
    """[a(1-a) - tau(1-tau)] / [1 + 2 sqrt(tau(1-tau))] with h(a) = h(tau) + ln 2 - R.

    Returns ``None`` where the constraint has no solution a <= 1/2.
    """
    slack = R - binary_entropy(tau)
    if slack < 0.0 or tau > 0.5:
        return None
    alpha = delta_gv(min(slack, LN2))
    s = tau * (1.0 - tau)
    return (alpha * (1.0 - alpha) - s) / (1.0 + 2.0 * math.sqrt(s))


def r2_inner_min(R: float) -> float:
    """Minimum of :func:`r2_objective` over feasible tau, for a candidate rate R."""
    if not (0.0 < R <= LN2):
        raise DomainError(f"rate R={R!r} outside (0, ln 2]")
    tau_max = delta_gv(LN2 - R)  # largest tau with h(tau) <= R
    if tau_max <= 0.0:
        return r2_objective(0.0, R)

    def neg(tau: float) -> float:
        g = r2_objective(min(tau, tau_max), R)
        return -math.inf if g is None else -g

    _, v = maximize_scalar(neg, Bracket(0.0, tau_max, tol=1e-12))
    return -v


@functools.lru_cache(maxsize=256)
def r2(p: float) -> float:
    """Critical rate R_2(p) in (0, R_crit(p))."""
    _check_p(p)
    sq = math.sqrt(p * (1.0 - p))
    target = sq / (1.0 + 2.0 * sq)
    hi = r_crit(p)
    try:
        return bisect_root(lambda R: r2_inner_min(R) - target, Bracket(1e-15, hi))
    except BracketError as exc:
        raise BracketError(f"R_2 root not bracketed on (0, R_crit) for p={p}") from exc
