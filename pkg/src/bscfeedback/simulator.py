"""Monte Carlo run of the one-switch feedback protocol at desk scale (n <= 64).

Randomness: trial ``i`` of a run with seed ``s`` reads a fixed window of
uniforms from a Philox stream keyed by ``s``; the window starts at
``i * TRIAL_WIDTH(n, m)``. Any partition of the trial range therefore sees
the same numbers, which makes counts independent of chunking and threads.

Window layout (length n + m + 1, padded to a multiple of 4):

    [0]            true message, floor(u * M)
    [1, 1+m)       phase-I forward flips, u < p
    [1+m, 1+n)     phase-II forward flips, u < p
    [1+n, 1+n+m)   feedback flips, u < p1
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import binomtest

from . import _kernels

MAX_BLOCKLENGTH = 64
MAX_MESSAGES = 2**16
_BLOCK_CELLS = 1 << 22  # uniforms / distance cells per chunk
_CODE_STREAM = 0xC0DE
_EXACT_SAMPLING_BITS = 24


class CodeConstructionError(ValueError):
    """Distinct codewords could not be drawn."""


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if not (0 <= seed < 2**64):
        raise ValueError(f"seed={seed} must fit in 64 unsigned bits")
    return seed


# ---------------------------------------------------------------------------
# codebook


@dataclass(frozen=True)
class Codebook:
    """Phase-I code: ``words[i]`` packs codeword i, bit j = symbol j."""

    m: int
    words: np.ndarray = field(repr=False)
    seed: int
    dmin: int

    @property
    def M(self) -> int:
        return int(self.words.shape[0])

    def bits(self) -> np.ndarray:
        """Codewords as an (M, m) 0/1 array."""
        shifts = np.arange(self.m, dtype=np.uint64)
        return ((self.words[:, None] >> shifts[None, :]) & np.uint64(1)).astype(np.uint8)


def _draw_distinct(rng: np.random.Generator, m: int, count: int) -> np.ndarray:
    if m <= _EXACT_SAMPLING_BITS:
        return rng.choice(2**m, size=count, replace=False).astype(np.uint64)
    got = np.empty(0, dtype=np.uint64)
    for _ in range(64):
        need = count - got.size
        batch = rng.integers(0, 2**m, size=2 * need, dtype=np.uint64, endpoint=False)
        merged = np.concatenate([got, batch])
        _, first = np.unique(merged, return_index=True)
        got = merged[np.sort(first)][:count]
        if got.size == count:
            return got
    raise CodeConstructionError(f"could not draw {count} distinct words of length {m}")


def build_code(
    m: int, M: int, seed: int, p: float | None = None, expurgate: bool = True
) -> Codebook:
    """Random phase-I code with best-of-(2M-1) expurgation.

    Draws ``min(2M-1, 2^m)`` distinct words uniformly, scores word i by
    ``sum_{j != i} z^{d_ij}`` with ``z = 2 sqrt(p(1-p))`` (the pairwise
    Bhattacharyya union term) and keeps the ``M`` lowest scores, in draw
    order. Without ``p`` the score uses ``z = 1/2``. Ties keep the earlier
    draw. With ``expurgate=False`` the first ``M`` draws are kept as is.
    """
    m, M = int(m), int(M)
    seed = _check_seed(seed)
    if not (1 <= m <= MAX_BLOCKLENGTH):
        raise ValueError(f"m={m} outside [1, {MAX_BLOCKLENGTH}]")
    if not (2 <= M <= MAX_MESSAGES):
        raise ValueError(f"M={M} outside [2, {MAX_MESSAGES}]")
    if M > 2**m:
        raise CodeConstructionError(f"M={M} distinct words do not exist at m={m}")
    rng = np.random.default_rng(np.random.SeedSequence([seed, _CODE_STREAM]))
    pool = min(2 * M - 1, 2**m) if expurgate else M
    words = _draw_distinct(rng, m, pool)
    if pool > M:
        z = 0.5 if p is None else 2.0 * math.sqrt(p * (1.0 - p))
        z_pow = z ** np.arange(MAX_BLOCKLENGTH + 1, dtype=np.float64)
        scores = _kernels.expurgation_scores(words, z_pow)
        keep = np.sort(np.argsort(scores, kind="stable")[:M])
        words = words[keep]
    words = np.ascontiguousarray(words)
    words.setflags(write=False)
    return Codebook(m=m, words=words, seed=seed, dmin=int(_kernels.min_distance(words)))


# ---------------------------------------------------------------------------
# configuration and results


@dataclass(frozen=True)
class SimConfig:
    n: int
    M: int
    gamma: float
    t: float
    p: float
    p1: float
    trials: int
    seed: int

    def __post_init__(self):
        if not (2 <= self.n <= MAX_BLOCKLENGTH):
            raise ValueError(f"n={self.n} outside [2, {MAX_BLOCKLENGTH}]")
        if not (2 <= self.M <= MAX_MESSAGES):
            raise ValueError(f"M={self.M} outside [2, {MAX_MESSAGES}]")
        if not (0.0 < self.gamma < 1.0):
            raise ValueError(f"gamma={self.gamma} outside (0, 1)")
        if not (self.t >= 0.0):
            raise ValueError(f"t={self.t} is negative")
        for name in ("p", "p1"):
            v = getattr(self, name)
            if not (0.0 <= v <= 0.5):
                raise ValueError(f"{name}={v} outside [0, 1/2]")
        if self.trials < 1:
            raise ValueError(f"trials={self.trials} must be >= 1")
        _check_seed(self.seed)
        if not (1 <= self.m <= self.n):
            raise ValueError(f"m=round(gamma*n)={self.m} outside [1, n]")
        if self.M > 2**self.m:
            raise ValueError(f"M={self.M} exceeds 2^m={2**self.m}")

    @property
    def m(self) -> int:
        return _round_half_up(self.gamma * self.n)

    @property
    def k(self) -> int:
        return self.n - self.m

    @property
    def width(self) -> int:
        return 4 * -(-(1 + self.n + self.m) // 4)


@dataclass(frozen=True)
class SimStats:
    trials: int
    case1_count: int
    case2_count: int
    errors_total: int
    errors_case1: int
    errors_case2: int
    list_mismatch_count: int
    true_outside_top2_count: int

    def __post_init__(self):
        if self.errors_total != self.errors_case1 + self.errors_case2:
            raise ValueError("errors_total != errors_case1 + errors_case2")
        if self.case1_count + self.case2_count != self.trials:
            raise ValueError("case counts do not add up to trials")
        for k, v in asdict(self).items():
            if not (0 <= v <= self.trials):
                raise ValueError(f"{k}={v} outside [0, trials]")

    def __add__(self, other: "SimStats") -> "SimStats":
        a, b = asdict(self), asdict(other)
        return SimStats(**{k: a[k] + b[k] for k in a})

    @property
    def error_rate(self) -> float:
        return self.errors_total / self.trials

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class TrialOutcome:
    true: int
    r1: int
    r2: int
    d1: int
    d2: int
    d3: int  # -1 when M = 2
    companion: int
    case: int
    decision: int
    d_fb: int  # d(y, x'), the number of feedback flips

    @property
    def error(self) -> bool:
        return self.decision != self.true

    @property
    def list_mismatch(self) -> bool:
        return self.case == 2 and {self.true, self.companion} != {self.r1, self.r2}


@dataclass(frozen=True)
class TrialBlock:
    """Per-trial arrays for trials ``start .. start + len - 1``."""

    start: int
    true: np.ndarray
    r1: np.ndarray
    r2: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray
    companion: np.ndarray
    case1: np.ndarray
    decision: np.ndarray
    d_fb: np.ndarray

    def __len__(self) -> int:
        return int(self.true.shape[0])

    @property
    def list_mismatch(self) -> np.ndarray:
        same = ((self.true == self.r1) & (self.companion == self.r2)) | (
            (self.true == self.r2) & (self.companion == self.r1)
        )
        return ~self.case1 & ~same

    def close_feedback_counts(self, t_m: float) -> tuple[int, int]:
        """(case-2 trials with d(y, x') <= t_m, how many of those are list mismatches)."""
        close = ~self.case1 & (self.d_fb <= t_m)
        return int(close.sum()), int((close & self.list_mismatch).sum())

    def outcome(self, j: int) -> TrialOutcome:
        return TrialOutcome(
            true=int(self.true[j]),
            r1=int(self.r1[j]),
            r2=int(self.r2[j]),
            d1=int(self.d1[j]),
            d2=int(self.d2[j]),
            d3=int(self.d3[j]),
            companion=int(self.companion[j]),
            case=1 if self.case1[j] else 2,
            decision=int(self.decision[j]),
            d_fb=int(self.d_fb[j]),
        )

    def stats(self) -> SimStats:
        err = self.decision != self.true
        c1 = self.case1
        outside = (self.true != self.r1) & (self.true != self.r2)
        return SimStats(
            trials=len(self),
            case1_count=int(c1.sum()),
            case2_count=int((~c1).sum()),
            errors_total=int(err.sum()),
            errors_case1=int((err & c1).sum()),
            errors_case2=int((err & ~c1).sum()),
            list_mismatch_count=int(self.list_mismatch.sum()),
            true_outside_top2_count=int(outside.sum()),
        )


# ---------------------------------------------------------------------------
# trial execution


def _check_code(cfg: SimConfig, code: Codebook) -> None:
    if code.m != cfg.m:
        raise ValueError(f"code length {code.m} != round(gamma*n) = {cfg.m}")
    if code.M != cfg.M:
        raise ValueError(f"code has {code.M} words, config asks for {cfg.M}")


def _uniforms(cfg: SimConfig, start: int, count: int) -> np.ndarray:
    bitgen = np.random.Philox(key=cfg.seed)
    # one Philox counter step yields four doubles; width is a multiple of 4
    bitgen.advance(start * (cfg.width // 4))
    return np.random.Generator(bitgen).random((count, cfg.width))


def simulate_range(
    cfg: SimConfig, code: Codebook, start: int, stop: int, backend: str | None = None
) -> TrialBlock:
    """Run trials ``start <= i < stop`` and return their per-trial records.

    ``backend`` picks ``"numba"`` or ``"numpy"`` explicitly; the default is
    the one selected at import time.
    """
    _check_code(cfg, code)
    if not (0 <= start <= stop):
        raise ValueError(f"bad trial range [{start}, {stop})")
    m, n, M = cfg.m, cfg.n, cfg.M
    u = _uniforms(cfg, start, stop - start)
    true_idx = np.minimum((u[:, 0] * M).astype(np.int64), M - 1)
    e1 = _kernels.pack_bits(u[:, 1 : 1 + m] < cfg.p)
    e2w = (u[:, 1 + m : 1 + n] < cfg.p).sum(axis=1).astype(np.int64)
    fb = _kernels.pack_bits(u[:, 1 + n : 1 + n + m] < cfg.p1)
    kernel = _pick_kernel(backend)
    r1, r2, d1, d2, d3, comp, case1, dec = kernel(
        code.words, true_idx, e1, e2w, fb, m, cfg.k, cfg.t * m
    )
    return TrialBlock(
        start=start,
        true=true_idx,
        r1=np.asarray(r1),
        r2=np.asarray(r2),
        d1=np.asarray(d1),
        d2=np.asarray(d2),
        d3=np.asarray(d3),
        companion=np.asarray(comp),
        case1=np.asarray(case1, dtype=bool),
        decision=np.asarray(dec),
        d_fb=np.bitwise_count(fb).astype(np.int64),
    )


def _pick_kernel(backend: str | None):
    if backend is None:
        return _kernels.protocol_block
    if backend == "numpy":
        return _kernels.protocol_block_numpy
    if backend == "numba":
        if not _kernels.HAVE_NUMBA:
            raise RuntimeError("numba backend unavailable")
        return _kernels.protocol_block_numba
    raise ValueError(f"unknown backend {backend!r}")


def code_for(cfg: SimConfig) -> Codebook:
    """The codebook a config implies: length round(gamma n), seeded by cfg.seed."""
    return build_code(cfg.m, cfg.M, cfg.seed, p=cfg.p)


def run_trial(cfg: SimConfig, code: Codebook, rng_state: int = 0) -> TrialOutcome:
    """One protocol execution; ``rng_state`` is the trial index in the run's stream."""
    return simulate_range(cfg, code, int(rng_state), int(rng_state) + 1).outcome(0)


def chunk_ranges(trials: int, chunk: int) -> list[tuple[int, int]]:
    return [(a, min(a + chunk, trials)) for a in range(0, trials, chunk)]


def default_chunk(cfg: SimConfig) -> int:
    return max(1, _BLOCK_CELLS // max(cfg.M, cfg.width))


def estimate(
    cfg: SimConfig,
    code: Codebook | None = None,
    workers: int = 1,
    chunk: int | None = None,
    backend: str | None = None,
) -> SimStats:
    """Aggregate counts over ``cfg.trials`` trials.

    Counts depend only on ``cfg`` (and ``code``): neither ``workers`` nor
    ``chunk`` changes the result.
    """
    if code is None:
        code = code_for(cfg)
    _check_code(cfg, code)
    ranges = chunk_ranges(cfg.trials, chunk or default_chunk(cfg))

    def run(r):
        return simulate_range(cfg, code, r[0], r[1], backend=backend).stats()

    if workers <= 1 or len(ranges) == 1:
        parts = [run(r) for r in ranges]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, ranges))
    total = parts[0]
    for s in parts[1:]:
        total = total + s
    return total


# ---------------------------------------------------------------------------
# error-rate trend across blocklengths


@dataclass(frozen=True)
class TrendRow:
    n: int
    M: int
    m: int
    trials: int
    errors: int
    error_rate: float
    ci_low: float
    ci_high: float
    neg_log_rate: float  # -ln(P_e)/n, nan when degenerate
    degenerate: bool


@dataclass(frozen=True)
class Trend:
    rate: float
    rows: tuple[TrendRow, ...]
    slope: float  # d(-ln P_e)/dn over non-degenerate rows, nan if < 2 of them


def exponent_trend(
    cfg_base: SimConfig, n_list, rate: float | None = None, workers: int = 1
) -> Trend:
    """Error rate versus blocklength at a fixed rate.

    For every n, ``M = max(2, round(exp(rate n)))`` and the remaining settings
    come from ``cfg_base``. ``rate`` defaults to ``ln(M)/n`` of the base
    config. Rows with no observed errors are flagged degenerate and left out
    of the regression.
    """
    if rate is None:
        rate = math.log(cfg_base.M) / cfg_base.n
    if rate <= 0.0:
        raise ValueError(f"rate={rate} must be positive")
    rows = []
    for n in n_list:
        M = max(2, _round_half_up(math.exp(rate * n)))
        cfg = SimConfig(
            n=int(n), M=M, gamma=cfg_base.gamma, t=cfg_base.t, p=cfg_base.p,
            p1=cfg_base.p1, trials=cfg_base.trials, seed=cfg_base.seed,
        )
        st = estimate(cfg, workers=workers)
        k, N = st.errors_total, st.trials
        ci = binomtest(k, N).proportion_ci(confidence_level=0.95, method="wilson")
        degenerate = k == 0
        rows.append(
            TrendRow(
                n=cfg.n, M=M, m=cfg.m, trials=N, errors=k, error_rate=k / N,
                ci_low=float(ci.low), ci_high=float(ci.high),
                neg_log_rate=math.nan if degenerate else -math.log(k / N) / cfg.n,
                degenerate=degenerate,
            )
        )
    good = [r for r in rows if not r.degenerate]
    slope = math.nan
    if len(good) >= 2:
        ns = np.array([r.n for r in good], dtype=float)
        ys = np.array([-math.log(r.error_rate) for r in good])
        slope = float(np.polyfit(ns, ys, 1)[0])
    return Trend(rate=rate, rows=tuple(rows), slope=slope)
