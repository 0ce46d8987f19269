"""Hot loops of the protocol simulator: numba-compiled with a pure numpy twin.

Set ``BSCFEEDBACK_DISABLE_NUMBA=1`` to force the numpy implementations (also
used automatically when numba is not importable). Both paths consume the same
packed inputs and return identical outputs.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("BSCFEEDBACK_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if _DISABLED:
        raise ImportError("disabled by BSCFEEDBACK_DISABLE_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


# ---------------------------------------------------------------------------
# numpy path


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack the last axis of a boolean array (<= 64 wide) into uint64, bit i = column i."""
    width = bits.shape[-1]
    if width == 0:
        return np.zeros(bits.shape[:-1], dtype=np.uint64)
    weights = np.left_shift(np.uint64(1), np.arange(width, dtype=np.uint64))
    return np.bitwise_or.reduce(np.where(bits, weights, np.uint64(0)), axis=-1)


def protocol_block_numpy(codes, true_idx, e1, e2w, fb, m, k, t_m):
    """Run the two-phase decoding rule for a block of trials.

    Parameters are the codebook ``codes`` (uint64[M]), the true message per
    trial, phase-I forward noise ``e1`` and feedback noise ``fb`` as packed
    words, the phase-II flip count ``e2w``, phase lengths ``m``/``k`` and the
    case-1 threshold ``t_m = t * m``.

    Returns ``(r1, r2, d1, d2, d3, companion, case1, decision)``; ``d3`` is -1
    when fewer than three codewords exist.
    """
    M = codes.shape[0]
    T = true_idx.shape[0]
    idx = np.arange(M, dtype=np.int64)
    y = codes[true_idx] ^ e1
    xp = y ^ fb
    dy = np.bitwise_count(codes[None, :] ^ y[:, None]).astype(np.int64)
    # rank by (distance, index): ties go to the lower message index
    keys = dy * M + idx[None, :]
    kth = min(2, M - 1)
    top = np.sort(np.partition(keys, kth, axis=1)[:, : kth + 1], axis=1)
    r1, r2 = top[:, 0] % M, top[:, 1] % M
    d1, d2 = top[:, 0] // M, top[:, 1] // M
    d3 = top[:, 2] // M if M >= 3 else np.full(T, -1, dtype=np.int64)

    dfb = np.bitwise_count(codes[None, :] ^ xp[:, None]).astype(np.int64)
    fkeys = dfb * M + idx[None, :]
    fkeys[np.arange(T), true_idx] = np.iinfo(np.int64).max
    companion = np.argmin(fkeys, axis=1).astype(np.int64)

    case1 = (d3 >= 0) & (d3 <= d2 + t_m) if M >= 3 else np.zeros(T, dtype=np.bool_)

    # phase II: lower index of the transmitter's pair sends zeros, higher sends ones
    sends_ones = true_idx > companion
    w = np.where(sends_ones, k - e2w, e2w)
    a, b = np.minimum(r1, r2), np.maximum(r1, r2)
    da = np.where(a == r1, d1, d2)
    db = np.where(a == r1, d2, d1)
    pick_a = da + w <= db + (k - w)
    decision = np.where(case1, r1, np.where(pick_a, a, b))
    return r1, r2, d1, d2, d3, companion, case1, decision


def _weigh_histogram(counts, z_pow):
    # fixed summation order (ascending distance) so both backends round alike
    out = np.zeros(counts.shape[0], dtype=np.float64)
    for d in range(counts.shape[1]):
        out += counts[:, d] * z_pow[d]
    return out


def expurgation_scores_numpy(words, z_pow, block=1024):
    """score_i = sum_{j != i} z^{d(w_i, w_j)}, with z^d supplied as a table."""
    n = words.shape[0]
    counts = np.empty((n, 65), dtype=np.int64)
    for s in range(0, n, block):
        d = np.bitwise_count(words[s : s + block, None] ^ words[None, :]).astype(np.int64)
        rows = d.shape[0]
        flat = d + 65 * np.arange(rows)[:, None]
        counts[s : s + rows] = np.bincount(flat.ravel(), minlength=65 * rows).reshape(rows, 65)
    counts[:, 0] -= 1  # the word itself
    return _weigh_histogram(counts, z_pow)


def min_distance_numpy(words, block=1024):
    n = words.shape[0]
    best = 65
    for s in range(0, n, block):
        d = np.bitwise_count(words[s : s + block, None] ^ words[None, :]).astype(np.int64)
        rows = np.arange(d.shape[0])
        d[rows, rows + s] = 65
        best = min(best, int(d.min()))
    return best


# ---------------------------------------------------------------------------
# numba path

if HAVE_NUMBA:

    @njit(cache=True, inline="always")
    def _popcount(x):
        x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
        x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
        x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
        return np.int64((x * np.uint64(0x0101010101010101)) >> np.uint64(56))

    @njit(cache=True, nogil=True)
    def protocol_block_numba(codes, true_idx, e1, e2w, fb, m, k, t_m):
        M = codes.shape[0]
        T = true_idx.shape[0]
        r1 = np.empty(T, np.int64)
        r2 = np.empty(T, np.int64)
        d1 = np.empty(T, np.int64)
        d2 = np.empty(T, np.int64)
        d3 = np.empty(T, np.int64)
        companion = np.empty(T, np.int64)
        case1 = np.empty(T, np.bool_)
        decision = np.empty(T, np.int64)
        big = np.int64(1) << 62
        for s in range(T):
            tr = true_idx[s]
            y = codes[tr] ^ e1[s]
            xp = y ^ fb[s]
            # running top three by (distance, index); strict < keeps lower index on ties
            b1 = big
            b2 = big
            b3 = big
            i1 = -1
            i2 = -1
            cbest = big
            ci = -1
            for i in range(M):
                d = _popcount(codes[i] ^ y)
                if d < b1:
                    b3 = b2
                    b2, i2 = b1, i1
                    b1, i1 = d, i
                elif d < b2:
                    b3 = b2
                    b2, i2 = d, i
                elif d < b3:
                    b3 = d
                if i != tr:
                    df = _popcount(codes[i] ^ xp)
                    if df < cbest:
                        cbest, ci = df, i
            r1[s] = i1
            r2[s] = i2
            d1[s] = b1
            d2[s] = b2
            d3[s] = b3 if M >= 3 else -1
            companion[s] = ci
            c1 = M >= 3 and b3 <= b2 + t_m
            case1[s] = c1
            if c1:
                decision[s] = i1
                continue
            w = k - e2w[s] if tr > ci else e2w[s]
            if i1 < i2:
                a, da, b, db = i1, b1, i2, b2
            else:
                a, da, b, db = i2, b2, i1, b1
            decision[s] = a if da + w <= db + (k - w) else b
        return r1, r2, d1, d2, d3, companion, case1, decision

    @njit(cache=True, nogil=True)
    def expurgation_scores_numba(words, z_pow):
        n = words.shape[0]
        counts = np.zeros(65, np.int64)
        out = np.empty(n, np.float64)
        for i in range(n):
            counts[:] = 0
            for j in range(n):
                if j != i:
                    counts[_popcount(words[i] ^ words[j])] += 1
            acc = 0.0
            for d in range(65):
                acc += counts[d] * z_pow[d]
            out[i] = acc
        return out

    @njit(cache=True, nogil=True)
    def min_distance_numba(words):
        n = words.shape[0]
        best = 65
        for i in range(n):
            for j in range(i + 1, n):
                d = _popcount(words[i] ^ words[j])
                if d < best:
                    best = d
        return best

    protocol_block = protocol_block_numba
    expurgation_scores = expurgation_scores_numba
    min_distance = min_distance_numba
else:
    protocol_block = protocol_block_numpy
    expurgation_scores = expurgation_scores_numpy
    min_distance = min_distance_numpy

BACKEND = "numba" if HAVE_NUMBA else "numpy"
