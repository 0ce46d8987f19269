import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bscfeedback import _kernels
from bscfeedback.simulator import _pick_kernel

pytestmark = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not available")


@st.composite
def blocks(draw):
    m = draw(st.integers(1, 64))
    M = draw(st.integers(2, min(40, 2**m)))
    k = draw(st.integers(0, 20))
    T = draw(st.integers(1, 30))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    mask = np.uint64(2**m - 1)
    if m <= 20:
        words = rng.choice(2**m, size=M, replace=False).astype(np.uint64)
    else:
        # one-bit neighbours of a base word exercise the tie rules
        base = rng.integers(0, 2**63, dtype=np.uint64) & mask
        flips = np.left_shift(np.uint64(1), rng.integers(0, m, M).astype(np.uint64))
        words = np.unique(np.concatenate([[base], base ^ flips]))
    e1 = rng.integers(0, 2**63, T, dtype=np.uint64) & mask
    e1 &= rng.integers(0, 2**63, T, dtype=np.uint64)  # sparser flips
    fb = rng.integers(0, 2**63, T, dtype=np.uint64) & mask & rng.integers(0, 2**63, T, dtype=np.uint64)
    true_idx = rng.integers(0, words.size, T).astype(np.int64)
    e2w = rng.integers(0, k + 1, T).astype(np.int64)
    t_m = draw(st.sampled_from([0.0, 0.5, 1.0, 3.0, 100.0])) * m / 10
    return words, true_idx, e1, e2w, fb, m, k, t_m


@settings(max_examples=150)
@given(blocks())
def test_protocol_kernels_agree(args):
    a = _kernels.protocol_block_numpy(*args)
    b = _kernels.protocol_block_numba(*args)
    for x, y in zip(a, b):
        assert np.array_equal(np.asarray(x), np.asarray(y))


@settings(max_examples=60)
@given(st.integers(1, 64), st.integers(2, 300), st.integers(0, 2**32 - 1), st.floats(0.0, 1.0))
def test_expurgation_kernels_agree(m, n, seed, z):
    rng = np.random.default_rng(seed)
    hi = 2**m if m < 63 else 2**63
    words = rng.integers(0, hi, n, dtype=np.uint64)
    z_pow = z ** np.arange(65, dtype=np.float64)
    a = _kernels.expurgation_scores_numpy(words, z_pow, block=37)
    b = _kernels.expurgation_scores_numba(words, z_pow)
    assert np.array_equal(a, b)
    assert _kernels.min_distance_numpy(words, block=37) == _kernels.min_distance_numba(words)


def test_pack_bits_layout():
    bits = np.zeros((2, 64), dtype=bool)
    bits[0, 0] = bits[0, 63] = bits[1, 5] = True
    packed = _kernels.pack_bits(bits)
    assert packed.tolist() == [1 + 2**63, 32]
    assert _kernels.pack_bits(np.zeros((3, 0), bool)).tolist() == [0, 0, 0]


def test_backend_selection():
    assert _pick_kernel("numpy") is _kernels.protocol_block_numpy
    assert _pick_kernel("numba") is _kernels.protocol_block_numba
    with pytest.raises(ValueError):
        _pick_kernel("cuda")
    assert _kernels.BACKEND in ("numba", "numpy")
