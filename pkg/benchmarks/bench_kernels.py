"""Compare the numba and numpy simulator backends.

    python3 benchmarks/bench_kernels.py [--trials N] [--repeat R]

Each timing is the best of R runs after one warm-up call (which also
triggers JIT compilation). Outputs are checked for equality first.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from bscfeedback import _kernels
from bscfeedback.simulator import SimConfig, code_for, estimate

CASES = [
    ("small code", dict(n=30, M=8, gamma=0.6, t=0.05, p=0.2, p1=0.01, seed=1)),
    ("large code", dict(n=60, M=4096, gamma=0.5, t=0.05, p=0.05, p1=0.01, seed=1)),
]


def best_of(fn, repeat):
    fn()
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def kernel_inputs(cfg, trials, rng):
    code = code_for(cfg)
    m = cfg.m
    true_idx = rng.integers(0, cfg.M, trials).astype(np.int64)
    e1 = _kernels.pack_bits(rng.random((trials, m)) < cfg.p)
    fb = _kernels.pack_bits(rng.random((trials, m)) < cfg.p1)
    e2w = rng.binomial(cfg.k, cfg.p, trials).astype(np.int64)
    return code.words, true_idx, e1, e2w, fb, m, cfg.k, cfg.t * m


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is unavailable or disabled; nothing to compare")

    rng = np.random.default_rng(0)
    print(f"{'case':<28}{'numpy [s]':>12}{'numba [s]':>12}{'speedup':>10}")
    for name, kw in CASES:
        cfg = SimConfig(trials=args.trials, **kw)
        inputs = kernel_inputs(cfg, args.trials, rng)
        a = _kernels.protocol_block_numpy(*inputs)
        b = _kernels.protocol_block_numba(*inputs)
        assert all(np.array_equal(x, y) for x, y in zip(a, b))
        rows = [
            (f"protocol kernel, {name}",
             lambda: _kernels.protocol_block_numpy(*inputs),
             lambda: _kernels.protocol_block_numba(*inputs)),
            (f"estimate, {name}",
             lambda: estimate(cfg, backend="numpy"),
             lambda: estimate(cfg, backend="numba")),
        ]
        for label, f_np, f_nb in rows:
            t_np, t_nb = best_of(f_np, args.repeat), best_of(f_nb, args.repeat)
            print(f"{label:<28}{t_np:>12.4f}{t_nb:>12.4f}{t_np / t_nb:>9.1f}x")

    words = rng.integers(0, 2**40, 4000, dtype=np.uint64)
    z_pow = 0.4 ** np.arange(65, dtype=np.float64)
    assert np.array_equal(
        _kernels.expurgation_scores_numpy(words, z_pow), _kernels.expurgation_scores_numba(words, z_pow)
    )
    t_np = best_of(lambda: _kernels.expurgation_scores_numpy(words, z_pow), args.repeat)
    t_nb = best_of(lambda: _kernels.expurgation_scores_numba(words, z_pow), args.repeat)
    print(f"{'expurgation, 4000 words':<28}{t_np:>12.4f}{t_nb:>12.4f}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
