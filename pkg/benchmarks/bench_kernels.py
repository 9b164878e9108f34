"""Benchmark the numba kernels against the pure-numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--nodes 200000] [--lmax 48] [--repeat 5]

Both implementations are imported directly, so this runs regardless of the
HALFSECT_NO_NUMBA setting.
"""

import argparse
import time

import numpy as np

from halfsect.kernels import _numba_impl, _numpy_impl


def _time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--nodes", type=int, default=200_000)
    ap.add_argument("--lmax", type=int, default=48)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    x = rng.uniform(-1, 1, args.nodes)
    c0 = np.sort(rng.uniform(0, np.pi, 130))
    c1 = np.sort(rng.uniform(0, 2 * np.pi, 258))
    c2 = np.sort(rng.uniform(0, np.pi, 66))
    v2 = rng.normal(size=(130, 258))
    v3 = rng.normal(size=(130, 66, 258))
    q0 = rng.uniform(c0[1], c0[-2], args.nodes)
    q1 = rng.uniform(c1[1], c1[-2], args.nodes)
    q2 = rng.uniform(c2[1], c2[-2], args.nodes)

    cases = {
        f"legendre_table(n={args.nodes}, lmax={args.lmax})": (
            lambda impl: impl.legendre_table(x, args.lmax)
        ),
        f"bilinear(n={args.nodes})": (lambda impl: impl.bilinear(v2, c0, c1, q0, q1)),
        f"trilinear(n={args.nodes})": (
            lambda impl: impl.trilinear(v3, c0, c2, c1, q0, q2, q1)
        ),
    }

    # trigger JIT compilation outside the timed region
    for fn in cases.values():
        fn(_numba_impl)

    print(f"{'kernel':<44} {'numpy':>10} {'numba':>10} {'speedup':>9}")
    for name, fn in cases.items():
        t_np = _time(lambda: fn(_numpy_impl), args.repeat)
        t_nb = _time(lambda: fn(_numba_impl), args.repeat)
        print(f"{name:<44} {t_np * 1e3:>8.1f}ms {t_nb * 1e3:>8.1f}ms {t_np / t_nb:>8.2f}x")


if __name__ == "__main__":
    main()
