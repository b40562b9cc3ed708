"""Time the compiled DP fill kernel against the numpy fallback.

Both kernels fill the same (n+1, cap_t+1, cap_e+1) int64 table; the
scheduler picks whichever imported. Run from the repository root:

    python3 benchmarks/bench_dp.py
"""

import argparse
import time

import numpy as np

from relaydiff import _dp_numpy

try:
    from relaydiff import _dp_core
except ImportError:
    _dp_core = None


def random_instance(rng, n, cap_t, cap_e):
    unit_t = rng.integers(1, max(2, cap_t // 4), size=n, dtype=np.int64)
    unit_e = rng.integers(1, max(2, cap_e // 4), size=n, dtype=np.int64)
    sizes = rng.integers(5 * 10**8, 4 * 10**9, size=n, dtype=np.int64)
    return unit_t, unit_e, sizes


def best_of(kernel, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        table = kernel(*args)
        best = min(best, time.perf_counter() - started)
    return best, table


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    shapes = [(10, 100, 100), (20, 200, 200), (25, 400, 400), (40, 800, 800)]

    print(f"{'n':>4} {'cap_t':>6} {'cap_e':>6} {'numpy':>10} {'compiled':>10} {'speedup':>8}")
    for n, cap_t, cap_e in shapes:
        unit_t, unit_e, sizes = random_instance(rng, n, cap_t, cap_e)
        kernel_args = (unit_t, unit_e, sizes, cap_t, cap_e)
        t_numpy, table_numpy = best_of(_dp_numpy.fill_dp_table, kernel_args, args.repeats)
        if _dp_core is None:
            print(f"{n:>4} {cap_t:>6} {cap_e:>6} {t_numpy:>9.4f}s {'missing':>10} {'':>8}")
            continue
        t_core, table_core = best_of(_dp_core.fill_dp_table, kernel_args, args.repeats)
        if not np.array_equal(np.asarray(table_numpy), np.asarray(table_core)):
            raise SystemExit("kernel outputs disagree")
        print(
            f"{n:>4} {cap_t:>6} {cap_e:>6} {t_numpy:>9.4f}s {t_core:>9.4f}s "
            f"{t_numpy / t_core:>7.2f}x"
        )


if __name__ == "__main__":
    main()
