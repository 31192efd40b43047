"""Compare the numba and numpy sweep kernels on synthetic per-room event arrays.

    python benchmarks/bench_overlaps.py [--sizes 1000 10000 100000] [--repeat 5]

Both backends must return the same pairs; the script checks that before timing.
"""

import argparse
import time

import numpy as np

from iotconflict import _kernels


def make_case(n, seed=0, users=4, horizon_minutes=None, mean_minutes=45):
    rng = np.random.default_rng(seed)
    # keep the density of concurrent events roughly fixed as n grows
    horizon = horizon_minutes or n * 10
    starts = np.sort(rng.integers(0, horizon * 60_000_000, n)).astype(np.int64)
    lengths = rng.exponential(mean_minutes * 60_000_000, n).astype(np.int64)
    return starts, starts + lengths, rng.integers(0, users, n).astype(np.int64)


def best_of(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=[1_000, 10_000, 100_000, 1_000_000])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)

    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    warm = make_case(16)
    _kernels.overlap_pairs_numba(*warm)  # compile outside the timed region

    print(f"{'events':>9} {'pairs':>10} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}")
    for n in args.sizes:
        case = make_case(n, seed=n)
        t_np, (ii, jj) = best_of(_kernels.overlap_pairs_numpy, case, args.repeat)
        t_nb, (ki, kj) = best_of(_kernels.overlap_pairs_numba, case, args.repeat)
        if not (np.array_equal(ii, ki) and np.array_equal(jj, kj)):
            raise SystemExit(f"backends disagree at n={n}")
        print(f"{n:>9} {len(ii):>10} {t_np * 1e3:>10.2f} {t_nb * 1e3:>10.2f} {t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
