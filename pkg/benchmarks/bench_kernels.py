"""Time the numba and numpy kernel paths on identical inputs.

    python benchmarks/bench_kernels.py [--repeat 5] [--seed 0]

Each row checks that both paths return the same answer before timing.
"""
import argparse
import time

import numpy as np

from itempricing import _kernels


def _best(fn, args, repeat):
    out = None
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t0)
    return out, min(times)


def xos_cases(rng):
    for n in (8, 12, 16):
        clauses = rng.integers(0, 101, size=(4, n)).astype(np.int64)
        prices = rng.integers(0, 40, size=n).astype(np.int64)
        yield f"xos_best_subset n={n}", (clauses, prices)


def dp_cases(rng):
    for m, n_buyers, k in ((4, 4, 2), (5, 5, 2), (6, 4, 2), (6, 5, 3)):
        scores = rng.integers(0, 1000, size=(n_buyers, 1 << m)).astype(np.int64)
        scores[:, 0] = 0
        yield f"welfare_dp m={m} N={n_buyers} k={k}", (scores, np.full(m, k, dtype=np.int64))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if not _kernels.HAVE_NUMBA:
        print("numba is not installed; only the numpy path can be timed")
    rng = np.random.default_rng(args.seed)
    rows = [(label, _kernels.xos_best_subset_numpy, _kernels.xos_best_subset_numba, a) for label, a in xos_cases(rng)]
    rows += [(label, _kernels.welfare_dp_numpy, _kernels.welfare_dp_numba, a) for label, a in dp_cases(rng)]
    print(f"{'kernel':34s} {'numpy ms':>10s} {'numba ms':>10s} {'speedup':>8s}  agree")
    for label, slow, fast, a in rows:
        ref, t_np = _best(slow, a, args.repeat)
        if not _kernels.HAVE_NUMBA:
            print(f"{label:34s} {t_np * 1e3:10.3f}")
            continue
        fast(*a)  # compile outside the timed loop
        got, t_nb = _best(fast, a, args.repeat)
        agree = np.array_equal(np.asarray(ref), np.asarray(got))
        print(f"{label:34s} {t_np * 1e3:10.3f} {t_nb * 1e3:10.3f} {t_np / t_nb:8.1f}x  {agree}")
        if not agree:
            raise SystemExit(f"{label}: backends disagree ({ref} vs {got})")


if __name__ == "__main__":
    main()
