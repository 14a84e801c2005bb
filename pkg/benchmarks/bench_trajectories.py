"""Time the numba and numpy trajectory kernels on the same ensemble.

    python3 benchmarks/bench_trajectories.py --samples 200000 --repeat 3

Both kernels draw from the same counter-based stream, so the script also
checks that their outputs agree.
"""

import argparse
import time

import numpy as np

from photontrap import canonical_state, maximally_mixed, run_trajectories
from photontrap._accel import HAVE_NUMBA

CASES = [
    ("n=3 |100> N=5", 3, np.pi / np.sqrt(10), 5, 1, "one"),
    ("n=5 mixed N=4", 5, 0.9, 4, 1, "mixed"),
    ("n=4 mixed monitor=2 N=6", 4, 2 * np.pi / np.sqrt(14), 6, 2, "mixed"),
]


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    backends = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    print(f"samples={args.samples} best of {args.repeat}")
    print(f"{'case':<28}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}  agree")
    for label, n, theta, N, mon, init in CASES:
        rho = canonical_state("computational", n, mask=1) if init == "one" else maximally_mixed(n)
        results = {}
        for b in backends:
            # warm-up covers JIT compilation and operator caches
            run_trajectories(rho, n, theta, N, mon, 100, args.seed, backend=b)
            results[b] = best_of(lambda: run_trajectories(rho, n, theta, N, mon, args.samples,
                                                          args.seed, backend=b), args.repeat)
        row = f"{label:<28}" + "".join(f"{results[b][0]:>11.3f}s" for b in backends)
        if "numba" in results:
            a, c = results["numpy"][1], results["numba"][1]
            agree = (a.successes, a.restarts, a.injections) == (c.successes, c.restarts, c.injections)
            row += f"{results['numpy'][0] / results['numba'][0]:>9.1f}x  {agree}"
        print(row)
    if not HAVE_NUMBA:
        print("numba unavailable or disabled: numpy kernel only")


if __name__ == "__main__":
    main()
