"""Compare the numba and numpy walk kernels on Johnson swap walks.

    python benchmarks/bench_walk.py [--trials 20000] [--repeat 3]

Both backends consume identical SplitMix64 streams, so the script also
checks that their outputs agree element for element.
"""

import argparse
import time

import numpy as np

from qwmatch import _kernels
from qwmatch import walkmodel as wm
from qwmatch.markov import simulate_search

CASES = [(2, 2), (2, 3), (2, 4), (3, 3), (3, 4)]


def best_time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    backends = ["numpy"] + (["numba"] if _kernels.HAVE_NUMBA else [])
    print(f"{'n':>2} {'r':>2} {'states':>6} " + " ".join(f"{b + ' s':>10}" for b in backends) + f" {'speedup':>8}")
    for n, r in CASES:
        inst = wm.johnson_instance(n, r, lazy=(n * (2 * n - 1) - r < 2))
        marked = sorted(wm.marked_set(inst, inst.perfect_matchings[0]))
        times, results = {}, {}
        for b in backends:
            simulate_search(inst.chain, marked, 10, args.seed, backend=b)  # warm-up / JIT
            times[b], results[b] = best_time(
                lambda b=b: simulate_search(inst.chain, marked, args.trials, args.seed, backend=b), args.repeat
            )
        if len(backends) == 2:
            a, z = results["numpy"], results["numba"]
            if not (np.array_equal(a.steps, z.steps) and np.array_equal(a.final_states, z.final_states)):
                raise SystemExit(f"backends disagree at n={n}, r={r}")
            speed = f"{times['numpy'] / times['numba']:8.1f}x"
        else:
            speed = f"{'n/a':>8}"
        cols = " ".join(f"{times[b]:10.4f}" for b in backends)
        print(f"{n:>2} {r:>2} {inst.num_states:>6} {cols} {speed}")


if __name__ == "__main__":
    main()
