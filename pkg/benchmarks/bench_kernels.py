"""Compare the compiled and pure-Python simulation backends.

    python3 benchmarks/bench_kernels.py --reps 20000
"""
import argparse
import time

import numpy as np

from bathtub_repair import BATHTUB_EXAMPLE, FirstImperfectThenMinimal, inverse_cumulative
from bathtub_repair import simulate
from bathtub_repair.simulate import count_failures


def timed(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--reps", type=int, default=20_000)
    parser.add_argument("--delta", type=float, default=0.5)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    if simulate._core is None:
        print("compiled kernel not available; only the pure-Python backend can run")
        return 1

    policy = FirstImperfectThenMinimal(args.delta)
    print(f"{'kernel':<28}{'cython s':>12}{'python s':>12}{'speedup':>10}")
    for sampler in simulate.SAMPLERS:
        runs = {}
        for backend in ("cython", "python"):
            runs[backend] = timed(
                lambda: count_failures(BATHTUB_EXAMPLE, policy, 10.0, 42, args.reps, sampler, backend=backend),
                args.repeat if backend == "cython" else 1,
            )
        assert np.array_equal(runs["cython"][1], runs["python"][1]), "backends disagree"
        c, p = runs["cython"][0], runs["python"][0]
        print(f"{'count_failures/' + sampler:<28}{c:>12.3f}{p:>12.3f}{p / c:>10.1f}x")

    ys = np.geomspace(1e-6, 300.0, 100_000)
    params = simulate._core_params(BATHTUB_EXAMPLE)
    c, _ = timed(lambda: [simulate._core.inverse_cumulative(params, y) for y in ys], args.repeat)
    p, _ = timed(lambda: [inverse_cumulative(BATHTUB_EXAMPLE, y) for y in ys], 1)
    print(f"{'inverse_cumulative x1e5':<28}{c:>12.3f}{p:>12.3f}{p / c:>10.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
