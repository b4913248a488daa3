"""Tabulate the closed-form runtime model for measured work and span.

Runs each program once on the sequential backend to get T1 (work) and
T-inf (critical path), then evaluates the four model cases over a grid of
processor counts P and SIMD widths W.
"""

import argparse
import itertools

import numpy as np

from trees.apps import fft_program, fib_program, mergesort_program
from trees.errors import ConfigError
from trees.metrics import PerfModelParams, model_time
from trees.program import run_program

CASES = ("scalar", "best", "pessimistic", "worst")


def programs(size: int):
    rng = np.random.default_rng(0)
    yield "fib", fib_program(min(size, 25))
    yield "mergesort", mergesort_program(rng.integers(0, 1 << 30, 1 << size))
    yield "fft", fft_program(rng.standard_normal(1 << size))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=12, help="fib n, or log2 of the array length")
    ap.add_argument("--depth", type=int, default=2, help="branch nesting D for the worst case")
    ap.add_argument("--v1", type=float, default=1.0)
    ap.add_argument("--vinf", type=float, default=1.0)
    args = ap.parse_args()

    for name, prog in programs(args.size):
        m = run_program(prog).metrics
        T1, Tinf = m.work_tasks, m.critical_path
        print(f"\n{name}: T1={T1} Tinf={Tinf} parallelism={T1 / Tinf:.1f}")
        print(f"{'P':>4} {'W':>4}" + "".join(f"{c:>14}" for c in CASES))
        for P, W in itertools.product((1, 4, 8), (1, 16, 64)):
            row = []
            for case in CASES:
                try:
                    t = model_time(PerfModelParams(T1, Tinf, P, W, args.v1, args.vinf, args.depth), case)
                    row.append(f"{t:14.1f}")
                except ConfigError:
                    row.append(f"{'n/a':>14}")
            print(f"{P:>4} {W:>4}" + "".join(row))


if __name__ == "__main__":
    main()
