"""Wall time and allocation atomics for each backend and worker count.

Python threads share the GIL, so wall time is not a speedup measurement.
The interesting columns are the allocation atomics, which drop from one
per fork to one per forking work-group under the bulk-parallel backend,
and the backend-invariant work and critical path.
"""

import argparse
import time

import numpy as np

from trees.apps import fib_program, mergesort_program, random_graph, sssp_program
from trees.executor import BackendConfig
from trees.program import run_program


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--workers", type=int, nargs="+", default=[1, 2, 4, 8])
    ap.add_argument("--group-size", type=int, default=256)
    args = ap.parse_args()

    rng = np.random.default_rng(1)
    progs = {
        "fib(20)": fib_program(20),
        "mergesort-map(2^12)": mergesort_program(rng.integers(0, 1 << 30, 1 << 12), use_map=True),
        "sssp(V=1000,E=8000)": sssp_program(random_graph(rng, 1000, 8000), 0),
    }
    backends = [("seq", BackendConfig())] + [
        (f"par/{w}", BackendConfig("bulk-parallel", workers=w, group_size=args.group_size)) for w in args.workers
    ]
    print(f"{'program':<22}{'backend':<9}{'seconds':>9}{'work':>9}{'T_inf':>7}{'atomics':>9}")
    for name, prog in progs.items():
        for label, backend in backends:
            start = time.perf_counter()
            m = run_program(prog, backend).metrics
            dt = time.perf_counter() - start
            print(f"{name:<22}{label:<9}{dt:9.3f}{m.work_tasks:9d}{m.critical_path:7d}{m.atomic_ops:9d}")


if __name__ == "__main__":
    main()
