"""Command-line runner.

    trees run --program fib --n 20 --check
    trees run --program postorder --input sample.tree --trace out.jsonl
    trees compare-trace out.jsonl golden.jsonl

Exit codes: 0 ok, 1 trace mismatch, 2 bad configuration or input,
3 fatal runtime error (capacity, epoch limit, task failure), 4 oracle
mismatch under ``--check``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import apps
from .apps import inputs
from .errors import FatalRuntimeError, TreesError
from .executor import BackendConfig
from .program import DEFAULT_CAPACITY, DEFAULT_EPOCH_LIMIT, Program, register_program, run_program

EXIT_OK, EXIT_MISMATCH, EXIT_CONFIG, EXIT_FATAL, EXIT_CHECK = 0, 1, 2, 3, 4


@dataclass
class RunConfig:
    program: str
    input_path: str | None = None
    n: int | None = None
    src: int = 0
    seed: int = 0
    backend: str = "seq"
    workers: int = 1
    group_size: int = 256
    capacity: int = DEFAULT_CAPACITY
    trace_path: str | None = None
    golden_path: str | None = None
    epoch_limit: int = DEFAULT_EPOCH_LIMIT
    check: bool = False
    trace_slots: bool = False

    def backend_config(self) -> BackendConfig:
        kind = {"seq": "sequential", "par": "bulk-parallel"}.get(self.backend, self.backend)
        return BackendConfig(kind, self.workers, self.group_size)


def _spin(ctx):
    ctx.fork("spin")


def spin_program() -> Program:
    """Never halts: every task forks a copy of itself."""
    return register_program("spin", tasks=[("spin", _spin)], root=("spin", []))


def _need(cfg: RunConfig, what: str):
    if what == "n" and cfg.n is None:
        raise ValueError(f"program {cfg.program!r} needs --n or --input")
    if what == "input" and cfg.input_path is None:
        raise ValueError(f"program {cfg.program!r} needs --input")


def _array_input(cfg: RunConfig) -> np.ndarray:
    if cfg.input_path:
        return inputs.read_array(cfg.input_path)
    _need(cfg, "n")
    return np.random.default_rng(cfg.seed).integers(0, 1 << 31, size=cfg.n)


def _signal_input(cfg: RunConfig) -> np.ndarray:
    if cfg.input_path:
        return inputs.read_signal(cfg.input_path)
    _need(cfg, "n")
    rng = np.random.default_rng(cfg.seed)
    return rng.standard_normal(cfg.n) + 1j * rng.standard_normal(cfg.n)


def build(cfg: RunConfig) -> tuple[Program, Callable[[Any], bool] | None]:
    """Program for ``cfg`` plus a predicate checking its result against an oracle."""
    name = cfg.program
    if name == "fib":
        _need(cfg, "n")
        expected = apps.fib_reference(cfg.n)
        return apps.fib_program(cfg.n), lambda v: v == expected
    if name in ("preorder", "postorder"):
        tree = inputs.read_tree(cfg.input_path) if cfg.input_path else apps.SAMPLE_TREE
        order = name[:-5]
        return apps.traversal_program(tree, order), lambda v: apps.check_visit_order(tree, v, order)
    if name in ("bfs", "sssp"):
        _need(cfg, "input")
        g = inputs.read_graph(cfg.input_path)
        if name == "bfs":
            ref = apps.bfs_reference(g, cfg.src)
            return apps.bfs_program(g, cfg.src), lambda v: np.array_equal(v, ref)
        ref = apps.dijkstra_reference(g, cfg.src)
        return apps.sssp_program(g, cfg.src), lambda v: np.array_equal(v, ref)
    if name in ("mergesort", "mergesort-map"):
        a = _array_input(cfg)
        ref = np.sort(a, kind="stable")
        return apps.mergesort_program(a, use_map=name == "mergesort-map"), lambda v: np.array_equal(v, ref)
    if name == "fft":
        x = _signal_input(cfg)
        ref = apps.dft_reference(x)
        return apps.fft_program(x), lambda v: float(np.max(np.abs(v - ref), initial=0.0)) < 1e-9
    if name == "spin":
        return spin_program(), None
    raise ValueError(f"unknown program {name!r}")


PROGRAMS = ("fib", "preorder", "postorder", "bfs", "sssp", "mergesort", "mergesort-map", "fft", "spin")


def _summarize(value) -> str:
    if isinstance(value, np.ndarray):
        if value.dtype.kind == "i":
            value = [("inf" if v == apps.graphs.INF else int(v)) for v in value]
        else:
            value = value.tolist()
    text = str(value)
    return text if len(text) <= 200 else text[:197] + "..."


def _metrics_table(metrics: dict) -> str:
    width = max(map(len, metrics))
    rows = []
    for k, v in metrics.items():
        rows.append(f"  {k:<{width}}  {v:.4f}" if isinstance(v, float) else f"  {k:<{width}}  {v}")
    return "\n".join(rows)


def format_trace(traces, metrics) -> str:
    """Trace file contents: one JSON object per epoch, then the metrics line."""
    lines = [t.to_json() for t in traces]
    lines.append(json.dumps({"metrics": metrics.invariant_dict()}))
    return "\n".join(lines) + "\n"


def write_trace(path, traces, metrics) -> None:
    Path(path).write_text(format_trace(traces, metrics))


def cmd_run(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    try:
        backend = cfg.backend_config()
        program, check = build(cfg)
        result = run_program(
            program,
            backend,
            capacity=cfg.capacity,
            epoch_limit=cfg.epoch_limit,
            record_slots=cfg.trace_slots,
        )
    except FatalRuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FATAL
    except (TreesError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    print(f"result: {_summarize(result.value)}", file=out)
    metrics = result.metrics.to_dict()
    print(json.dumps({"metrics": metrics}), file=out)
    print(_metrics_table(metrics), file=out)
    if cfg.trace_path:
        write_trace(cfg.trace_path, result.traces, result.metrics)
    if cfg.golden_path:
        if not cfg.trace_path:
            print("error: --golden needs --trace", file=sys.stderr)
            return EXIT_CONFIG
        code = cmd_compare_trace(cfg.trace_path, cfg.golden_path, out)
        if code:
            return code
    if cfg.check and check is not None:
        if not check(result.value):
            print("check: MISMATCH against oracle", file=out)
            return EXIT_CHECK
        print("check: ok", file=out)
    return EXIT_OK


class TraceFormatError(ValueError):
    pass


def read_trace(path) -> tuple[list[dict], dict | None]:
    epochs, metrics = [], None
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TraceFormatError(f"{path}:{lineno}: {exc}") from None
        if not isinstance(obj, dict):
            raise TraceFormatError(f"{path}:{lineno}: not a JSON object")
        if "metrics" in obj:
            metrics = obj["metrics"]
        else:
            epochs.append(obj)
    return epochs, metrics


def diff_traces(actual: list[dict], golden: list[dict]) -> str | None:
    """Describe the first divergence, or None when the epoch records agree."""
    for i, (a, g) in enumerate(zip(actual, golden)):
        for key in list(g) + [k for k in a if k not in g]:
            if a.get(key) != g.get(key):
                idx = g.get("epoch_index", i)
                return f"epoch index {idx}: field {key!r}: golden={g.get(key)!r} actual={a.get(key)!r}"
    if len(actual) != len(golden):
        first = min(len(actual), len(golden))
        return (
            f"length mismatch: golden has {len(golden)} epochs, actual has {len(actual)} "
            f"(first unmatched epoch index {first})"
        )
    return None


def cmd_compare_trace(actual_path, golden_path, out=None) -> int:
    out = out or sys.stdout
    try:
        actual, actual_m = read_trace(actual_path)
        golden, golden_m = read_trace(golden_path)
    except (TraceFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    problem = diff_traces(actual, golden)
    if problem is None and actual_m != golden_m:
        keys = sorted((actual_m or {}).keys() | (golden_m or {}).keys())
        bad = [k for k in keys if (actual_m or {}).get(k) != (golden_m or {}).get(k)]
        problem = f"metrics differ in {bad}"
    if problem:
        print(f"traces differ: {problem}", file=out)
        return EXIT_MISMATCH
    print(f"traces identical ({len(golden)} epochs)", file=out)
    return EXIT_OK


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="trees", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a program")
    r.add_argument("--program", required=True, choices=PROGRAMS)
    r.add_argument("--input", dest="input_path")
    r.add_argument("--n", type=int)
    r.add_argument("--src", type=int, default=0)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--backend", choices=("seq", "par"), default="seq")
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("--group-size", type=int, default=256)
    r.add_argument("--capacity", type=int, default=None)
    r.add_argument("--trace", dest="trace_path")
    r.add_argument("--golden", dest="golden_path")
    r.add_argument("--epoch-limit", type=int, default=DEFAULT_EPOCH_LIMIT)
    r.add_argument("--check", action="store_true")
    r.add_argument("--trace-slots", action="store_true", help="add per-slot task identities (seq only)")

    c = sub.add_parser("compare-trace", help="diff a trace against a golden file")
    c.add_argument("actual")
    c.add_argument("golden")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "compare-trace":
        return cmd_compare_trace(args.actual, args.golden)
    capacity = args.capacity
    if capacity is None:
        try:
            capacity = int(os.environ.get("TREES_CAPACITY", DEFAULT_CAPACITY))
        except ValueError:
            print("error: TREES_CAPACITY must be an integer", file=sys.stderr)
            return EXIT_CONFIG
    cfg = RunConfig(
        program=args.program,
        input_path=args.input_path,
        n=args.n,
        src=args.src,
        seed=args.seed,
        backend=args.backend,
        workers=args.workers,
        group_size=args.group_size,
        capacity=capacity,
        trace_path=args.trace_path,
        golden_path=args.golden_path,
        epoch_limit=args.epoch_limit,
        check=args.check,
        trace_slots=args.trace_slots,
    )
    return cmd_run(cfg)


if __name__ == "__main__":
    sys.exit(main())
