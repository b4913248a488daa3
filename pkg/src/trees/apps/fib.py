"""Naive recursive Fibonacci: almost no work per task, all runtime overhead."""

from __future__ import annotations

from ..program import Program, register_program, run_program

MAX_N = 40


def _fib(ctx, n):
    if n < 2:
        ctx.emit(n)
        return
    a = ctx.fork("fib", n - 1)
    b = ctx.fork("fib", n - 2)
    ctx.join("sum", n, a, b)


def _sum(ctx, n, a, b):
    ctx.emit(ctx.result(a) + ctx.result(b))


def fib_program(n: int) -> Program:
    if not 0 <= n <= MAX_N:
        raise ValueError(f"fib needs 0 <= n <= {MAX_N}, got {n}")
    return register_program(
        "fib",
        tasks=[("fib", _fib), ("sum", _sum)],
        root=("fib", [n]),
        label=lambda name, args: (name, args[0]),
    )


def app_fib(n: int, backend=None, **kw) -> int:
    return run_program(fib_program(n), backend, **kw).value


def fib_reference(n: int) -> int:
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a
