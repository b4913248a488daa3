"""Recursive radix-2 decimation-in-time FFT.

A task owns the sub-transform of ``n`` inputs read at ``x[offset + k*stride]``
and written to ``out[out_offset : out_offset + n]``.  It forks the even and
odd halves, then joins a butterfly pass over its output block.
"""

from __future__ import annotations

import numpy as np

from ..program import Program, register_program, run_program


def _fft(ctx, offset, stride, n, out_offset):
    if n == 1:
        ctx.arena["out"][out_offset] = ctx.arena["x"][offset]
        return
    half = n // 2
    ctx.fork("fft", offset, 2 * stride, half, out_offset)
    ctx.fork("fft", offset + stride, 2 * stride, half, out_offset + half)
    ctx.join("butterfly", out_offset, n)


def _butterfly(ctx, out_offset, n):
    out = ctx.arena["out"]
    half = n // 2
    twiddle = np.exp(-2j * np.pi * np.arange(half) / n)
    even = out[out_offset : out_offset + half].copy()
    odd = twiddle * out[out_offset + half : out_offset + n]
    out[out_offset : out_offset + half] = even + odd
    out[out_offset + half : out_offset + n] = even - odd


def fft_program(x) -> Program:
    x = np.asarray(x, dtype=np.complex128)
    n = len(x)
    if x.ndim != 1 or n == 0 or n & (n - 1):
        raise ValueError(f"FFT length must be a power of two, got {n}")
    return register_program(
        "fft",
        tasks=[("fft", _fft), ("butterfly", _butterfly)],
        root=("fft", [0, 1, n, 0]),
        buffers={"x": x, "out": np.zeros(n, dtype=np.complex128)},
        extract=lambda arena, state: arena["out"].copy(),
    )


def app_fft(x, backend=None, **kw) -> np.ndarray:
    return run_program(fft_program(x), backend, **kw).value


def dft_reference(x) -> np.ndarray:
    """Direct O(n^2) transform."""
    x = np.asarray(x, dtype=np.complex128)
    n = len(x)
    k = np.arange(n)
    return np.exp(-2j * np.pi * (np.outer(k, k) % n) / n) @ x
