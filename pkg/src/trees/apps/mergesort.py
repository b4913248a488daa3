"""Mergesort in two flavours: merges done serially inside the join task,
or issued as a data-parallel map with one work-item per element.

The input is padded to a power of two with the dtype's maximum.  Runs of
size ``2**k`` live in buffer ``k % 2``, so every merge level reads one buffer
and writes the other.
"""

from __future__ import annotations

import heapq

import numpy as np

from ..program import Program, register_program, run_program


def _sort(ctx, lo, size):
    if size <= 1:
        return
    half = size // 2
    ctx.fork("sort", lo + half, half)
    ctx.fork("sort", lo, half)
    ctx.join("merge", lo, size)


def _buffers(arena, size):
    k = size.bit_length() - 1
    return arena[f"buf{(k - 1) % 2}"], arena[f"buf{k % 2}"]


def _merge_serial(ctx, lo, size):
    src, dst = _buffers(ctx.arena, size)
    half = size // 2
    left = src[lo : lo + half].tolist()
    right = src[lo + half : lo + size].tolist()
    dst[lo : lo + size] = list(heapq.merge(left, right))


def _merge_mapped(ctx, lo, size):
    ctx.map("merge_item", lo, size, range=size)


def _merge_item(arena, args, i):
    """Place one element at its final position: own index plus its rank in
    the sibling run.  Ties go left-run first, which keeps the merge stable."""
    lo, size = args
    src, dst = _buffers(arena, size)
    half = size // 2
    if i < half:
        x = src[lo + i]
        rank = np.searchsorted(src[lo + half : lo + size], x, side="left")
        dst[lo + i + rank] = x
    else:
        j = i - half
        x = src[lo + half + j]
        rank = np.searchsorted(src[lo : lo + half], x, side="right")
        dst[lo + j + rank] = x


def _pad(a) -> tuple[np.ndarray, int]:
    a = np.asarray(a)
    if a.ndim != 1:
        raise ValueError("mergesort input must be one-dimensional")
    if a.dtype.kind in "iub":
        a = a.astype(np.int64)
        sentinel = np.iinfo(np.int64).max
    elif a.dtype.kind == "f" or a.size == 0:
        a = a.astype(np.float64)
        sentinel = np.inf
    else:
        raise ValueError(f"cannot sort dtype {a.dtype}")
    n = len(a)
    padded = 1 << max(0, (n - 1).bit_length())
    out = np.full(padded, sentinel, dtype=a.dtype)
    out[:n] = a
    return out, n


def mergesort_program(a, use_map: bool = False) -> Program:
    padded, n = _pad(a)
    size = len(padded) if n else 0
    levels = size.bit_length() - 1 if size else 0

    def extract(arena, state):
        return arena[f"buf{levels % 2}"][:n].copy()

    tasks = [("sort", _sort), ("merge", _merge_mapped if use_map else _merge_serial)]
    return register_program(
        "mergesort-map" if use_map else "mergesort",
        tasks=tasks,
        maps=[("merge_item", _merge_item)] if use_map else [],
        root=("sort", [0, size]),
        buffers={"buf0": padded, "buf1": np.empty_like(padded)},
        extract=extract,
    )


def app_mergesort(a, use_map: bool = False, backend=None, **kw) -> np.ndarray:
    return run_program(mergesort_program(a, use_map), backend, **kw).value
