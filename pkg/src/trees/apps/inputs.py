"""Readers for the plain-text input formats accepted by the CLI.

graph   header ``V E``, then ``E`` lines ``u v [w]`` (directed edges)
array   one value per line
tree    ``idx left right`` lines, ``-1`` for a missing child
signal  one sample per line, ``re`` or ``re im``
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..core import NULL
from .graphs import GraphCSR
from .traversal import EMPTY_TREE, TreeSpec


def _lines(path) -> list[list[str]]:
    out = []
    for raw in Path(path).read_text().splitlines():
        raw = raw.split("#", 1)[0].strip()
        if raw:
            out.append(raw.split())
    return out


def read_graph(path) -> GraphCSR:
    rows = _lines(path)
    if not rows or len(rows[0]) != 2:
        raise ValueError(f"{path}: expected 'V E' header")
    v, e = (int(t) for t in rows[0])
    body = rows[1:]
    if len(body) != e:
        raise ValueError(f"{path}: header says {e} edges, found {len(body)}")
    edges, weights = [], []
    for row in body:
        if len(row) not in (2, 3):
            raise ValueError(f"{path}: bad edge line {' '.join(row)!r}")
        edges.append((int(row[0]), int(row[1])))
        weights.append(int(row[2]) if len(row) == 3 else 1)
    return GraphCSR.from_edges(v, edges, weights)


def write_graph(path, g: GraphCSR) -> None:
    lines = [f"{g.vertex_count} {g.edge_count}"]
    for v in range(g.vertex_count):
        lines.extend(f"{v} {u} {w}" for u, w in g.neighbours(v))
    Path(path).write_text("\n".join(lines) + "\n")


def read_array(path) -> np.ndarray:
    values = [row[0] for row in _lines(path)]
    if all(_is_int(v) for v in values):
        return np.array([int(v) for v in values], dtype=np.int64)
    return np.array([float(v) for v in values], dtype=np.float64)


def read_signal(path) -> np.ndarray:
    out = []
    for row in _lines(path):
        out.append(complex(float(row[0]), float(row[1]) if len(row) > 1 else 0.0))
    return np.array(out, dtype=np.complex128)


def read_tree(path) -> TreeSpec:
    rows = _lines(path)
    if not rows:
        return EMPTY_TREE
    n = len(rows)
    left, right = [NULL] * n, [NULL] * n
    seen = set()
    for row in rows:
        if len(row) != 3:
            raise ValueError(f"{path}: bad tree line {' '.join(row)!r}")
        i, l, r = (int(t) for t in row)
        if not 0 <= i < n or i in seen:
            raise ValueError(f"{path}: node index {i} invalid or repeated")
        seen.add(i)
        left[i], right[i] = l, r
    children = {c for c in left + right if c != NULL}
    roots = [i for i in range(n) if i not in children]
    if len(roots) != 1:
        raise ValueError(f"{path}: expected exactly one root, found {roots}")
    return TreeSpec(tuple(left), tuple(right), roots[0])


def _is_int(token: str) -> bool:
    try:
        int(token)
    except ValueError:
        return False
    return True
