"""Level-synchronous BFS and SSSP where the task vector is the worklist.

Each task relaxes the out-edges of one vertex and forks a task for every
neighbour it improved.  A vertex is forked at most once per epoch: the
forking right is claimed with an atomic exchange on a per-vertex epoch
stamp, so the number of tasks does not depend on intra-epoch order.

SSSP reads distances from one of two buffers and writes improvements into
the other, swapping by epoch parity.  Tasks therefore never observe a
distance lowered during their own epoch, which keeps the work count
identical across backends.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass

import numpy as np

from ..program import Program, register_program, run_program

INF = np.iinfo(np.int64).max


@dataclass(frozen=True)
class GraphCSR:
    row_offsets: np.ndarray
    col_indices: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        off = self.row_offsets
        if len(off) < 1 or off[0] != 0 or np.any(np.diff(off) < 0):
            raise ValueError("row offsets must start at 0 and be non-decreasing")
        if off[-1] != len(self.col_indices) or len(self.weights) != len(self.col_indices):
            raise ValueError("row offsets do not match edge arrays")
        if len(self.col_indices) and (
            self.col_indices.min() < 0 or self.col_indices.max() >= self.vertex_count
        ):
            raise ValueError("edge endpoint out of range")
        if np.any(self.weights < 0):
            raise ValueError("negative edge weight")

    @property
    def vertex_count(self) -> int:
        return len(self.row_offsets) - 1

    @property
    def edge_count(self) -> int:
        return len(self.col_indices)

    @classmethod
    def from_edges(cls, vertex_count, edges, weights=None) -> "GraphCSR":
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if weights is None:
            weights = np.ones(len(edges), dtype=np.int64)
        weights = np.asarray(weights, dtype=np.int64)
        if len(edges) and (edges.min() < 0 or edges.max() >= vertex_count):
            raise ValueError("edge endpoint out of range")
        order = np.argsort(edges[:, 0], kind="stable")
        src, dst, w = edges[order, 0], edges[order, 1], weights[order]
        offsets = np.zeros(vertex_count + 1, dtype=np.int64)
        np.add.at(offsets, src + 1, 1)
        return cls(np.cumsum(offsets), dst.copy(), w.copy())

    def neighbours(self, v: int):
        lo, hi = self.row_offsets[v], self.row_offsets[v + 1]
        return zip(self.col_indices[lo:hi].tolist(), self.weights[lo:hi].tolist())


def _graph_buffers(g: GraphCSR) -> dict:
    return {"offsets": g.row_offsets, "cols": g.col_indices, "weights": g.weights}


def _edges(arena, v):
    off = arena["offsets"]
    lo, hi = off[v], off[v + 1]
    return arena["cols"][lo:hi].tolist(), arena["weights"][lo:hi].tolist()


def _bfs_visit(ctx, v):
    arena = ctx.arena
    nd = int(arena["dist"][v]) + 1
    cols, _ = _edges(arena, v)
    for u in cols:
        if arena.atomic_min("dist", u, nd) > nd:
            ctx.fork("visit", u)


def bfs_program(g: GraphCSR, src: int) -> Program:
    if not 0 <= src < g.vertex_count:
        raise ValueError(f"source {src} out of range")
    dist = np.full(g.vertex_count, INF, dtype=np.int64)
    dist[src] = 0
    return register_program(
        "bfs",
        tasks=[("visit", _bfs_visit)],
        root=("visit", [src]),
        buffers={**_graph_buffers(g), "dist": dist},
        extract=lambda arena, state: arena["dist"].copy(),
    )


def _sssp_visit(ctx, v):
    arena = ctx.arena
    parity = ctx.cen & 1
    read = arena[f"dist{parity}"]
    write = f"dist{1 - parity}"
    d = int(read[v])
    cols, weights = _edges(arena, v)
    for u, w in zip(cols, weights):
        nd = d + w
        if nd < read[u] and arena.atomic_min(write, u, nd) > nd:
            if arena.atomic_exchange("claim", u, ctx.cen) != ctx.cen:
                ctx.fork("visit", u)


def sssp_program(g: GraphCSR, src: int) -> Program:
    if not 0 <= src < g.vertex_count:
        raise ValueError(f"source {src} out of range")
    d0 = np.full(g.vertex_count, INF, dtype=np.int64)
    d0[src] = 0
    return register_program(
        "sssp",
        tasks=[("visit", _sssp_visit)],
        root=("visit", [src]),
        buffers={
            **_graph_buffers(g),
            "dist0": d0,
            "dist1": np.full(g.vertex_count, INF, dtype=np.int64),
            "claim": np.full(g.vertex_count, -1, dtype=np.int64),
        },
        extract=lambda arena, state: np.minimum(arena["dist0"], arena["dist1"]),
    )


def app_bfs(g: GraphCSR, src: int, backend=None, **kw) -> np.ndarray:
    return run_program(bfs_program(g, src), backend, **kw).value


def app_sssp(g: GraphCSR, src: int, backend=None, **kw) -> np.ndarray:
    return run_program(sssp_program(g, src), backend, **kw).value


def bfs_reference(g: GraphCSR, src: int) -> np.ndarray:
    dist = np.full(g.vertex_count, INF, dtype=np.int64)
    dist[src] = 0
    q = deque([src])
    while q:
        v = q.popleft()
        for u, _ in g.neighbours(v):
            if dist[u] == INF:
                dist[u] = dist[v] + 1
                q.append(u)
    return dist


def dijkstra_reference(g: GraphCSR, src: int) -> np.ndarray:
    dist = np.full(g.vertex_count, INF, dtype=np.int64)
    dist[src] = 0
    heap = [(0, src)]
    while heap:
        d, v = heapq.heappop(heap)
        if d > dist[v]:
            continue
        for u, w in g.neighbours(v):
            if d + w < dist[u]:
                dist[u] = d + w
                heapq.heappush(heap, (d + w, u))
    return dist


def random_graph(rng, vertices: int, edges: int, max_weight: int = 100) -> GraphCSR:
    e = rng.integers(0, vertices, size=(edges, 2))
    w = rng.integers(0, max_weight + 1, size=edges)
    return GraphCSR.from_edges(vertices, e, w)


def path_graph(n: int) -> GraphCSR:
    return GraphCSR.from_edges(n, [(i, i + 1) for i in range(n - 1)])
