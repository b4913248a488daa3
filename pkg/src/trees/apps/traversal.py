"""Pre- and post-order tree traversal, one task per node."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import NULL
from ..program import Program, register_program, run_program


@dataclass(frozen=True)
class TreeSpec:
    left: tuple[int, ...]
    right: tuple[int, ...]
    root: int = 0

    def __post_init__(self):
        n = len(self.left)
        if len(self.right) != n:
            raise ValueError("left and right child arrays differ in length")
        if n == 0:
            if self.root != NULL:
                raise ValueError("empty tree must have a NULL root")
            return
        if not 0 <= self.root < n:
            raise ValueError(f"root {self.root} out of range")
        seen = [False] * n
        stack = [self.root]
        while stack:
            v = stack.pop()
            if seen[v]:
                raise ValueError(f"node {v} reached twice; not a tree")
            seen[v] = True
            for c in (self.left[v], self.right[v]):
                if c == NULL:
                    continue
                if not 0 <= c < n:
                    raise ValueError(f"child index {c} of node {v} out of range")
                stack.append(c)

    @property
    def size(self) -> int:
        return len(self.left)

    def reachable(self) -> list[int]:
        if self.root == NULL:
            return []
        out, stack = [], [self.root]
        while stack:
            v = stack.pop()
            out.append(v)
            stack.extend(c for c in (self.left[v], self.right[v]) if c != NULL)
        return out


# A(B, C), B(D, E), C(F, NULL) with A..F numbered 0..5
SAMPLE_TREE = TreeSpec(left=(1, 3, 5, NULL, NULL, NULL), right=(2, 4, NULL, NULL, NULL, NULL), root=0)
SAMPLE_NAMES = "ABCDEF"

EMPTY_TREE = TreeSpec(left=(), right=(), root=NULL)


def _visit(ctx, node):
    seq = ctx.arena.atomic_add("counter", 0, 1)
    ctx.arena["visit_seq"][node] = seq
    ctx.arena["order"][seq] = node


def _preorder(ctx, node):
    if node == NULL:
        return
    _visit(ctx, node)
    ctx.fork("preorder", int(ctx.arena["right"][node]))
    ctx.fork("preorder", int(ctx.arena["left"][node]))


def _postorder(ctx, node):
    if node == NULL:
        return
    ctx.fork("postorder", int(ctx.arena["right"][node]))
    ctx.fork("postorder", int(ctx.arena["left"][node]))
    ctx.join("visitAfter", node)


def _visit_after(ctx, node):
    _visit(ctx, node)


def traversal_program(tree: TreeSpec, order: str = "post") -> Program:
    if order not in ("pre", "post"):
        raise ValueError(f"order must be 'pre' or 'post', got {order!r}")
    n = tree.size
    buffers = {
        "left": np.array(tree.left, dtype=np.int64),
        "right": np.array(tree.right, dtype=np.int64),
        "visit_seq": np.full(n, -1, dtype=np.int64),
        "order": np.full(n, -1, dtype=np.int64),
        "counter": np.zeros(1, dtype=np.int64),
    }

    def extract(arena, state):
        return arena["order"][: int(arena["counter"][0])].tolist()

    return register_program(
        f"{order}order",
        tasks=[("preorder", _preorder), ("postorder", _postorder), ("visitAfter", _visit_after)],
        root=("preorder" if order == "pre" else "postorder", [tree.root]),
        buffers=buffers,
        extract=extract,
    )


def app_traversal(tree: TreeSpec, order: str = "post", backend=None, **kw) -> list[int]:
    return run_program(traversal_program(tree, order), backend, **kw).value


def check_visit_order(tree: TreeSpec, visits: list[int], order: str) -> bool:
    """True iff every node was visited once and parents respect ``order``.

    Sibling order is not fixed by the runtime, so only the parent/child
    partial order is checked: post-order parents come after both children,
    pre-order parents before.
    """
    if sorted(visits) != sorted(tree.reachable()):
        return False
    pos = {v: i for i, v in enumerate(visits)}
    for v in visits:
        for c in (tree.left[v], tree.right[v]):
            if c == NULL:
                continue
            if order == "post" and not pos[c] < pos[v]:
                return False
            if order == "pre" and not pos[v] < pos[c]:
                return False
    return True


def recursive_order(tree: TreeSpec, order: str = "post") -> list[int]:
    out: list[int] = []

    def walk(v):
        if v == NULL:
            return
        if order == "pre":
            out.append(v)
        walk(tree.left[v])
        walk(tree.right[v])
        if order == "post":
            out.append(v)

    walk(tree.root)
    return out


def random_tree(rng, n: int) -> TreeSpec:
    """Random binary tree on ``n`` nodes, built by random insertion."""
    if n == 0:
        return EMPTY_TREE
    left = [NULL] * n
    right = [NULL] * n
    for v in range(1, n):
        cur = 0
        while True:
            side = left if rng.random() < 0.5 else right
            if side[cur] == NULL:
                side[cur] = v
                break
            cur = side[cur]
    return TreeSpec(tuple(left), tuple(right), 0)
