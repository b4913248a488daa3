"""Applications written against the runtime, each with an independent oracle."""

from .fft import app_fft, dft_reference, fft_program
from .fib import app_fib, fib_program, fib_reference
from .graphs import (
    GraphCSR,
    app_bfs,
    app_sssp,
    bfs_program,
    bfs_reference,
    dijkstra_reference,
    path_graph,
    random_graph,
    sssp_program,
)
from .mergesort import app_mergesort, mergesort_program
from .traversal import (
    EMPTY_TREE,
    SAMPLE_NAMES,
    SAMPLE_TREE,
    TreeSpec,
    app_traversal,
    check_visit_order,
    random_tree,
    recursive_order,
    traversal_program,
)

__all__ = [
    "EMPTY_TREE",
    "SAMPLE_NAMES",
    "SAMPLE_TREE",
    "GraphCSR",
    "TreeSpec",
    "app_bfs",
    "app_fft",
    "app_fib",
    "app_mergesort",
    "app_sssp",
    "app_traversal",
    "bfs_program",
    "bfs_reference",
    "check_visit_order",
    "dft_reference",
    "dijkstra_reference",
    "fft_program",
    "fib_program",
    "fib_reference",
    "mergesort_program",
    "path_graph",
    "random_graph",
    "random_tree",
    "recursive_order",
    "sssp_program",
    "traversal_program",
]
