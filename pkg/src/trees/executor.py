"""Phase 2: running the tasks of one epoch, plus the top-level driver loop.

Two backends share the same task-side semantics:

``sequential``
    Visits the NDRange in ascending slot order on the calling thread.  Each
    fork is one fetch-and-add on ``next_free_core``.

``bulk-parallel``
    Splits the NDRange into work-groups of ``group_size`` slots and hands
    the groups to a thread pool.  Forks inside a group are tallied in a
    group-local buffer and committed with a single fetch-and-add when the
    group finishes, so slot numbers are handed out only at commit time.
    Until then ``fork`` returns an unresolved :class:`ChildHandle`, which
    may be passed as a task argument but not read as an integer.

Neither backend takes a lock on any scheduling structure.  The only shared
mutations during an epoch are the fetch-and-add counter, the two set-to-true
flags, writes to owned or freshly allocated slots, and appends to the map
queue.
"""

from __future__ import annotations

import operator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

from .core import (
    INVALID,
    NDRange,
    RuntimeState,
    epoch_finish,
    epoch_setup,
    halted,
    snapshot_trace,
)
from .errors import (
    CapacityError,
    ConfigError,
    ContractViolation,
    EpochLimitError,
    MapFailure,
    TaskFailure,
    TreesError,
)
from .metrics import Metrics
from .program import DEFAULT_EPOCH_LIMIT, Arena, TaskRegistry

BACKENDS = ("sequential", "bulk-parallel")


@dataclass(frozen=True)
class BackendConfig:
    kind: str = "sequential"
    workers: int = 1
    group_size: int = 256

    def __post_init__(self):
        if self.kind not in BACKENDS:
            raise ConfigError(f"unknown backend {self.kind!r}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.group_size < 1:
            raise ConfigError("group_size must be >= 1")

    @property
    def parallel(self) -> bool:
        return self.kind == "bulk-parallel"


@dataclass(frozen=True)
class MapRequest:
    fn: int
    args: tuple[int, ...]
    range: int


class ChildHandle:
    """Slot index of a forked child, possibly not yet assigned."""

    __slots__ = ("slot",)

    def __init__(self, slot: int | None = None):
        self.slot = slot

    def __index__(self) -> int:
        if self.slot is None:
            raise ContractViolation(
                "child handle read before its work-group committed the fork; "
                "handles may only be passed on as task arguments"
            )
        return self.slot

    __int__ = __index__

    def __repr__(self) -> str:
        return f"ChildHandle({self.slot})"


class _GroupBatch:
    __slots__ = ("forks", "joins")

    def __init__(self):
        # (handle, code, raw args, forking slot)
        self.forks: list[tuple[ChildHandle, int, tuple, int]] = []
        # (slot, code, raw args)
        self.joins: list[tuple[int, int, tuple]] = []


_RUNNING, _JOINED, _EMITTED, _EXPIRED = range(4)


def _words(args: tuple) -> tuple[int, ...]:
    return tuple(map(operator.index, args))


class TaskContext:
    """Handle through which a running task reaches the runtime.

    Valid only while its task body is executing.  ``join`` and ``emit`` are
    terminal: after either one, every further primitive call is rejected.
    """

    __slots__ = (
        "slot",
        "cen",
        "epoch_index",
        "arena",
        "_state",
        "_registry",
        "_batch",
        "_status",
        "forks",
    )

    def __init__(self, slot, cen, epoch_index, arena, state, registry, batch):
        self.slot = slot
        self.cen = cen
        self.epoch_index = epoch_index
        self.arena = arena
        self._state = state
        self._registry = registry
        self._batch = batch
        self._status = _RUNNING
        self.forks = 0

    def _check(self, op: str) -> None:
        if self._status == _RUNNING:
            return
        if self._status == _EXPIRED:
            raise ContractViolation(f"{op} on a context whose task has finished")
        done = "join" if self._status == _JOINED else "emit"
        raise ContractViolation(f"{op} after {done} in slot {self.slot}")

    def _pack(self, args: tuple) -> tuple:
        if len(args) > self._state.arity:
            raise ContractViolation(
                f"{len(args)} argument words exceed arity {self._state.arity}"
            )
        return args

    def fork(self, task: str | int, *args) -> ChildHandle:
        self._check("fork")
        state = self._state
        n = state.num_task_types
        code = (self.cen + 1) * n + self._registry.task_id(task)
        self._pack(args)
        self.forks += 1
        if self._batch is not None:
            handle = ChildHandle()
            self._batch.forks.append((handle, code, args, self.slot))
            return handle
        words = _words(args)
        s = state.next_free.fetch_add(1, limit=state.capacity)
        if s < 0:
            raise CapacityError(self.slot, state.capacity)
        state.codes[s] = code
        state.args[s] = words
        return ChildHandle(s)

    def join(self, task: str | int, *args) -> None:
        self._check("join")
        state = self._state
        code = self.cen * state.num_task_types + self._registry.task_id(task)
        self._pack(args)
        if self._batch is not None:
            self._batch.joins.append((self.slot, code, args))
        else:
            state.codes[self.slot] = code
            state.args[self.slot] = _words(args)
        state.join_scheduled = True
        self._status = _JOINED

    def emit(self, value) -> None:
        self._check("emit")
        self._state.results[self.slot] = operator.index(value)
        self._status = _EMITTED

    def map(self, fn: str | int, *args, range: int) -> None:
        self._check("map")
        if range < 1:
            raise ContractViolation(f"map range must be >= 1, got {range}")
        fid = self._registry.map_id(fn)
        self._state.map_queue.append(MapRequest(fid, _words(self._pack(args)), range))
        self._state.map_scheduled = True

    def result(self, child) -> int:
        """Word emitted by the child task in slot ``child``."""
        return self._state.results[operator.index(child)]


@dataclass
class LaunchResult:
    launched: int
    valid_executed: int
    alloc_atomics: int = 0
    fork_groups: int = 0
    work_groups: int = 0
    executed: list = field(default_factory=list)


def _groups(ndrange: NDRange, size: int) -> list[tuple[int, int]]:
    return [(lo, min(lo + size, ndrange.hi + 1)) for lo in range(ndrange.lo, ndrange.hi + 1, size)]


def _run_slots(state, registry, arena, cen, epoch_index, lo, hi, batch, executed):
    """Run every runnable slot in ``[lo, hi)``.  Returns (valid, forking tasks)."""
    n = state.num_task_types
    base = cen * n
    top = base + n
    codes = state.codes
    fns = registry.task_fns
    names = registry.task_names
    valid = 0
    forking = 0
    for s in range(lo, hi):
        c = codes[s]
        if not base < c <= top:
            continue
        valid += 1
        tid = c - base
        args = state.args[s]
        if executed is not None:
            executed.append((s, names[tid - 1], args))
        ctx = TaskContext(s, cen, epoch_index, arena, state, registry, batch)
        try:
            fns[tid - 1](ctx, *args)
        except TreesError:
            raise
        except Exception as exc:
            raise TaskFailure(s, names[tid - 1], exc) from exc
        if ctx._status != _JOINED:
            codes[s] = INVALID
        ctx._status = _EXPIRED
        if ctx.forks:
            forking += 1
    return valid, forking


def _commit(state: RuntimeState, batch: _GroupBatch) -> int:
    """Publish a work-group's forks and joins.  Returns atomic ops used."""
    atomics = 0
    k = len(batch.forks)
    if k:
        base = state.next_free.fetch_add(k, limit=state.capacity)
        if base < 0:
            first_over = max(0, state.capacity - state.next_free.load())
            slot = batch.forks[min(first_over, k - 1)][3]
            raise CapacityError(slot, state.capacity, k)
        atomics = 1
        for i, (handle, _, _, _) in enumerate(batch.forks):
            handle.slot = base + i
        codes, argv = state.codes, state.args
        for handle, code, args, _ in batch.forks:
            codes[handle.slot] = code
            argv[handle.slot] = _words(args)
    for slot, code, args in batch.joins:
        state.codes[slot] = code
        state.args[slot] = _words(args)
    return atomics


def launch_epoch(
    state: RuntimeState,
    registry: TaskRegistry,
    arena: Arena,
    cen: int,
    ndrange: NDRange,
    backend: BackendConfig,
    *,
    epoch_index: int = 0,
    pool: ThreadPoolExecutor | None = None,
    record: bool = False,
) -> LaunchResult:
    groups = _groups(ndrange, backend.group_size)
    executed = [] if record else None

    if not backend.parallel:
        before = state.next_free.ops
        forked_groups = 0
        valid = 0
        for lo, hi in groups:
            v, forking = _run_slots(state, registry, arena, cen, epoch_index, lo, hi, None, executed)
            valid += v
            forked_groups += forking > 0
        return LaunchResult(
            ndrange.size,
            valid,
            alloc_atomics=state.next_free.ops - before,
            fork_groups=forked_groups,
            work_groups=len(groups),
            executed=executed or [],
        )

    def run_group(bounds):
        batch = _GroupBatch()
        v, forking = _run_slots(
            state, registry, arena, cen, epoch_index, bounds[0], bounds[1], batch, executed
        )
        return v, forking > 0, _commit(state, batch)

    own_pool = pool is None
    if own_pool:
        pool = ThreadPoolExecutor(max_workers=backend.workers)
    try:
        outcomes = list(pool.map(run_group, groups))
    finally:
        if own_pool:
            pool.shutdown()
    return LaunchResult(
        ndrange.size,
        sum(o[0] for o in outcomes),
        alloc_atomics=sum(o[2] for o in outcomes),
        fork_groups=sum(o[1] for o in outcomes),
        work_groups=len(groups),
        executed=executed or [],
    )


def drain_maps(
    state: RuntimeState,
    registry: TaskRegistry,
    arena: Arena,
    backend: BackendConfig,
    *,
    pool: ThreadPoolExecutor | None = None,
) -> int:
    """Run every queued map request over its full range and empty the queue."""
    queue, state.map_queue = state.map_queue, []
    if not queue:
        return 0

    def run_chunk(chunk):
        req, lo, hi = chunk
        fn = registry.map_fns[req.fn - 1]
        for i in range(lo, hi):
            try:
                fn(arena, req.args, i)
            except TreesError:
                raise
            except Exception as exc:
                raise MapFailure(registry.map_names[req.fn - 1], i, exc) from exc
        return hi - lo

    if not backend.parallel:
        return sum(run_chunk((req, 0, req.range)) for req in queue)

    size = backend.group_size
    chunks = [(req, lo, min(lo + size, req.range)) for req in queue for lo in range(0, req.range, size)]
    own_pool = pool is None
    if own_pool:
        pool = ThreadPoolExecutor(max_workers=backend.workers)
    try:
        return sum(pool.map(run_chunk, chunks))
    finally:
        if own_pool:
            pool.shutdown()


def run_to_completion(
    state: RuntimeState,
    registry: TaskRegistry,
    arena: Arena,
    backend: BackendConfig | None = None,
    *,
    trace_sink: Callable | None = None,
    epoch_limit: int = DEFAULT_EPOCH_LIMIT,
    record_slots: bool = False,
) -> Metrics:
    backend = backend or BackendConfig()
    if record_slots and backend.parallel:
        raise ConfigError("per-slot tracing is only supported on the sequential backend")
    metrics = Metrics(peak_next_free_core=state.next_free_core)
    pool = ThreadPoolExecutor(max_workers=backend.workers) if backend.parallel else None
    epoch_index = 0
    try:
        while not halted(state):
            if epoch_index >= epoch_limit:
                raise EpochLimitError(epoch_limit)
            cen, ndrange = epoch_setup(state)
            launch = launch_epoch(
                state,
                registry,
                arena,
                cen,
                ndrange,
                backend,
                epoch_index=epoch_index,
                pool=pool,
                record=record_slots,
            )
            epoch_finish(state)
            if state.map_scheduled:
                metrics.record_map_drain(drain_maps(state, registry, arena, backend, pool=pool))
            trace = snapshot_trace(state, epoch_index, launch.launched, launch.valid_executed)
            if record_slots:
                trace.slots = launch.executed
            metrics.record_epoch(trace)
            metrics.record_launch(launch.alloc_atomics, launch.fork_groups, launch.work_groups)
            if trace_sink is not None:
                trace_sink(trace)
            epoch_index += 1
    finally:
        if pool is not None:
            pool.shutdown()
    return metrics
