"""Application-facing surface: task registration, the shared arena, and programs."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .core import DEFAULT_ARITY, RuntimeState, init_state
from .errors import ConfigError

TaskFn = Callable[..., None]
MapFn = Callable[["Arena", tuple, int], None]

DEFAULT_CAPACITY = 1 << 20
DEFAULT_EPOCH_LIMIT = 10**6


@dataclass(frozen=True)
class TaskRegistry:
    """Task and map functions, numbered from 1 in declaration order."""

    task_names: tuple[str, ...]
    task_fns: tuple[TaskFn, ...]
    map_names: tuple[str, ...] = ()
    map_fns: tuple[MapFn, ...] = ()
    _task_ids: dict[str, int] = field(default_factory=dict, repr=False, compare=False)
    _map_ids: dict[str, int] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not self.task_fns:
            raise ConfigError("a program needs at least one task function")
        for kind, names in (("task", self.task_names), ("map", self.map_names)):
            if len(set(names)) != len(names):
                raise ConfigError(f"duplicate {kind} function names: {names}")
        self._task_ids.update({n: i + 1 for i, n in enumerate(self.task_names)})
        self._map_ids.update({n: i + 1 for i, n in enumerate(self.map_names)})

    @property
    def num_task_types(self) -> int:
        return len(self.task_fns)

    def task_id(self, task: str | int) -> int:
        if isinstance(task, str):
            try:
                return self._task_ids[task]
            except KeyError:
                raise ConfigError(f"unknown task {task!r}") from None
        if not 1 <= task <= len(self.task_fns):
            raise ConfigError(f"task id {task} not registered")
        return task

    def map_id(self, fn: str | int) -> int:
        if isinstance(fn, str):
            try:
                return self._map_ids[fn]
            except KeyError:
                raise ConfigError(f"unknown map function {fn!r}") from None
        if not 1 <= fn <= len(self.map_fns):
            raise ConfigError(f"map id {fn} not registered")
        return fn


class Arena:
    """Named fixed-length buffers shared by every task, like device global memory.

    Buffer contents are mutable; the buffer set and lengths are not.  The
    ``atomic_*`` methods are the only cross-task read-modify-write operations
    tasks may rely on inside an epoch.
    """

    def __init__(self, buffers: Mapping[str, Any]):
        self._buffers = {name: np.array(buf, copy=True) for name, buf in buffers.items()}
        for name, buf in self._buffers.items():
            if buf.ndim != 1:
                raise ConfigError(f"arena buffer {name!r} must be one-dimensional")
        self._cell = threading.Lock()

    def __getitem__(self, name: str) -> np.ndarray:
        return self._buffers[name]

    def __contains__(self, name: str) -> bool:
        return name in self._buffers

    def names(self) -> list[str]:
        return list(self._buffers)

    def atomic_add(self, name: str, index: int, value) -> Any:
        buf = self._buffers[name]
        with self._cell:
            old = buf[index]
            buf[index] = old + value
        return old.item()

    def atomic_min(self, name: str, index: int, value) -> Any:
        buf = self._buffers[name]
        with self._cell:
            old = buf[index]
            if value < old:
                buf[index] = value
        return old.item()

    def atomic_exchange(self, name: str, index: int, value) -> Any:
        buf = self._buffers[name]
        with self._cell:
            old = buf[index]
            buf[index] = value
        return old.item()


@dataclass(frozen=True)
class Program:
    name: str
    registry: TaskRegistry
    buffers: Mapping[str, np.ndarray]
    root: tuple[int, tuple[int, ...]]
    extract: Callable[[Arena, RuntimeState], Any]
    # maps (task type id, args) to a slot-independent identity; used when
    # comparing executions across engines that place tasks differently
    label: Callable[[str, tuple[int, ...]], Any] | None = None


def register_program(
    name: str,
    tasks: Sequence[tuple[str, TaskFn]],
    root: tuple[str, Sequence[int]],
    buffers: Mapping[str, Any] | None = None,
    maps: Sequence[tuple[str, MapFn]] = (),
    extract: Callable[[Arena, RuntimeState], Any] | None = None,
    label: Callable[[str, tuple[int, ...]], Any] | None = None,
) -> Program:
    registry = TaskRegistry(
        task_names=tuple(n for n, _ in tasks),
        task_fns=tuple(f for _, f in tasks),
        map_names=tuple(n for n, _ in maps),
        map_fns=tuple(f for _, f in maps),
    )
    root_name, root_args = root
    root_id = registry.task_id(root_name)
    frozen = {k: np.array(v, copy=True) for k, v in (buffers or {}).items()}
    for buf in frozen.values():
        buf.setflags(write=False)
    return Program(
        name=name,
        registry=registry,
        buffers=frozen,
        root=(root_id, tuple(int(a) for a in root_args)),
        extract=extract or (lambda arena, state: state.results[0]),
        label=label,
    )


@dataclass
class ProgramResult:
    value: Any
    metrics: Any
    traces: list
    state: RuntimeState
    arena: Arena


def run_program(
    program: Program,
    backend=None,
    *,
    capacity: int = DEFAULT_CAPACITY,
    epoch_limit: int = DEFAULT_EPOCH_LIMIT,
    arity: int = DEFAULT_ARITY,
    record_slots: bool = False,
) -> ProgramResult:
    """Run ``program`` on a fresh state and arena and extract its result."""
    from .executor import BackendConfig, run_to_completion

    backend = backend or BackendConfig()
    arena = Arena(program.buffers)
    root_id, root_args = program.root
    state = init_state(capacity, program.registry.num_task_types, root_id, root_args, arity)
    traces: list = []
    metrics = run_to_completion(
        state,
        program.registry,
        arena,
        backend,
        trace_sink=traces.append,
        epoch_limit=epoch_limit,
        record_slots=record_slots,
    )
    return ProgramResult(
        value=program.extract(arena, state),
        metrics=metrics,
        traces=traces,
        state=state,
        arena=arena,
    )
