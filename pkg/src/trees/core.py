"""Task Vector machine state and the host half of the epoch protocol.

The task vector (TV) is stored column-wise: one list of packed task codes,
one list of argument tuples and one list of emitted result words, all of a
fixed capacity.  A task code packs the epoch number in which the slot runs
together with its task type::

    code = epoch * num_task_types + task_type      (task_type >= 1)

so code 0 never names a task and marks the slot INVALID.  The task mask
stack of the abstract machine is replaced by two host-side stacks kept in
lockstep: epoch numbers (the join stack) and the contiguous slot ranges that
hold those epochs' tasks (the NDRange stack).
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from typing import Any

from .errors import ConfigError, ContractViolation, InvariantError, ProtocolError

INVALID = 0
DEFAULT_ARITY = 4
# NULL references in argument words: the all-ones 64-bit pattern read as signed.
NULL = -1


def encode_task(epoch: int, task_type: int, num_task_types: int) -> int:
    if not 1 <= task_type <= num_task_types:
        raise ContractViolation(
            f"task type {task_type} outside [1, {num_task_types}]"
        )
    if epoch < 0:
        raise ContractViolation(f"negative epoch {epoch}")
    return epoch * num_task_types + task_type


def decode_task(code: int, num_task_types: int) -> tuple[int, int]:
    """Inverse of :func:`encode_task`; returns ``(epoch, task_type)``."""
    if code <= INVALID:
        raise ValueError("INVALID slot has no epoch or task type")
    epoch, rem = divmod(code - 1, num_task_types)
    return epoch, rem + 1


def is_runnable(code: int, cen: int, num_task_types: int) -> bool:
    return cen * num_task_types < code <= (cen + 1) * num_task_types


@dataclass(frozen=True)
class NDRange:
    """Inclusive slot range ``[lo, hi]`` launched as one epoch."""

    lo: int
    hi: int

    def __post_init__(self):
        if not 0 <= self.lo <= self.hi:
            raise InvariantError(f"malformed NDRange ({self.lo}, {self.hi})")

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1

    def as_list(self) -> list[int]:
        return [self.lo, self.hi]


@dataclass(frozen=True)
class TaskEntry:
    code: int
    args: tuple[int, ...]
    result: int


class AtomicCounter:
    """Integer cell mutated only by fetch-and-add, standing in for a device atomic.

    CPython has no user-level atomic RMW instruction, so the read-modify-write
    is made indivisible with a private mutex.  ``ops`` counts atomic operations,
    which is the quantity the batching bound is stated in.
    """

    __slots__ = ("_value", "_cell", "ops")

    def __init__(self, value: int = 0):
        self._value = value
        self._cell = threading.Lock()
        self.ops = 0

    def load(self) -> int:
        return self._value

    def store(self, value: int) -> None:
        # host-side only, between epochs
        self._value = value

    def fetch_add(self, n: int, limit: int | None = None) -> int:
        """Add ``n`` and return the previous value.

        With ``limit`` set, the add is refused (returns -1, value unchanged)
        when it would push the counter past ``limit``.
        """
        with self._cell:
            old = self._value
            if limit is not None and old + n > limit:
                return -1
            self._value = old + n
            self.ops += 1
            return old


@dataclass(eq=False)
class RuntimeState:
    capacity: int
    num_task_types: int
    arity: int = DEFAULT_ARITY
    codes: list[int] = field(default_factory=list)
    args: list[tuple[int, ...]] = field(default_factory=list)
    results: list[int] = field(default_factory=list)
    join_stack: list[int] = field(default_factory=list)
    ndrange_stack: list[NDRange] = field(default_factory=list)
    cen: int = 0
    ndrange: NDRange | None = None
    next_free: AtomicCounter = field(default_factory=AtomicCounter)
    old_next_free_core: int = 0
    join_scheduled: bool = False
    map_scheduled: bool = False
    map_queue: list[Any] = field(default_factory=list)

    @property
    def next_free_core(self) -> int:
        return self.next_free.load()

    def entry(self, slot: int) -> TaskEntry:
        return TaskEntry(self.codes[slot], self.args[slot], self.results[slot])

    def live_slots(self) -> list[int]:
        return [i for i, c in enumerate(self.codes) if c != INVALID]


def init_state(
    capacity: int,
    num_task_types: int,
    root_type: int,
    root_args: tuple[int, ...] = (),
    arity: int = DEFAULT_ARITY,
) -> RuntimeState:
    if capacity < 1:
        raise ConfigError(f"capacity must be >= 1, got {capacity}")
    if num_task_types < 1:
        raise ConfigError("at least one task type is required")
    if not 1 <= root_type <= num_task_types:
        raise ConfigError(f"root task type {root_type} is not registered")
    if len(root_args) > arity:
        raise ConfigError(f"root task has {len(root_args)} args, arity is {arity}")
    state = RuntimeState(
        capacity=capacity,
        num_task_types=num_task_types,
        arity=arity,
        codes=[INVALID] * capacity,
        args=[()] * capacity,
        results=[0] * capacity,
    )
    state.codes[0] = encode_task(0, root_type, num_task_types)
    state.args[0] = tuple(int(a) for a in root_args)
    state.next_free.store(1)
    state.old_next_free_core = 1
    state.join_stack.append(0)
    state.ndrange_stack.append(NDRange(0, 0))
    return state


def halted(state: RuntimeState) -> bool:
    if len(state.join_stack) != len(state.ndrange_stack):
        raise InvariantError(
            f"paired stacks diverged: {len(state.join_stack)} epochs vs "
            f"{len(state.ndrange_stack)} ranges"
        )
    return not state.join_stack


def epoch_setup(state: RuntimeState) -> tuple[int, NDRange]:
    """Phase 1: pop the next epoch and reset the per-epoch flags.

    Every slot above the popped range belongs to a finished descendant
    subtree, so ``next_free_core`` is pulled back to just past the range.
    """
    if halted(state):
        raise ProtocolError("epoch_setup on a halted machine")
    cen = state.join_stack.pop()
    ndrange = state.ndrange_stack.pop()
    if ndrange.hi >= state.capacity:
        raise InvariantError(f"NDRange {ndrange} beyond capacity {state.capacity}")
    state.cen = cen
    state.ndrange = ndrange
    state.next_free.store(ndrange.hi + 1)
    state.old_next_free_core = ndrange.hi + 1
    state.join_scheduled = False
    state.map_scheduled = False
    return cen, ndrange


def epoch_finish(state: RuntimeState) -> list[tuple[int, NDRange]]:
    """Phase 3: push the join epoch (if any), then the fork epoch above it."""
    if state.ndrange is None:
        raise ProtocolError("epoch_finish before epoch_setup")
    pushes: list[tuple[int, NDRange]] = []
    if state.join_scheduled:
        pushes.append((state.cen, state.ndrange))
    nfc = state.next_free.load()
    if nfc > state.old_next_free_core:
        pushes.append((state.cen + 1, NDRange(state.old_next_free_core, nfc - 1)))
    for epoch, rng in pushes:
        state.join_stack.append(epoch)
        state.ndrange_stack.append(rng)
    return pushes


TRACE_FIELDS = (
    "epoch_index",
    "cen",
    "ndrange_lo",
    "ndrange_hi",
    "launched",
    "valid_executed",
    "forked",
    "join_scheduled",
    "map_scheduled",
    "join_stack",
    "ndrange_stack",
    "next_free_core",
)


@dataclass
class EpochTrace:
    epoch_index: int
    cen: int
    ndrange: NDRange
    launched: int
    valid_executed: int
    forked: int
    join_scheduled: bool
    map_scheduled: bool
    join_stack_after: list[int]
    ndrange_stack_after: list[tuple[int, int]]
    next_free_core_after: int
    # (slot, task name, args) per executed task; debug only
    slots: list[tuple[int, str, tuple[int, ...]]] | None = None

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "epoch_index": self.epoch_index,
            "cen": self.cen,
            "ndrange_lo": self.ndrange.lo,
            "ndrange_hi": self.ndrange.hi,
            "launched": self.launched,
            "valid_executed": self.valid_executed,
            "forked": self.forked,
            "join_scheduled": self.join_scheduled,
            "map_scheduled": self.map_scheduled,
            "join_stack": list(self.join_stack_after),
            "ndrange_stack": [list(r) for r in self.ndrange_stack_after],
            "next_free_core": self.next_free_core_after,
        }
        if self.slots is not None:
            d["slots"] = [[s, name, list(args)] for s, name, args in sorted(self.slots)]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def snapshot_trace(
    state: RuntimeState, epoch_index: int, launched: int, valid_executed: int
) -> EpochTrace:
    assert state.ndrange is not None
    nfc = state.next_free.load()
    return EpochTrace(
        epoch_index=epoch_index,
        cen=state.cen,
        ndrange=state.ndrange,
        launched=launched,
        valid_executed=valid_executed,
        forked=nfc - state.old_next_free_core,
        join_scheduled=state.join_scheduled,
        map_scheduled=state.map_scheduled,
        join_stack_after=list(state.join_stack),
        ndrange_stack_after=[(r.lo, r.hi) for r in state.ndrange_stack],
        next_free_core_after=nfc,
    )
