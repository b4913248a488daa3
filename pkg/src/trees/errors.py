"""Exception hierarchy for the runtime.

Everything the runtime raises on purpose derives from :class:`TreesError`, so
callers (the CLI in particular) can map failures to exit codes without
catching unrelated exceptions.
"""

from __future__ import annotations


class TreesError(Exception):
    """Base class for runtime errors."""


class ConfigError(TreesError, ValueError):
    """Bad configuration: capacity, task registration, backend settings."""


class ContractViolation(TreesError):
    """A task body used a primitive in a way the execution model forbids."""


class ProtocolError(TreesError):
    """Host-side epoch protocol called out of order (e.g. setup on a halted machine)."""


class InvariantError(TreesError):
    """Internal state is inconsistent. Always a bug in the runtime."""


class FatalRuntimeError(TreesError):
    """Errors that abort a run. The CLI exits with code 3 for these."""


class CapacityError(FatalRuntimeError):
    def __init__(self, slot: int, capacity: int, requested: int = 1):
        self.slot = slot
        self.capacity = capacity
        self.requested = requested
        super().__init__(
            f"task vector capacity {capacity} exhausted: fork from slot {slot} "
            f"needs {requested} more slot(s)"
        )


class EpochLimitError(FatalRuntimeError):
    def __init__(self, limit: int):
        self.limit = limit
        super().__init__(f"epoch limit {limit} reached without halting")


class TaskFailure(FatalRuntimeError):
    def __init__(self, slot: int, task: str, cause: BaseException):
        self.slot = slot
        self.task = task
        super().__init__(f"task {task!r} in slot {slot} failed: {cause!r}")


class MapFailure(FatalRuntimeError):
    def __init__(self, fn: str, index: int, cause: BaseException):
        self.fn = fn
        self.index = index
        super().__init__(f"map function {fn!r} failed at item {index}: {cause!r}")
