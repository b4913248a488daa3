"""Work / critical-path accounting and the analytical runtime model."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .core import EpochTrace
from .errors import ConfigError

MODEL_CASES = ("scalar", "best", "pessimistic", "worst")


@dataclass
class Metrics:
    epochs: int = 0
    map_drains: int = 0
    work_tasks: int = 0
    work_map_items: int = 0
    launched_total: int = 0
    peak_next_free_core: int = 1
    atomic_ops: int = 0
    lock_ops: int = 0
    work_groups: int = 0
    # per-epoch instrumentation, indexed by epoch ordinal
    epoch_alloc_atomics: list[int] = field(default_factory=list)
    epoch_fork_groups: list[int] = field(default_factory=list)

    @property
    def utilization(self) -> float:
        if self.launched_total == 0:
            return 0.0
        return self.work_tasks / self.launched_total

    @property
    def critical_path(self) -> int:
        return self.epochs + self.map_drains

    def record_epoch(self, trace: EpochTrace) -> "Metrics":
        self.epochs += 1
        self.work_tasks += trace.valid_executed
        self.launched_total += trace.launched
        self.peak_next_free_core = max(self.peak_next_free_core, trace.next_free_core_after)
        return self

    def record_launch(self, alloc_atomics: int, fork_groups: int, work_groups: int) -> None:
        self.atomic_ops += alloc_atomics
        self.work_groups += work_groups
        self.epoch_alloc_atomics.append(alloc_atomics)
        self.epoch_fork_groups.append(fork_groups)

    def record_map_drain(self, items: int) -> None:
        self.map_drains += 1
        self.work_map_items += items

    def invariant_dict(self) -> dict:
        """Fields that must not depend on backend or worker count."""
        return {
            "epochs": self.epochs,
            "map_drains": self.map_drains,
            "critical_path": self.critical_path,
            "work_tasks": self.work_tasks,
            "work_map_items": self.work_map_items,
            "launched_total": self.launched_total,
            "utilization": self.utilization,
            "peak_next_free_core": self.peak_next_free_core,
            "lock_ops": self.lock_ops,
        }

    def to_dict(self) -> dict:
        d = self.invariant_dict()
        d.update(atomic_ops=self.atomic_ops, work_groups=self.work_groups)
        return d


@dataclass(frozen=True)
class PerfModelParams:
    T1: float
    Tinf: float
    P: int = 1
    W: int = 1
    V1: float = 1.0
    Vinf: float = 1.0
    D: int = 0

    def __post_init__(self):
        if self.P < 1 or self.W < 1:
            raise ConfigError("P and W must be >= 1")
        if self.V1 < 1 or self.Vinf < 0:
            raise ConfigError("need V1 >= 1 and Vinf >= 0")
        if self.T1 < 0 or self.Tinf < 0 or self.D < 0:
            raise ConfigError("T1, Tinf and D must be non-negative")


def model_time(p: PerfModelParams, case: str = "best") -> float:
    """Modeled execution time under one of the four divergence cases.

    ``scalar`` ignores SIMD width entirely: ``V1*T1/P + Vinf*Tinf``.  The
    other three divide work across ``P*W`` lanes and scale it by 1,
    ``log2(W)`` or ``2**D`` respectively.
    """
    if case == "scalar":
        return p.V1 * p.T1 / p.P + p.Vinf * p.Tinf
    if case == "best":
        factor = 1.0
    elif case == "pessimistic":
        factor = math.log2(p.W)
    elif case == "worst":
        if 2**p.D >= p.W:
            raise ConfigError(f"worst case needs 2**D < W (D={p.D}, W={p.W})")
        factor = float(2**p.D)
    else:
        raise ConfigError(f"unknown model case {case!r}; expected one of {MODEL_CASES}")
    return p.V1 * factor * p.T1 / (p.P * p.W) + p.Vinf * p.Tinf


def space_bounds(m: Metrics) -> tuple[int, int]:
    """(parallelism lower bound, work upper bound) on task-vector space."""
    if m.critical_path == 0:
        raise ConfigError("space bounds undefined for a run with no epochs")
    return -(-m.work_tasks // m.critical_path), m.work_tasks
