"""Task-parallel runtime executing fork/join/emit/map programs as bulk-synchronous epochs."""

from .core import (
    INVALID,
    NULL,
    EpochTrace,
    NDRange,
    RuntimeState,
    decode_task,
    encode_task,
    epoch_finish,
    epoch_setup,
    halted,
    init_state,
    is_runnable,
    snapshot_trace,
)
from .errors import (
    CapacityError,
    ConfigError,
    ContractViolation,
    EpochLimitError,
    TaskFailure,
    TreesError,
)
from .executor import BackendConfig, TaskContext, drain_maps, launch_epoch, run_to_completion
from .metrics import Metrics, PerfModelParams, model_time, space_bounds
from .program import Arena, Program, ProgramResult, register_program, run_program

__version__ = "0.1.0"
