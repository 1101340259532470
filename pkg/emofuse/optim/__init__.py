from .optimizers import SGD, Adam, AdamState, adam_step, sgd_step
from .schedule import LrSchedule, lr_at
from .staged import (
    HistoryRow,
    OptimizerConfig,
    StagedPlan,
    StageSpec,
    TrainingResult,
    read_history_csv,
    run_staged_training,
    write_history_csv,
)

__all__ = [
    "SGD",
    "Adam",
    "AdamState",
    "adam_step",
    "sgd_step",
    "LrSchedule",
    "lr_at",
    "HistoryRow",
    "OptimizerConfig",
    "StagedPlan",
    "StageSpec",
    "TrainingResult",
    "read_history_csv",
    "run_staged_training",
    "write_history_csv",
]
