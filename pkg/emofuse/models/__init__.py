from .records import (
    DatasetStats,
    FrameRecord,
    MetricsReport,
    PredictionRecord,
    SubmissionEntry,
    VideoSequence,
)
from .config import ModelConfig, load_run_config

__all__ = [
    "DatasetStats",
    "FrameRecord",
    "MetricsReport",
    "PredictionRecord",
    "SubmissionEntry",
    "VideoSequence",
    "ModelConfig",
    "load_run_config",
]
