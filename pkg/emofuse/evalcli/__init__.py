from .metrics import format_metrics, metrics, write_metrics_json
from .writers import read_prediction_log, read_submission, write_prediction_log, write_submission

__all__ = [
    "format_metrics",
    "metrics",
    "write_metrics_json",
    "read_prediction_log",
    "read_submission",
    "write_prediction_log",
    "write_submission",
]
