from .aggregate import FrameLogits, aggregate_logits, video_prediction
from .graphs import AudioFFN, AudioGRU, EarlyFusion, ModelGraph, VisualGRU, build_model
from .data import Dataset, load_blocks, load_dataset
from .evaluate import EvaluationResult, evaluate_pipeline, predict_records, restore_model
from .train import TrainRun, train_pipeline

__all__ = [
    "FrameLogits",
    "aggregate_logits",
    "video_prediction",
    "AudioFFN",
    "AudioGRU",
    "EarlyFusion",
    "ModelGraph",
    "VisualGRU",
    "build_model",
    "Dataset",
    "load_blocks",
    "load_dataset",
    "EvaluationResult",
    "evaluate_pipeline",
    "predict_records",
    "restore_model",
    "TrainRun",
    "train_pipeline",
]
