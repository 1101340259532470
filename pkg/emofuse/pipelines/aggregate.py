"""
Свёртка логитов кадров в логиты блока и блоков в предсказание по видео.
"""
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from gradtape import Tensor, concat, getitem, mean, median, stack
from maps.classes import NUM_CLASSES
from models.records import PredictionRecord
from utils.errors import ContractError, ShapeError

REDUCTIONS = {"mean": mean, "median": median}


@dataclass(frozen=True)
class FrameLogits:
    logits: Tensor
    lengths: np.ndarray

    def __post_init__(self):
        if self.logits.ndim != 3 or self.logits.shape[2] != NUM_CLASSES:
            raise ShapeError(f"frame logits must be B×T×{NUM_CLASSES}, got {self.logits.shape}")
        if np.shape(self.lengths) != (self.logits.shape[0],):
            raise ShapeError(f"lengths {np.shape(self.lengths)} vs batch {self.logits.shape[0]}")


def aggregate_logits(fl: FrameLogits, mode: str, reduction: str = "mean") -> Tensor:
    """
    exact_sequence: свёртка только по t < true_length (содержимое паддинга не влияет
    ни на значения, ни на градиенты); padded_sequence: по всем T кадрам.

    Returns:
        Логиты блоков B×7
    """
    if mode == "per_frame":
        raise ContractError("per_frame classification has no sequence aggregation")
    if reduction not in REDUCTIONS:
        raise ContractError(f"unknown reduction {reduction}")
    reduce = REDUCTIONS[reduction]
    if mode == "padded_sequence":
        return reduce(fl.logits, axis=1)
    if mode != "exact_sequence":
        raise ContractError(f"unknown classify mode {mode}")
    rows = [
        reduce(getitem(fl.logits, (b, slice(0, int(length)))), axis=0)
        for b, length in enumerate(fl.lengths)
    ]
    return stack(rows, axis=0)


def valid_frame_rows(fl: FrameLogits, labels) -> Tuple[Tensor, np.ndarray]:
    """Логиты валидных кадров N×7 и метка видео, размноженная на каждый кадр."""
    labels = np.asarray(labels, dtype=np.int64)
    parts = [getitem(fl.logits, (b, slice(0, int(length)))) for b, length in enumerate(fl.lengths)]
    frame_labels = np.repeat(labels, np.asarray(fl.lengths, dtype=np.int64))
    return concat(parts, axis=0), frame_labels


def onehot(labels, classes: int = NUM_CLASSES) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= classes):
        raise ContractError(f"labels must lie in 0..{classes - 1}")
    out = np.zeros((labels.size, classes))
    out[np.arange(labels.size), labels] = 1.0
    return out


def video_prediction(blocks: Iterable[Tuple[str, np.ndarray, Optional[int]]]) -> List[PredictionRecord]:
    """
    Args:
        blocks: (video_id, логиты блока [7], метка или None)

    Returns:
        По записи на видео в порядке первого появления: среднее логитов блоков,
        argmax с наименьшим индексом при равенстве
    """
    grouped: Dict[str, List[np.ndarray]] = {}
    labels: Dict[str, Optional[int]] = {}
    for video_id, logits, label in blocks:
        grouped.setdefault(video_id, []).append(np.asarray(logits, dtype=np.float64))
        labels.setdefault(video_id, label)
    return [
        PredictionRecord.from_logits(video_id, np.mean(np.stack(parts), axis=0), label=labels[video_id])
        for video_id, parts in grouped.items()
    ]
