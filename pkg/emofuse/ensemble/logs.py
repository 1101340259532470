from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from evalcli.writers import read_prediction_log
from models.records import PredictionRecord
from utils.errors import ContractError, CoverageError
from utils.logger import fusion_logger


@dataclass
class LogTable:
    """
    Логи нескольких моделей над одним набором видео.
    Порядок видео - порядок первого лога, порядок моделей - порядок путей.
    """
    model_names: List[str]
    video_ids: List[str]
    records: Dict[str, Dict[str, PredictionRecord]]
    accuracies: Dict[str, Optional[float]] = field(default_factory=dict)

    @property
    def model_count(self) -> int:
        return len(self.model_names)

    def logits(self) -> np.ndarray:
        """M×V×7"""
        return np.array(
            [[self.records[m][v].logits for v in self.video_ids] for m in self.model_names],
            dtype=np.float64,
        ).reshape(self.model_count, len(self.video_ids), -1)

    def predictions(self) -> np.ndarray:
        """M×V"""
        return np.array(
            [[self.records[m][v].predicted for v in self.video_ids] for m in self.model_names],
            dtype=np.int64,
        ).reshape(self.model_count, len(self.video_ids))

    def labels(self) -> List[Optional[int]]:
        first = self.records[self.model_names[0]]
        return [first[v].label for v in self.video_ids]

    def accuracy_vector(self) -> np.ndarray:
        missing = [m for m in self.model_names if self.accuracies.get(m) is None]
        if missing:
            raise ContractError(f"no accuracy for models {missing}: logs carry no labels")
        return np.array([self.accuracies[m] for m in self.model_names], dtype=np.float64)


def model_accuracy(records: Sequence[PredictionRecord]) -> Optional[float]:
    if not records or any(r.label is None for r in records):
        return None
    return sum(r.correct for r in records) / len(records)


def build_table(named_records: Dict[str, Sequence[PredictionRecord]]) -> LogTable:
    """Проверяет покрытие и согласованность меток и считает точность каждой модели."""
    if not named_records:
        raise ContractError("fusion needs at least one prediction log")
    names = list(named_records)
    first = names[0]
    video_ids = [r.video_id for r in named_records[first]]
    expected = set(video_ids)

    records: Dict[str, Dict[str, PredictionRecord]] = {}
    for name in names:
        by_video = {r.video_id: r for r in named_records[name]}
        missing = sorted(expected - set(by_video))
        extra = sorted(set(by_video) - expected)
        if missing or extra:
            raise CoverageError(
                f"{name} does not cover the videos of {first}: missing {missing[:10]}, extra {extra[:10]}"
            )
        records[name] = by_video

    for video_id in video_ids:
        labels = {records[name][video_id].label for name in names}
        if len(labels) > 1:
            raise CoverageError(f"logs disagree on the label of {video_id}: {sorted(labels, key=str)}")

    accuracies = {name: model_accuracy(named_records[name]) for name in names}
    return LogTable(model_names=names, video_ids=video_ids, records=records, accuracies=accuracies)


def load_logs(paths: Sequence[Union[str, Path]]) -> LogTable:
    """
    Args:
        paths: Пути к логам предсказаний, по одному на модель

    Returns:
        Таблица model -> (video_id -> запись) с точностью каждой модели
    """
    named: Dict[str, List[PredictionRecord]] = {}
    for path in paths:
        path = Path(path)
        name = str(path)
        if name in named:
            raise ContractError(f"log {path} listed twice")
        named[name] = read_prediction_log(path)
    table = build_table(named)
    for name in table.model_names:
        acc = table.accuracies[name]
        fusion_logger.info(f"{name}: {len(table.video_ids)} videos, accuracy {'-' if acc is None else f'{acc:.4f}'}")
    return table
