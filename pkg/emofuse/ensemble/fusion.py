"""
Поздняя фузия логов предсказаний. Для каждого видео считается вектор s из R^7:

    1: s_c = Σ_m acc_m · onehot(pred_m)_c
    2: s_c = Σ_m acc_m · logit_{m,c}
    3: s_c = Σ_m logit_{m,c}                  (count_votes: Σ_m onehot(pred_m)_c)
    4: s_c = Σ_m acc_m · √w_c · logit_{m,c}
    5: s_c = Σ_m β_m · logit_{m,c} + γ_c

Вклады моделей суммируются в отсортированном порядке, поэтому результат
не зависит от порядка моделей побитово.
"""
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from sklearn.preprocessing import minmax_scale

from ensemble.logs import LogTable
from ensemble.regression import RegressionWeights, learn_regression
from ensemble.weights import ClassWeights
from maps.classes import NUM_CLASSES
from models.records import PredictionRecord
from utils.errors import ContractError
from utils.logger import fusion_logger

METHODS = (1, 2, 3, 4, 5)


class FusionSpec(BaseModel):
    method: int = Field(..., ge=1, le=5)
    model_weights: Optional[Tuple[float, ...]] = Field(default=None)
    class_weights: ClassWeights = Field(default_factory=ClassWeights.uniform)
    rescale: bool = Field(False)
    count_votes: bool = Field(False)
    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="after")
    def _weights(self):
        if self.model_weights is not None:
            if any(w < 0 for w in self.model_weights):
                raise ValueError("model weights must be non-negative")
            if not any(w > 0 for w in self.model_weights):
                raise ValueError("at least one model weight must be positive")
        return self


def rescale_logits(logits: np.ndarray) -> np.ndarray:
    """Каждый вектор логитов модели линейно в [0, 1] (M×V×7)."""
    shape = logits.shape
    return minmax_scale(logits.reshape(-1, shape[-1]), feature_range=(0, 1), axis=1).reshape(shape)


def _onehot(predictions: np.ndarray) -> np.ndarray:
    return np.eye(NUM_CLASSES)[predictions]


def _ordered_sum(contributions: np.ndarray) -> np.ndarray:
    return np.sort(contributions, axis=0).sum(axis=0)


def fused_scores(
    logits: np.ndarray,
    spec: FusionSpec,
    model_weights: Optional[np.ndarray] = None,
    regression: Optional[RegressionWeights] = None,
) -> np.ndarray:
    """
    Args:
        logits: M×V×7 (перемасштабирование применяется здесь, если spec.rescale)
        spec: Метод и параметры
        model_weights: acc_m (M), для методов 1, 2 и 4
        regression: (β, γ) для метода 5

    Returns:
        V×7 оценки
    """
    if spec.rescale:
        logits = rescale_logits(logits)
    predictions = np.argmax(logits, axis=2)
    if spec.method in (1, 2, 4):
        if model_weights is None:
            raise ContractError(f"method {spec.method} needs model weights")
        model_weights = np.asarray(model_weights, dtype=np.float64)
        if model_weights.shape != (logits.shape[0],):
            raise ContractError(f"{logits.shape[0]} models but {model_weights.shape} weights")
        if (model_weights < 0).any() or not (model_weights > 0).any():
            raise ContractError("model weights must be non-negative with at least one positive")
    acc = None if model_weights is None else np.asarray(model_weights, dtype=np.float64)[:, None, None]

    if spec.method == 1:
        return _ordered_sum(acc * _onehot(predictions))
    if spec.method == 2:
        return _ordered_sum(acc * logits)
    if spec.method == 3:
        return _ordered_sum(_onehot(predictions) if spec.count_votes else logits)
    if spec.method == 4:
        root = np.sqrt(spec.class_weights.array())[None, None, :]
        return _ordered_sum(acc * (root * logits))
    if regression is None:
        raise ContractError("method 5 needs learned regression weights")
    return regression.scores(logits)


def fuse(
    table: LogTable,
    spec: FusionSpec,
    regression: Optional[RegressionWeights] = None,
    model_weights: Optional[np.ndarray] = None,
) -> List[PredictionRecord]:
    """
    Args:
        table: Логи моделей (покрытие уже проверено)
        spec: Метод фузии
        regression: Веса метода 5
        model_weights: Веса моделей; по умолчанию spec.model_weights или точности логов

    Returns:
        Запись на видео; предсказание - argmax с наименьшим индексом при равенстве
    """
    if model_weights is None and spec.method in (1, 2, 4):
        model_weights = np.array(spec.model_weights) if spec.model_weights is not None else table.accuracy_vector()
    scores = fused_scores(table.logits(), spec, model_weights=model_weights, regression=regression)
    labels = table.labels()
    records = [
        PredictionRecord.from_logits(video_id, scores[i], label=labels[i])
        for i, video_id in enumerate(table.video_ids)
    ]
    if all(r.label is not None for r in records) and records:
        accuracy = sum(r.correct for r in records) / len(records)
        fusion_logger.info(f"Method {spec.method} (rescale={spec.rescale}): fused accuracy {accuracy:.4f}")
    return records


def learn_fusion_regression(table: LogTable, k: int = 5, rescale: bool = False) -> RegressionWeights:
    logits = table.logits()
    if rescale:
        logits = rescale_logits(logits)
    return learn_regression(logits, table.labels(), k=k)
