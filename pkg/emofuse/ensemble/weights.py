from typing import Mapping, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from maps.classes import CLASS_WORDS, NUM_CLASSES
from utils.errors import ContractError


class ClassWeights(BaseModel):
    weights: Tuple[float, ...] = Field(...)
    model_config = ConfigDict(extra="forbid", frozen=True)

    @field_validator("weights")
    @classmethod
    def _seven_positive(cls, value):
        if len(value) != NUM_CLASSES or any(not w > 0 for w in value):
            raise ValueError(f"class weights must be {NUM_CLASSES} positive floats")
        return value

    @classmethod
    def uniform(cls) -> "ClassWeights":
        return cls(weights=(1.0,) * NUM_CLASSES)

    def array(self) -> np.ndarray:
        return np.array(self.weights, dtype=np.float64)


def compute_class_weights(counts: Union[Sequence[int], Mapping[str, int]]) -> ClassWeights:
    """
    Обратная частота w_c = N / (7·N_c), затем нормировка к сумме 7 (среднее 1).

    Args:
        counts: Число обучающих видео по классам (список по индексу или словарь по слову)
    """
    if isinstance(counts, Mapping):
        counts = [counts.get(word, 0) for word in CLASS_WORDS]
    counts = np.asarray(counts, dtype=np.float64)
    if counts.shape != (NUM_CLASSES,):
        raise ContractError(f"expected {NUM_CLASSES} class counts, got {counts.shape}")
    if (counts <= 0).any():
        empty = [CLASS_WORDS[c] for c in np.flatnonzero(counts <= 0)]
        raise ContractError(f"class weights need every class in training data, missing {empty}")
    raw = counts.sum() / (NUM_CLASSES * counts)
    return ClassWeights(weights=tuple(float(w) for w in raw * (NUM_CLASSES / raw.sum())))
