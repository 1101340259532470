from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from maps.classes import NUM_CLASSES, EmotionEnum


def first_argmax(values) -> int:
    """argmax с выбором наименьшего индекса при равенстве."""
    return int(np.argmax(np.asarray(values, dtype=np.float64)))


# --- Manifest ---

class FrameRecord(BaseModel):
    video_id: str = Field(..., min_length=1)
    frame_index: int = Field(..., ge=0)
    visual_path: str = Field(..., min_length=1)
    audio_path: Optional[str] = Field(default=None)
    label: int = Field(..., ge=0, lt=NUM_CLASSES)
    model_config = ConfigDict(extra="forbid", frozen=True)


class VideoSequence(BaseModel):
    video_id: str = Field(...)
    frames: List[FrameRecord] = Field(..., min_length=1)
    label: int = Field(..., ge=0, lt=NUM_CLASSES)
    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="after")
    def _consistent(self):
        previous = -1
        for frame in self.frames:
            if frame.video_id != self.video_id or frame.label != self.label:
                raise ValueError(f"frame {frame.frame_index} does not belong to video {self.video_id}")
            if frame.frame_index <= previous:
                raise ValueError(f"frame indices of {self.video_id} must be strictly increasing")
            previous = frame.frame_index
        return self

    @property
    def true_length(self) -> int:
        return len(self.frames)

    @property
    def has_audio(self) -> bool:
        return all(f.audio_path is not None for f in self.frames)


class DatasetStats(BaseModel):
    class_counts: Dict[str, int] = Field(...)
    length_histogram: Dict[int, int] = Field(...)
    bucket_width: int = Field(1, ge=1)
    total_videos: int = Field(..., ge=0)
    total_frames: int = Field(..., ge=0)
    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="after")
    def _counts_sum(self):
        if sum(self.class_counts.values()) != self.total_videos:
            raise ValueError("class counts must sum to the number of videos")
        return self


# --- Predictions ---

class PredictionRecord(BaseModel):
    video_id: str = Field(..., min_length=1)
    logits: Tuple[float, ...] = Field(...)
    predicted: int = Field(..., ge=0, lt=NUM_CLASSES)
    label: Optional[int] = Field(default=None, ge=0, lt=NUM_CLASSES)
    model_config = ConfigDict(extra="forbid", frozen=True)

    @field_validator("logits")
    @classmethod
    def _seven_finite(cls, value):
        if len(value) != NUM_CLASSES:
            raise ValueError(f"expected {NUM_CLASSES} logits, got {len(value)}")
        if not np.all(np.isfinite(value)):
            raise ValueError("logits must be finite")
        return value

    @model_validator(mode="after")
    def _predicted_is_argmax(self):
        if self.predicted != first_argmax(self.logits):
            raise ValueError(f"{self.video_id}: predicted {self.predicted} is not the argmax of its logits")
        return self

    @classmethod
    def from_logits(cls, video_id: str, logits, label: Optional[int] = None) -> "PredictionRecord":
        values = tuple(float(v) for v in np.asarray(logits, dtype=np.float64).reshape(-1))
        return cls(video_id=video_id, logits=values, predicted=first_argmax(values), label=label)

    @property
    def correct(self) -> bool:
        return self.label is not None and self.label == self.predicted


class SubmissionEntry(BaseModel):
    sample_id: str = Field(..., min_length=1)
    label_word: EmotionEnum = Field(...)
    model_config = ConfigDict(extra="forbid")

    @field_validator("sample_id")
    @classmethod
    def plain_file_name(cls, v: str) -> str:
        # id становится именем файла внутри out_dir
        if "/" in v or "\\" in v or v in (".", ".."):
            raise ValueError(f"sample id {v!r} is not a plain file name")
        return v


# --- Metrics ---

class ClassMetrics(BaseModel):
    label_word: EmotionEnum
    precision: float
    recall: float
    f1: float
    support: int


class MetricsReport(BaseModel):
    accuracy: float = Field(..., ge=0, le=1)
    macro_f1: float = Field(..., ge=0, le=1)
    confusion: List[List[int]] = Field(...)
    per_class: List[ClassMetrics] = Field(...)
    samples: int = Field(..., gt=0)
    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="after")
    def _confusion_total(self):
        if sum(sum(row) for row in self.confusion) != self.samples:
            raise ValueError("confusion matrix must sum to the sample count")
        return self
