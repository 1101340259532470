from pathlib import Path
from typing import List, Literal, Mapping, Optional, Union

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from maps.groups import GRAPH_GROUPS
from optim.schedule import LrSchedule
from optim.staged import ALL_GROUPS, OptimizerConfig, StagedPlan
from utils.errors import ConfigError

KINDS = ("audio_ffn", "audio_gru", "visual_gru", "early_fusion")
CLASSIFY_MODES = ("per_frame", "exact_sequence", "padded_sequence")


class ModelConfig(BaseModel):
    kind: Literal["audio_ffn", "audio_gru", "visual_gru", "early_fusion"] = Field(
        ..., description="pipeline: audio_ffn | audio_gru | visual_gru | early_fusion"
    )
    fusion_option: Optional[int] = Field(default=None, ge=1, le=4, description="early-fusion wiring 1..4")
    bidirectional: bool = Field(False, description="bidirectional GRU on the visual branch")
    attention: bool = Field(False, description="attention gate over the visual GRU states")
    hidden_size: int = Field(128, gt=0, description="units of the main GRU (visual_gru, fusion GRU)")
    num_layers: int = Field(2, gt=0, description="layers of the main GRU")
    visual_hidden_size: int = Field(128, gt=0, description="units of the visual GRU inside early fusion option 4")
    visual_num_layers: int = Field(2, gt=0, description="layers of the visual GRU inside early fusion option 4")
    freeze_visual: bool = Field(False, description="never update the visual GRU of early fusion option 4")
    audio_hidden_size: int = Field(64, gt=0, description="units of the audio GRU")
    audio_num_layers: int = Field(4, gt=0, description="layers of the audio GRU")
    audio_attention: bool = Field(False, description="attention gate over the audio GRU states")
    ffn_hidden: List[int] = Field(default_factory=lambda: [1024], description="comma list of audio FFN hidden widths")
    batch_norm: bool = Field(False, description="batch normalisation after each audio FFN hidden layer")
    dropout: float = Field(0.5, ge=0, lt=1, description="dropout rate in training")
    sequence_length: int = Field(40, gt=0, description="block length L in frames")
    classify_mode: Literal["per_frame", "exact_sequence", "padded_sequence"] = Field(
        "exact_sequence", description="per_frame | exact_sequence | padded_sequence"
    )
    reduction: Optional[Literal["mean", "median"]] = Field(
        default=None, description="mean | median over frames (not allowed with per_frame)"
    )
    batch_size: int = Field(32, gt=0, description="blocks per batch")
    optimizer: Literal["adam", "sgd"] = Field("adam", description="adam | sgd")
    learning_rate: float = Field(1e-4, gt=0, description="initial learning rate")
    lr_decay: float = Field(0.95, gt=0, le=1, description="decay factor of the learning rate")
    lr_decay_steps: int = Field(5000, gt=0, description="steps between decays")
    staircase: bool = Field(True, description="piecewise-constant decay; false gives smooth decay")
    stages: str = Field("30:all", description="training stages, e.g. 5:classifier,25:all")
    init_checkpoint: Optional[str] = Field(default=None, description="checkpoint to warm-start matching tensors from")
    init_seed: Optional[int] = Field(default=None, description="parameter initialisation seed (default: run seed)")
    model_config = ConfigDict(extra="forbid")

    @field_validator("ffn_hidden", mode="before")
    @classmethod
    def _split_widths(cls, value):
        if isinstance(value, str):
            return [int(v) for v in value.split(",") if v.strip()]
        return value

    @field_validator("ffn_hidden")
    @classmethod
    def _positive_widths(cls, value):
        if not value or any(v <= 0 for v in value):
            raise ValueError("ffn_hidden needs at least one positive width")
        return value

    @field_validator("stages")
    @classmethod
    def _parse_stages(cls, value):
        StagedPlan.parse(value)
        return value

    @model_validator(mode="after")
    def _consistent(self):
        if self.kind == "early_fusion" and self.fusion_option is None:
            raise ValueError("early_fusion needs fusion_option 1..4")
        if self.kind != "early_fusion" and self.fusion_option is not None:
            raise ValueError(f"fusion_option is only valid for early_fusion, not {self.kind}")
        if self.classify_mode == "per_frame" and self.reduction is not None:
            raise ValueError("per_frame classification takes no reduction")
        allowed = GRAPH_GROUPS[self.kind]
        unknown = [g for stage in self.plan.stages for g in stage.groups if g != ALL_GROUPS and g not in allowed]
        if unknown:
            raise ValueError(f"stages name groups {unknown} that {self.kind} does not have; available: {allowed + [ALL_GROUPS]}")
        return self

    @property
    def effective_reduction(self) -> str:
        return self.reduction or "mean"

    @property
    def schedule(self) -> LrSchedule:
        return LrSchedule(
            initial=self.learning_rate,
            decay=self.lr_decay,
            interval=self.lr_decay_steps,
            staircase=self.staircase,
        )

    @property
    def optimizer_config(self) -> OptimizerConfig:
        return OptimizerConfig(name=self.optimizer, schedule=self.schedule)

    @property
    def plan(self) -> StagedPlan:
        return StagedPlan.parse(self.stages)

    @property
    def uses_visual(self) -> bool:
        return self.kind in ("visual_gru", "early_fusion")

    @property
    def uses_audio(self) -> bool:
        return self.kind in ("audio_ffn", "audio_gru", "early_fusion")

    @classmethod
    def from_mapping(cls, values: Mapping[str, Optional[str]], source: str = "config") -> "ModelConfig":
        cleaned = {k: v for k, v in values.items() if v not in (None, "")}
        try:
            return cls(**cleaned)
        except ValidationError as e:
            first = e.errors()[0]
            key = ".".join(str(p) for p in first["loc"]) or "config"
            raise ConfigError(f"{source}: {key}: {first['msg']}") from None


def load_run_config(path: Union[str, Path]) -> ModelConfig:
    """Файл `key = value` с комментариями '#'; неизвестные ключи - ошибка."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return ModelConfig.from_mapping(dotenv_values(path, interpolate=False), source=str(path))


def config_keys_help() -> str:
    lines = ["config keys (key = value):"]
    for name, info in ModelConfig.model_fields.items():
        lines.append(f"  {name:<20} {info.description}")
    return "\n".join(lines)
