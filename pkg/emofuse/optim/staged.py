"""
Поэтапное обучение: на каждом этапе обновляются только перечисленные группы
параметров, градиент при этом проходит через всю сеть. Глобальный счётчик шагов
(и расписание скорости) не сбрасывается между этапами, буферы Adam сохраняются.
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Literal, Optional, Protocol, Set, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from gradtape import Tape, Tensor
from optim.optimizers import OPTIMIZERS
from optim.schedule import LrSchedule, lr_at
from utils.errors import ConfigError
from utils.logger import train_logger

HISTORY_COLUMNS = ["step", "epoch", "lr", "loss", "train_accuracy"]
ALL_GROUPS = "all"


class StageSpec(BaseModel):
    epochs: int = Field(..., gt=0)
    groups: List[str] = Field(..., min_length=1)
    model_config = ConfigDict(extra="forbid")


class StagedPlan(BaseModel):
    stages: List[StageSpec] = Field(..., min_length=1)
    model_config = ConfigDict(extra="forbid")

    @classmethod
    def parse(cls, text: str) -> "StagedPlan":
        """'5:classifier,25:all' -> два этапа; группы внутри этапа через '+'."""
        stages = []
        for chunk in text.split(","):
            chunk = chunk.strip()
            if not chunk:
                continue
            epochs, sep, groups = chunk.partition(":")
            if not sep:
                raise ConfigError(f"stage '{chunk}' must look like '<epochs>:<group>[+<group>...]'")
            try:
                stages.append(StageSpec(epochs=int(epochs), groups=[g.strip() for g in groups.split("+") if g.strip()]))
            except ValueError as e:
                raise ConfigError(f"bad stage '{chunk}': {e}") from None
        try:
            return cls(stages=stages)
        except ValueError as e:
            raise ConfigError(f"bad stage plan '{text}': {e}") from None

    @property
    def total_epochs(self) -> int:
        return sum(s.epochs for s in self.stages)


class OptimizerConfig(BaseModel):
    name: Literal["adam", "sgd"] = Field("adam")
    schedule: LrSchedule = Field(default_factory=LrSchedule)
    beta1: float = Field(0.9, ge=0, lt=1)
    beta2: float = Field(0.999, ge=0, lt=1)
    epsilon: float = Field(1e-8, gt=0)
    model_config = ConfigDict(extra="forbid")


class HistoryRow(BaseModel):
    step: int
    epoch: int
    lr: float
    loss: float
    train_accuracy: float


class TrainableGraph(Protocol):
    def named_parameters(self) -> Dict[str, Tensor]: ...

    def parameter_groups(self) -> Dict[str, List[str]]: ...

    def batch_loss(self, batch, train: bool, seed: int) -> Tuple[Tensor, np.ndarray, np.ndarray]: ...


@dataclass
class TrainingResult:
    model: TrainableGraph
    history: List[HistoryRow] = field(default_factory=list)
    steps: int = 0


def resolve_groups(model: TrainableGraph, groups: Iterable[str]) -> Set[str]:
    """Имена групп -> множество имён параметров; 'all' означает всю сеть."""
    available = model.parameter_groups()
    names: Set[str] = set()
    for group in groups:
        if group == ALL_GROUPS:
            names.update(model.named_parameters())
        elif group in available:
            names.update(available[group])
        else:
            raise ConfigError(f"unknown parameter group '{group}', available: {sorted(available) + [ALL_GROUPS]}")
    return names


def step_seed(seed: int, step: int) -> int:
    return int(np.random.SeedSequence([seed, step]).generate_state(1)[0])


def run_staged_training(
    model: TrainableGraph,
    data: Callable[[int], Iterable],
    plan: StagedPlan,
    optimizer: OptimizerConfig,
    seed: int = 0,
    evaluate: Optional[Callable[[], float]] = None,
    frozen: Iterable[str] = (),
    on_epoch_end: Optional[Callable[[HistoryRow], None]] = None,
) -> TrainingResult:
    """
    Args:
        model: Граф с параметрами, группами и batch_loss
        data: epoch -> итератор батчей (перемешивание по эпохе - на стороне data)
        plan: Этапы (эпохи, обучаемые группы)
        optimizer: Оптимизатор и расписание скорости
        seed: Базовый сид для dropout-масок
        evaluate: Точность на обучающих данных в eval-режиме после эпохи;
            если не задан - доля верных предсказаний по батчам эпохи
        frozen: Группы, которые не обновляются ни на одном этапе
        on_epoch_end: Колбэк после записи строки истории

    Returns:
        Результат с историей по эпохам
    """
    params = model.named_parameters()
    stage_names = [resolve_groups(model, stage.groups) for stage in plan.stages]
    always_frozen = resolve_groups(model, frozen) if frozen else set()

    opt_cls = OPTIMIZERS[optimizer.name]
    if optimizer.name == "adam":
        opt = opt_cls(params, beta1=optimizer.beta1, beta2=optimizer.beta2, epsilon=optimizer.epsilon)
    else:
        opt = opt_cls(params)

    result = TrainingResult(model=model)
    step = 0
    epoch = 0
    for stage_index, (stage, trainable) in enumerate(zip(plan.stages, stage_names)):
        trainable = trainable - always_frozen
        train_logger.info(
            f"Stage {stage_index + 1}/{len(plan.stages)}: {stage.epochs} epochs, "
            f"groups={stage.groups}, {len(trainable)}/{len(params)} tensors trainable"
        )
        for _ in range(stage.epochs):
            epoch += 1
            losses = []
            correct = 0
            seen = 0
            lr = lr_at(optimizer.schedule, step)
            for batch in data(epoch):
                with Tape() as tape:
                    loss, logits, labels = model.batch_loss(batch, train=True, seed=step_seed(seed, step))
                tape.backward(loss)
                grads = {name: params[name].grad for name in trainable if params[name].grad is not None}
                lr = lr_at(optimizer.schedule, step)
                opt.step(grads, lr)
                for p in params.values():
                    p.zero_grad()
                step += 1
                losses.append(loss.item())
                correct += int((np.argmax(logits, axis=1) == labels).sum())
                seen += len(labels)

            accuracy = evaluate() if evaluate is not None else (correct / seen if seen else 0.0)
            row = HistoryRow(
                step=step,
                epoch=epoch,
                lr=lr,
                loss=float(np.mean(losses)) if losses else 0.0,
                train_accuracy=accuracy,
            )
            result.history.append(row)
            train_logger.info(f"Epoch {epoch}: step={step} lr={lr:.3g} loss={row.loss:.5f} train_acc={accuracy:.4f}")
            if on_epoch_end is not None:
                on_epoch_end(row)
    result.steps = step
    return result


def write_history_csv(rows: List[HistoryRow], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame([row.model_dump() for row in rows], columns=HISTORY_COLUMNS)
    frame.to_csv(path, index=False, lineterminator="\n")
    return path


def read_history_csv(path: Union[str, Path]) -> List[HistoryRow]:
    frame = pd.read_csv(path, float_precision="round_trip")
    return [HistoryRow(**record) for record in frame.to_dict(orient="records")]
