from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, List, Optional, Union

from evalcli.metrics import metrics
from layers.checkpoint import load_checkpoint, save_checkpoint
from models.config import ModelConfig
from optim.staged import HistoryRow, run_staged_training, step_seed, write_history_csv
from pipelines.data import Dataset, check_same_dims, load_dataset
from pipelines.evaluate import accuracy_of, predict_records
from pipelines.graphs import ModelGraph, build_model
from seqprep.batching import Batch, batch_iterator
from utils.errors import ContractError
from utils.logger import train_logger

CHECKPOINT_FILE = "model.ckpt"
HISTORY_FILE = "history.csv"


@dataclass
class TrainRun:
    graph: ModelGraph
    history: List[HistoryRow]
    checkpoint_path: Path
    history_path: Path
    validation_accuracy: List[float] = field(default_factory=list)


def checkpoint_header(cfg: ModelConfig, data: Dataset, seed: int) -> dict:
    return {
        "model": cfg.model_dump(mode="json"),
        "dims": {"visual": data.d_visual, "audio": data.d_audio},
        "seed": seed,
    }


def train_pipeline(
    cfg: ModelConfig,
    train_manifest: Union[str, Path],
    valid_manifest: Optional[Union[str, Path]],
    seed: int,
    out_dir: Union[str, Path],
) -> TrainRun:
    """
    Поэтапное обучение по манифестам. В history.csv по строке на эпоху:
    шаг, эпоха, скорость обучения, средняя потеря и точность на обучающих видео
    в eval-режиме; точность и macro F1 на валидации только логируются.

    Args:
        cfg: Конфигурация модели и обучения
        train_manifest: Обучающий манифест
        valid_manifest: Валидационный манифест (может отсутствовать)
        seed: Сид инициализации, перемешивания и dropout
        out_dir: Папка для model.ckpt и history.csv

    Returns:
        Обученный граф, история и пути к файлам
    """
    out_dir = Path(out_dir)
    train = load_dataset(train_manifest, cfg)
    if not train.blocks:
        raise ContractError(f"{train_manifest}: no training videos")
    valid = load_dataset(valid_manifest, cfg) if valid_manifest is not None else None
    if valid is not None:
        check_same_dims(train, valid)

    graph = build_model(cfg, train.d_visual, train.d_audio, seed=seed)
    if cfg.init_checkpoint:
        _, arrays = load_checkpoint(cfg.init_checkpoint)
        restored = graph.warm_start(arrays)
        train_logger.info(f"Warm start from {cfg.init_checkpoint}: {restored} tensors restored")
    train_logger.info(
        f"Training {cfg.kind} on {train.video_count} videos ({len(train.blocks)} blocks), "
        f"{graph.parameter_count()} parameters, stages '{cfg.stages}'"
    )

    def data(epoch: int) -> Iterator[Batch]:
        for batch in batch_iterator(train.blocks, cfg.batch_size, shuffle=True, seed=step_seed(seed, epoch)):
            if cfg.batch_norm and batch.size < 2:
                train_logger.debug(f"Epoch {epoch}: batch of one skipped under batch normalisation")
                continue
            yield batch

    def evaluate() -> float:
        return accuracy_of(predict_records(graph, train.blocks, cfg.batch_size))

    validation_accuracy: List[float] = []

    def on_epoch_end(row: HistoryRow) -> None:
        if valid is None or not valid.blocks:
            return
        report = metrics(predict_records(graph, valid.blocks, cfg.batch_size))
        validation_accuracy.append(report.accuracy)
        train_logger.info(f"Epoch {row.epoch}: valid_acc={report.accuracy:.4f} valid_macro_f1={report.macro_f1:.4f}")

    result = run_staged_training(
        graph,
        data,
        cfg.plan,
        cfg.optimizer_config,
        seed=seed,
        evaluate=evaluate,
        frozen=graph.frozen_groups,
        on_epoch_end=on_epoch_end,
    )

    checkpoint_path = save_checkpoint(out_dir / CHECKPOINT_FILE, graph.state_arrays(), checkpoint_header(cfg, train, seed))
    history_path = write_history_csv(result.history, out_dir / HISTORY_FILE)
    train_logger.info(f"Saved {checkpoint_path} and {history_path}")
    return TrainRun(
        graph=graph,
        history=result.history,
        checkpoint_path=checkpoint_path,
        history_path=history_path,
        validation_accuracy=validation_accuracy,
    )
