from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

from evalcli.metrics import metrics, write_metrics_json
from evalcli.writers import write_prediction_log
from layers.checkpoint import load_checkpoint
from models.config import ModelConfig
from models.records import MetricsReport, PredictionRecord
from pipelines.aggregate import video_prediction
from pipelines.data import load_dataset
from pipelines.graphs import ModelGraph, build_model
from seqprep.batching import batch_iterator
from seqprep.blocks import SequenceBlock
from utils.errors import CheckpointError, ConfigError, ShapeError
from utils.logger import eval_logger

PREDICTIONS_FILE = "predictions.log"
METRICS_FILE = "metrics.json"


@dataclass
class EvaluationResult:
    records: List[PredictionRecord]
    report: Optional[MetricsReport]
    predictions_path: Optional[Path] = None
    metrics_path: Optional[Path] = None


def predict_records(graph: ModelGraph, blocks: Sequence[SequenceBlock], batch_size: int,
                    labelled: bool = True) -> List[PredictionRecord]:
    """Прогон в eval-режиме (dropout выключен, batchnorm на скользящих статистиках)."""
    rows = []
    for batch in batch_iterator(blocks, batch_size, shuffle=False):
        logits = graph.block_logits(batch, train=False).values
        for i, video_id in enumerate(batch.video_ids):
            rows.append((video_id, logits[i], int(batch.labels[i]) if labelled else None))
    return video_prediction(rows)


def accuracy_of(records: Sequence[PredictionRecord]) -> float:
    return sum(r.correct for r in records) / len(records) if records else 0.0


def restore_model(checkpoint: Union[str, Path]) -> Tuple[ModelGraph, ModelConfig]:
    header, arrays = load_checkpoint(checkpoint)
    if not header or "model" not in header:
        raise CheckpointError(f"{checkpoint}: checkpoint carries no model config")
    try:
        cfg = ModelConfig.from_mapping(header["model"], source=str(checkpoint))
    except ConfigError as e:
        raise CheckpointError(str(e)) from None
    dims = header.get("dims", {})
    graph = build_model(cfg, dims.get("visual"), dims.get("audio"), seed=header.get("seed", 0))
    graph.load_arrays(arrays)
    return graph, cfg


def evaluate_pipeline(
    checkpoint: Union[str, Path],
    manifest: Union[str, Path],
    out_dir: Optional[Union[str, Path]] = None,
    labelled: bool = True,
) -> EvaluationResult:
    """
    Args:
        checkpoint: Чекпоинт обучения (с заголовком конфигурации)
        manifest: Манифест оцениваемых видео
        out_dir: Куда писать predictions.log и metrics.json (None - не писать)
        labelled: Метки манифеста настоящие; иначе в логе '-' и метрики не считаются

    Returns:
        Записи по видео и отчёт с метриками
    """
    graph, cfg = restore_model(checkpoint)
    data = load_dataset(manifest, cfg)
    for name, expected, got in (("visual", graph.d_visual, data.d_visual), ("audio", graph.d_audio, data.d_audio)):
        if expected is not None and got != expected:
            raise ShapeError(f"{name} features have width {got}, checkpoint expects {expected}")

    records = predict_records(graph, data.blocks, cfg.batch_size, labelled=labelled)
    report = metrics(records) if labelled and records else None
    result = EvaluationResult(records=records, report=report)
    if report is not None:
        eval_logger.info(f"Evaluated {len(records)} videos: accuracy={report.accuracy:.4f} macro_f1={report.macro_f1:.4f}")

    if out_dir is not None:
        out_dir = Path(out_dir)
        result.predictions_path = write_prediction_log(records, out_dir / PREDICTIONS_FILE)
        if report is not None:
            result.metrics_path = write_metrics_json(report, out_dir / METRICS_FILE)
    return result
