from pathlib import Path
from typing import Sequence, Union

import numpy as np
from sklearn.metrics import confusion_matrix, precision_recall_fscore_support

from maps.classes import CLASS_WORDS, NUM_CLASSES
from models.records import ClassMetrics, MetricsReport, PredictionRecord
from utils.errors import ContractError

LABELS = list(range(NUM_CLASSES))


def metrics(records: Sequence[PredictionRecord]) -> MetricsReport:
    """
    Accuracy, macro F1 по всем 7 классам и матрица ошибок (строки - истинный класс,
    столбцы - предсказанный). F1 класса без предсказаний и без примеров равен 0.
    """
    if not records:
        raise ContractError("metrics need at least one record")
    missing = [r.video_id for r in records if r.label is None]
    if missing:
        raise ContractError(f"records without labels: {missing[:5]}")

    y_true = np.array([r.label for r in records])
    y_pred = np.array([r.predicted for r in records])
    confusion = confusion_matrix(y_true, y_pred, labels=LABELS)
    precision, recall, f1, support = precision_recall_fscore_support(
        y_true, y_pred, labels=LABELS, zero_division=0
    )
    per_class = [
        ClassMetrics(
            label_word=CLASS_WORDS[c],
            precision=float(precision[c]),
            recall=float(recall[c]),
            f1=float(f1[c]),
            support=int(support[c]),
        )
        for c in LABELS
    ]
    return MetricsReport(
        accuracy=int(np.trace(confusion)) / len(records),
        macro_f1=float(np.mean(f1)),
        confusion=confusion.astype(int).tolist(),
        per_class=per_class,
        samples=len(records),
    )


def write_metrics_json(report: MetricsReport, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path


def format_metrics(report: MetricsReport) -> str:
    lines = [f"accuracy\t{report.accuracy:.4f}", f"macro_f1\t{report.macro_f1:.4f}", ""]
    lines.append("true\\pred\t" + "\t".join(word[:3] for word in CLASS_WORDS))
    for word, row in zip(CLASS_WORDS, report.confusion):
        lines.append(word[:3] + "\t" + "\t".join(str(v) for v in row))
    return "\n".join(lines) + "\n"
