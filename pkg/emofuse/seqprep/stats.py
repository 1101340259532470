from typing import Iterable

import pandas as pd

from maps.classes import CLASS_WORDS, class_word
from models.records import DatasetStats, VideoSequence
from utils.errors import ContractError


def stats_frame(sequences: Iterable[VideoSequence]) -> pd.DataFrame:
    """Таблица video_id / label_word / length, по строке на видео."""
    return pd.DataFrame(
        [(s.video_id, class_word(s.label), s.true_length) for s in sequences],
        columns=["video_id", "label_word", "length"],
    )


def dataset_stats(sequences: Iterable[VideoSequence], bucket_width: int = 1) -> DatasetStats:
    """
    Args:
        sequences: Видео датасета
        bucket_width: Ширина корзины гистограммы длин; ключ - начало корзины

    Returns:
        Счётчики по классам (все 7 классов) и гистограмма длин
    """
    if bucket_width < 1:
        raise ContractError(f"bucket width must be at least 1, got {bucket_width}")
    frame = stats_frame(sequences)
    counts = frame["label_word"].value_counts()
    class_counts = {word: int(counts.get(word, 0)) for word in CLASS_WORDS}

    histogram = {}
    if len(frame):
        buckets = (frame["length"] // bucket_width) * bucket_width
        histogram = {int(k): int(v) for k, v in buckets.value_counts().sort_index().items()}
    return DatasetStats(
        class_counts=class_counts,
        length_histogram=histogram,
        bucket_width=bucket_width,
        total_videos=len(frame),
        total_frames=int(frame["length"].sum()) if len(frame) else 0,
    )


def format_stats(stats: DatasetStats) -> str:
    lines = ["class\tvideos"]
    lines += [f"{word}\t{count}" for word, count in stats.class_counts.items()]
    lines.append(f"total\t{stats.total_videos}")
    lines.append("")
    lines.append(f"length (bucket {stats.bucket_width})\tvideos")
    lines += [f"{start}\t{count}" for start, count in stats.length_histogram.items()]
    return "\n".join(lines) + "\n"
