"""
Выравнивание аудио-клипов по кадрам видео. Клипы нарезаны по сетке 0.04 с (25 FPS)
и проиндексированы исходным номером кадра; клипы кадров без лица отбрасываются.
"""
from pathlib import Path
from typing import Dict, List, Mapping, Sequence, Union

import pandas as pd

from models.records import FrameRecord, VideoSequence
from utils.errors import AlignmentError
from utils.logger import prep_logger

CLIP_SECONDS = 0.04
CLIP_TABLE_COLUMNS = ["video_id", "clip_index", "audio_path"]


def clip_slot_count(duration_s: float, clip_s: float = CLIP_SECONDS) -> int:
    """Число клипов сетки для видео длительностью duration_s: 4.0 с -> 100."""
    if duration_s < 0 or clip_s <= 0:
        raise AlignmentError(f"invalid clip grid: duration {duration_s}, clip {clip_s}")
    return int(round(duration_s / clip_s))


def align_modalities(frames: Sequence[FrameRecord], audio_clips: Mapping[int, str]) -> List[FrameRecord]:
    """
    Args:
        frames: Сохранившиеся визуальные кадры одного видео
        audio_clips: Исходный индекс кадра -> путь к признакам аудио-клипа

    Returns:
        Кадры с заполненным audio_path, по одному на каждый визуальный кадр
    """
    missing = [f.frame_index for f in frames if f.frame_index not in audio_clips]
    if missing:
        video = frames[0].video_id
        raise AlignmentError(f"{video}: no audio clip for frames {missing}")

    aligned = [f.model_copy(update={"audio_path": audio_clips[f.frame_index]}) for f in frames]
    discarded = len(audio_clips) - len(aligned)
    if discarded and frames:
        prep_logger.debug(f"{frames[0].video_id}: discarded {discarded} audio clips of dropped frames")
    return aligned


def read_clip_table(path: Union[str, Path]) -> Dict[str, Dict[int, str]]:
    """TSV `video_id<TAB>clip_index<TAB>audio_path` -> video_id -> (индекс -> путь)."""
    path = Path(path)
    try:
        table = pd.read_csv(path, sep="\t", header=None, dtype=str, keep_default_na=False, quoting=3)
    except FileNotFoundError:
        raise AlignmentError(f"clip table not found: {path}") from None
    except pd.errors.EmptyDataError:
        return {}
    except pd.errors.ParserError as e:
        raise AlignmentError(f"{path}: {e}") from None
    if table.shape[1] != len(CLIP_TABLE_COLUMNS):
        raise AlignmentError(f"{path}: expected {len(CLIP_TABLE_COLUMNS)} columns, got {table.shape[1]}")
    table.columns = CLIP_TABLE_COLUMNS

    clips: Dict[str, Dict[int, str]] = {}
    for line, row in enumerate(table.itertuples(index=False), start=1):
        try:
            index = int(row.clip_index)
        except ValueError:
            raise AlignmentError(f"{path}: line {line}: clip index '{row.clip_index}' is not an integer") from None
        per_video = clips.setdefault(row.video_id, {})
        if index in per_video:
            raise AlignmentError(f"{path}: line {line}: duplicate clip {index} of {row.video_id}")
        per_video[index] = row.audio_path
    return clips


def align_dataset(sequences: Sequence[VideoSequence], clip_table: Mapping[str, Mapping[int, str]]) -> List[VideoSequence]:
    aligned = []
    for seq in sequences:
        if seq.video_id not in clip_table:
            raise AlignmentError(f"{seq.video_id}: no audio clips in clip table")
        frames = align_modalities(seq.frames, clip_table[seq.video_id])
        aligned.append(VideoSequence(video_id=seq.video_id, frames=frames, label=seq.label))
    known = {seq.video_id for seq in sequences}
    for video_id in clip_table:
        if video_id not in known:
            prep_logger.warning(f"{video_id}: no surviving frames, video dropped")
    prep_logger.info(f"Aligned {len(aligned)} videos with their audio clips")
    return aligned
