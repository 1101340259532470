"""
Манифест кадров: UTF-8 TSV, одна строка на кадр

    video_id<TAB>label_word<TAB>frame_index<TAB>visual_feature_path<TAB>audio_feature_path

'-' в последней колонке означает отсутствие аудио.
"""
from pathlib import Path
from typing import Dict, Iterable, List, Set, Tuple, Union

import pandas as pd
from pydantic import ValidationError

from maps.classes import class_index, class_word
from models.records import FrameRecord, VideoSequence
from utils.errors import ContractError, ManifestError, undecodable_line
from utils.logger import prep_logger

MANIFEST_COLUMNS = ["video_id", "label_word", "frame_index", "visual_path", "audio_path"]
NO_AUDIO = "-"


def _read_table(path: Path, columns: List[str]) -> pd.DataFrame:
    try:
        frame = pd.read_csv(
            path,
            sep="\t",
            header=None,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=False,
            quoting=3,
            encoding="utf-8",
        )
    except pd.errors.EmptyDataError:
        return pd.DataFrame(columns=columns)
    except pd.errors.ParserError as e:
        raise ManifestError(f"{path}: {e}") from None
    except UnicodeDecodeError:
        raise ManifestError(f"{path}: not valid UTF-8", undecodable_line(path)) from None
    if frame.shape[1] != len(columns):
        raise ManifestError(f"{path}: expected {len(columns)} tab-separated columns, got {frame.shape[1]}")
    frame.columns = columns
    return frame.fillna("")


def parse_manifest(path: Union[str, Path], check_paths: bool = True) -> List[VideoSequence]:
    """
    Args:
        path: Путь к манифесту
        check_paths: Проверять, что файлы признаков существуют (относительно папки манифеста)

    Returns:
        Видео в порядке первого появления, кадры в порядке файла
    """
    path = Path(path)
    if not path.is_file():
        raise ManifestError(f"manifest not found: {path}")
    table = _read_table(path, MANIFEST_COLUMNS)
    base_dir = path.parent

    grouped: Dict[str, List[FrameRecord]] = {}
    seen: Set[Tuple[str, int]] = set()
    checked: Set[str] = set()
    for row_number, row in enumerate(table.itertuples(index=False)):
        line = row_number + 1
        if not any(row):
            continue
        if any(value == "" for value in row):
            raise ManifestError("expected 5 non-empty tab-separated fields", line)
        try:
            label = class_index(row.label_word)
        except ContractError as e:
            raise ManifestError(str(e), line) from None
        try:
            frame_index = int(row.frame_index)
        except ValueError:
            raise ManifestError(f"frame index '{row.frame_index}' is not an integer", line) from None

        key = (row.video_id, frame_index)
        if key in seen:
            raise ManifestError(f"duplicate frame {frame_index} of video {row.video_id}", line)
        seen.add(key)

        audio_path = None if row.audio_path == NO_AUDIO else row.audio_path
        if check_paths:
            for feature_path in filter(None, (row.visual_path, audio_path)):
                if feature_path not in checked:
                    if not (base_dir / feature_path).is_file():
                        raise ManifestError(f"unreadable feature file {feature_path}", line)
                    checked.add(feature_path)

        frames = grouped.setdefault(row.video_id, [])
        if frames and (frames[-1].label != label):
            raise ManifestError(f"video {row.video_id} changes label mid-sequence", line)
        if frames and frames[-1].frame_index >= frame_index:
            raise ManifestError(f"frame indices of {row.video_id} must increase", line)
        try:
            frames.append(
                FrameRecord(
                    video_id=row.video_id,
                    frame_index=frame_index,
                    visual_path=row.visual_path,
                    audio_path=audio_path,
                    label=label,
                )
            )
        except ValidationError as e:
            raise ManifestError(str(e.errors()[0]["msg"]), line) from None

    sequences = [VideoSequence(video_id=vid, frames=frames, label=frames[0].label) for vid, frames in grouped.items()]
    prep_logger.info(f"Parsed {path}: {len(sequences)} videos, {sum(s.true_length for s in sequences)} frames")
    return sequences


def write_manifest(sequences: Iterable[VideoSequence], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = [
        (f.video_id, class_word(f.label), str(f.frame_index), f.visual_path, f.audio_path or NO_AUDIO)
        for seq in sequences
        for f in seq.frames
    ]
    with path.open("w", encoding="utf-8", newline="") as fh:
        for row in rows:
            fh.write("\t".join(row) + "\n")
    return path
