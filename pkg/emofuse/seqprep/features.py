"""
Файлы признаков: CSV на видео и модальность, строка = frame_index,v1,...,vD.
Заголовок необязателен и пропускается, если первая ячейка не число.
"""
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import numpy as np
import pandas as pd

from models.records import VideoSequence
from utils.errors import FeatureFileError, undecodable_line
from utils.logger import prep_logger

MODALITIES = ("visual", "audio")
AUDIO_LLD_DIM = 112
AUDIO_FUNCTIONAL_DIM = 6552


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def read_feature_file(path: Union[str, Path]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Returns:
        (индексы кадров int64 [N], матрица признаков float64 [N x D])
    """
    path = Path(path)
    try:
        table = pd.read_csv(path, header=None, dtype=str, keep_default_na=False, encoding="utf-8")
    except FileNotFoundError:
        raise FeatureFileError(f"feature file not found: {path}") from None
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as e:
        raise FeatureFileError(f"{path}: {e}") from None
    except UnicodeDecodeError:
        raise FeatureFileError(f"{path}: line {undecodable_line(path)}: not valid UTF-8") from None

    if len(table) and not _is_number(table.iat[0, 0]):
        table = table.iloc[1:]
    if len(table) == 0:
        raise FeatureFileError(f"{path}: no feature rows")
    if table.shape[1] < 2:
        raise FeatureFileError(f"{path}: rows need a frame index and at least one value")

    raw = table.to_numpy()
    try:
        indices = np.array([int(v) for v in raw[:, 0]], dtype=np.int64)
        values = raw[:, 1:].astype(np.float64)
    except ValueError as e:
        raise FeatureFileError(f"{path}: {e}") from None
    if not np.all(np.isfinite(values)):
        raise FeatureFileError(f"{path}: non-finite feature value")
    if len(np.unique(indices)) != len(indices):
        raise FeatureFileError(f"{path}: duplicate frame index")
    return indices, values


def write_feature_file(path: Union[str, Path], indices, values) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    frame = pd.DataFrame(values)
    frame.insert(0, "frame_index", np.asarray(indices, dtype=np.int64))
    frame.to_csv(path, header=False, index=False, float_format="%.17g", lineterminator="\n")
    return path


class FeatureStore:
    """
    Кэш файлов признаков с единой размерностью D на модальность:
    D берётся из первого прочитанного файла и далее проверяется.
    """

    def __init__(self, base_dir: Union[str, Path]):
        self.base_dir = Path(base_dir)
        self.dims: Dict[str, Optional[int]] = {m: None for m in MODALITIES}
        self._cache: Dict[str, Tuple[Dict[int, int], np.ndarray]] = {}

    def _load(self, relative: str, modality: str) -> Tuple[Dict[int, int], np.ndarray]:
        if relative not in self._cache:
            indices, values = read_feature_file(self.base_dir / relative)
            expected = self.dims[modality]
            if expected is None:
                self.dims[modality] = values.shape[1]
                prep_logger.debug(f"{modality} feature dimension set to {values.shape[1]} by {relative}")
            elif values.shape[1] != expected:
                raise FeatureFileError(f"{relative}: {modality} dimension {values.shape[1]}, expected {expected}")
            self._cache[relative] = ({int(i): row for row, i in enumerate(indices)}, values)
        return self._cache[relative]

    def frames(self, seq: VideoSequence, modality: str) -> np.ndarray:
        """Матрица [T x D] признаков модальности в порядке кадров последовательности."""
        if modality not in MODALITIES:
            raise FeatureFileError(f"unknown modality {modality}")
        rows = []
        for frame in seq.frames:
            relative = frame.visual_path if modality == "visual" else frame.audio_path
            if relative is None:
                raise FeatureFileError(f"{seq.video_id}: frame {frame.frame_index} has no {modality} features")
            lookup, values = self._load(relative, modality)
            if frame.frame_index not in lookup:
                raise FeatureFileError(f"{relative}: no row for frame {frame.frame_index}")
            rows.append(values[lookup[frame.frame_index]])
        return np.stack(rows)

    def functional(self, seq: VideoSequence) -> np.ndarray:
        """Вектор функционалов видео: файл из одной строки, путь из аудио-колонки."""
        relative = seq.frames[0].audio_path
        if relative is None:
            raise FeatureFileError(f"{seq.video_id}: no audio functional file")
        _, values = self._load(relative, "audio")
        if values.shape[0] != 1:
            raise FeatureFileError(f"{relative}: functional file must hold a single row, got {values.shape[0]}")
        return values[0]
