from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from models.records import FrameRecord, VideoSequence
from utils.errors import ContractError, ShapeError


@dataclass(frozen=True)
class SequenceBlock:
    """
    Окно длины L из последовательности кадров видео. Кадры с t >= true_length
    являются копиями кадра true_length - 1; mask[t] == (t < true_length).
    """
    video_id: str
    block_index: int
    frames: Tuple[FrameRecord, ...]
    true_length: int
    label: int
    visual: Optional[np.ndarray] = None
    audio: Optional[np.ndarray] = None

    @property
    def length(self) -> int:
        return len(self.frames)

    @property
    def mask(self) -> np.ndarray:
        return np.arange(self.length) < self.true_length


def _pad_last(values: np.ndarray, length: int) -> np.ndarray:
    if len(values) == length:
        return values
    filler = np.repeat(values[-1:], length - len(values), axis=0)
    return np.concatenate([values, filler], axis=0)


def block_sequences(
    seq: VideoSequence,
    L: int,
    visual: Optional[np.ndarray] = None,
    audio: Optional[np.ndarray] = None,
) -> List[SequenceBlock]:
    """
    Режет видео на ceil(len / L) блоков длины L, последний неполный блок
    дополняется копиями своего последнего кадра.

    Args:
        seq: Видео
        L: Длина блока
        visual: Признаки [T x D_visual] в порядке кадров (необязательно)
        audio: Признаки [T x D_audio] в порядке кадров (необязательно)

    Returns:
        Блоки с block_index 0, 1, ...
    """
    if L < 1:
        raise ContractError(f"block length must be at least 1, got {L}")
    total = seq.true_length
    for name, values in (("visual", visual), ("audio", audio)):
        if values is not None and (values.ndim != 2 or values.shape[0] != total):
            raise ShapeError(f"{seq.video_id}: {name} features {values.shape} vs {total} frames")

    blocks = []
    for block_index, start in enumerate(range(0, total, L)):
        stop = min(start + L, total)
        frames = list(seq.frames[start:stop])
        true_length = len(frames)
        frames.extend([frames[-1]] * (L - true_length))
        blocks.append(
            SequenceBlock(
                video_id=seq.video_id,
                block_index=block_index,
                frames=tuple(frames),
                true_length=true_length,
                label=seq.label,
                visual=None if visual is None else _pad_last(visual[start:stop], L),
                audio=None if audio is None else _pad_last(audio[start:stop], L),
            )
        )
    return blocks


def vector_block(seq: VideoSequence, vector: np.ndarray) -> SequenceBlock:
    """Видео как один блок длины 1 с вектором функционалов в аудио-канале."""
    return SequenceBlock(
        video_id=seq.video_id,
        block_index=0,
        frames=(seq.frames[0],),
        true_length=1,
        label=seq.label,
        audio=np.asarray(vector, dtype=np.float64).reshape(1, -1),
    )
