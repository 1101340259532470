from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence

import numpy as np

from seqprep.blocks import SequenceBlock
from utils.errors import ContractError, ShapeError


@dataclass(frozen=True)
class Batch:
    visual: Optional[np.ndarray]
    audio: Optional[np.ndarray]
    lengths: np.ndarray
    labels: np.ndarray
    video_ids: List[str]
    block_indices: List[int]

    @property
    def size(self) -> int:
        return len(self.video_ids)

    @property
    def mask(self) -> np.ndarray:
        """[B x L]: True для настоящих кадров."""
        steps = (self.visual if self.visual is not None else self.audio).shape[1]
        return np.arange(steps)[None, :] < self.lengths[:, None]


def _stack(blocks: Sequence[SequenceBlock], modality: str) -> Optional[np.ndarray]:
    arrays = [getattr(b, modality) for b in blocks]
    present = [a is not None for a in arrays]
    if not any(present):
        return None
    if not all(present):
        raise ShapeError(f"{modality} features present for some blocks only")
    return np.stack(arrays)


def collate(blocks: Sequence[SequenceBlock]) -> Batch:
    return Batch(
        visual=_stack(blocks, "visual"),
        audio=_stack(blocks, "audio"),
        lengths=np.array([b.true_length for b in blocks], dtype=np.int64),
        labels=np.array([b.label for b in blocks], dtype=np.int64),
        video_ids=[b.video_id for b in blocks],
        block_indices=[b.block_index for b in blocks],
    )


def check_block_shapes(blocks: Sequence[SequenceBlock]) -> None:
    """Все блоки обязаны иметь одинаковые L и D каждой модальности."""
    if not blocks:
        return
    reference = blocks[0]
    for block in blocks[1:]:
        for modality in ("visual", "audio"):
            ref, cur = getattr(reference, modality), getattr(block, modality)
            ref_shape = None if ref is None else ref.shape
            cur_shape = None if cur is None else cur.shape
            if ref_shape != cur_shape:
                raise ShapeError(
                    f"{block.video_id}/{block.block_index}: {modality} shape {cur_shape}, expected {ref_shape}"
                )


def batch_iterator(
    blocks: Sequence[SequenceBlock],
    batch_size: int,
    shuffle: bool = False,
    seed: Optional[int] = None,
) -> Iterator[Batch]:
    """
    Args:
        blocks: Блоки одной длины L
        batch_size: Размер батча; последний батч может быть короче
        shuffle: Перемешивать порядок блоков
        seed: Сид перестановки, одинаковый сид - одинаковый порядок

    Returns:
        Поток батчей
    """
    if batch_size < 1:
        raise ContractError(f"batch size must be at least 1, got {batch_size}")
    check_block_shapes(blocks)
    order = np.arange(len(blocks))
    if shuffle:
        order = np.random.default_rng(seed).permutation(len(blocks))
    for start in range(0, len(blocks), batch_size):
        yield collate([blocks[i] for i in order[start:start + batch_size]])
