from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Union

from models.config import ModelConfig
from models.records import VideoSequence
from seqprep import FeatureStore, SequenceBlock, block_sequences, parse_manifest, vector_block
from utils.errors import ShapeError
from utils.logger import prep_logger


@dataclass
class Dataset:
    sequences: List[VideoSequence]
    blocks: List[SequenceBlock]
    d_visual: Optional[int]
    d_audio: Optional[int]

    @property
    def video_count(self) -> int:
        return len(self.sequences)


def load_blocks(sequences: List[VideoSequence], store: FeatureStore, cfg: ModelConfig) -> List[SequenceBlock]:
    """Признаки нужных модальностей, нарезанные на блоки длины cfg.sequence_length."""
    blocks: List[SequenceBlock] = []
    for seq in sequences:
        if cfg.kind == "audio_ffn":
            blocks.append(vector_block(seq, store.functional(seq)))
            continue
        visual = store.frames(seq, "visual") if cfg.uses_visual else None
        audio = store.frames(seq, "audio") if cfg.uses_audio else None
        blocks.extend(block_sequences(seq, cfg.sequence_length, visual=visual, audio=audio))
    return blocks


def load_dataset(manifest: Union[str, Path], cfg: ModelConfig) -> Dataset:
    manifest = Path(manifest)
    sequences = parse_manifest(manifest)
    store = FeatureStore(manifest.parent)
    blocks = load_blocks(sequences, store, cfg)
    prep_logger.info(f"{manifest.name}: {len(sequences)} videos -> {len(blocks)} blocks")
    return Dataset(
        sequences=sequences,
        blocks=blocks,
        d_visual=store.dims["visual"],
        d_audio=store.dims["audio"],
    )


def check_same_dims(reference: Dataset, other: Dataset) -> None:
    for name in ("d_visual", "d_audio"):
        expected, got = getattr(reference, name), getattr(other, name)
        if other.blocks and expected != got:
            raise ShapeError(f"{name}: {got} vs {expected} in the training data")
