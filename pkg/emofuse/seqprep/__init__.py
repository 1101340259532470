from .manifest import parse_manifest, write_manifest
from .features import FeatureStore, read_feature_file, write_feature_file
from .align import align_dataset, align_modalities, clip_slot_count, read_clip_table
from .blocks import SequenceBlock, block_sequences, vector_block
from .stats import dataset_stats, format_stats
from .batching import Batch, batch_iterator, collate

__all__ = [
    "parse_manifest",
    "write_manifest",
    "FeatureStore",
    "read_feature_file",
    "write_feature_file",
    "align_dataset",
    "align_modalities",
    "clip_slot_count",
    "read_clip_table",
    "SequenceBlock",
    "block_sequences",
    "vector_block",
    "dataset_stats",
    "format_stats",
    "Batch",
    "batch_iterator",
    "collate",
]
