import argparse
from pathlib import Path

from seqprep import FeatureStore, align_dataset, parse_manifest, read_clip_table, write_manifest
from utils.logger import prep_logger

ALIGNED_MANIFEST = "manifest.tsv"


def add_parser(subparsers, parents) -> None:
    parser = subparsers.add_parser("prep", parents=parents, help="validate a manifest and align audio clips")
    parser.add_argument("--manifest", required=True, help="visual frame manifest (TSV)")
    parser.add_argument("--clips", help="audio clip table: video_id<TAB>clip_index<TAB>audio_path")
    parser.add_argument("--check-features", action="store_true", help="read every feature row and check dimensions")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    manifest = Path(args.manifest)
    sequences = parse_manifest(manifest)

    if args.clips:
        sequences = align_dataset(sequences, read_clip_table(args.clips))
        out = write_manifest(sequences, Path(args.out) / ALIGNED_MANIFEST)
        print(f"aligned manifest\t{out}")

    if args.check_features:
        store = FeatureStore(manifest.parent)
        for seq in sequences:
            store.frames(seq, "visual")
            if seq.has_audio:
                store.frames(seq, "audio")
        for modality, dim in store.dims.items():
            print(f"{modality} dimension\t{'-' if dim is None else dim}")

    prep_logger.info(f"Prepared {len(sequences)} videos from {manifest}")
    print(f"videos\t{len(sequences)}")
    print(f"frames\t{sum(s.true_length for s in sequences)}")
    return 0
