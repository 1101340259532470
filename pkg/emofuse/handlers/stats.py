import argparse

from seqprep import dataset_stats, format_stats, parse_manifest
from utils.logger import toolkit_logger


def add_parser(subparsers, parents) -> None:
    parser = subparsers.add_parser("stats", parents=parents, help="class counts and sequence-length histogram")
    parser.add_argument("--manifest", required=True, help="frame manifest (TSV)")
    parser.add_argument("--bucket-width", type=int, default=1, help="histogram bucket width in frames")
    parser.add_argument("--no-check-paths", action="store_true", help="do not require feature files to exist")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    sequences = parse_manifest(args.manifest, check_paths=not args.no_check_paths)
    stats = dataset_stats(sequences, bucket_width=args.bucket_width)
    toolkit_logger.info(f"Stats for {args.manifest}: {stats.total_videos} videos, {stats.total_frames} frames")
    print(format_stats(stats), end="")
    return 0
