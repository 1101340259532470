import argparse

from evalcli.writers import read_prediction_log, write_submission
from utils.logger import eval_logger


def add_parser(subparsers, parents) -> None:
    parser = subparsers.add_parser("submit", parents=parents, help="one <sample_id>.txt label file per prediction")
    parser.add_argument("--log", required=True, help="prediction log (usually the fused one)")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    records = read_prediction_log(args.log)
    paths = write_submission(records, args.out)
    eval_logger.info(f"Wrote {len(paths)} submission files to {args.out}")
    print(f"files\t{len(paths)}")
    return 0
