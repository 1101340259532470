import argparse

from evalcli.metrics import format_metrics
from pipelines.evaluate import evaluate_pipeline


def add_parser(subparsers, parents) -> None:
    parser = subparsers.add_parser("eval", parents=parents, help="evaluate a checkpoint on a manifest")
    parser.add_argument("--checkpoint", required=True, help="model.ckpt written by train")
    parser.add_argument("--manifest", required=True, help="manifest of the videos to evaluate")
    parser.add_argument("--unlabelled", action="store_true", help="labels are placeholders (test split)")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    result = evaluate_pipeline(args.checkpoint, args.manifest, out_dir=args.out, labelled=not args.unlabelled)
    print(f"predictions\t{result.predictions_path}")
    if result.report is not None:
        print(f"metrics\t{result.metrics_path}")
        print(format_metrics(result.report), end="")
    return 0
