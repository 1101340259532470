import argparse
from pathlib import Path
from typing import List

import numpy as np

from ensemble import FusionSpec, compute_class_weights, fuse, learn_fusion_regression, load_logs
from ensemble.fusion import METHODS
from evalcli.metrics import format_metrics, metrics, write_metrics_json
from evalcli.writers import write_prediction_log
from seqprep import dataset_stats, parse_manifest
from utils.errors import ConfigError, CoverageError
from utils.logger import fusion_logger

FUSED_LOG = "fused.log"
FUSED_METRICS = "fused_metrics.json"


def split_paths(text: str) -> List[str]:
    paths = [p.strip() for p in text.split(",") if p.strip()]
    if not paths:
        raise ConfigError("expected a comma-separated list of prediction logs")
    return paths


def add_parser(subparsers, parents) -> None:
    parser = subparsers.add_parser("fuse", parents=parents, help="late fusion of prediction logs")
    parser.add_argument("--method", type=int, required=True, choices=METHODS, help="fusion method 1..5")
    parser.add_argument("--logs", required=True, help="comma-separated prediction logs, one per model")
    parser.add_argument(
        "--weights-from",
        help="comma-separated labelled logs of the same models (e.g. validation) to take accuracies "
             "and regression weights from; default: the fused logs themselves",
    )
    parser.add_argument("--class-counts-manifest", help="training manifest for the class weights of method 4")
    parser.add_argument("--rescale", action="store_true", help="min-max rescale every logit vector to [0, 1]")
    parser.add_argument("--count-votes", action="store_true", help="method 3 counts argmax votes instead of summing logits")
    parser.add_argument("--folds", type=int, default=5, help="cross-validation folds of method 5")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    table = load_logs(split_paths(args.logs))
    source = load_logs(split_paths(args.weights_from)) if args.weights_from else table
    if source.model_count != table.model_count:
        raise CoverageError(f"--weights-from lists {source.model_count} logs, --logs lists {table.model_count}")

    spec_values = {"method": args.method, "rescale": args.rescale, "count_votes": args.count_votes}
    if args.class_counts_manifest:
        stats = dataset_stats(parse_manifest(args.class_counts_manifest, check_paths=False))
        spec_values["class_weights"] = compute_class_weights(stats.class_counts)
    try:
        spec = FusionSpec(**spec_values)
    except ValueError as e:
        raise ConfigError(str(e)) from None

    regression = None
    model_weights = None
    if spec.method == 5:
        regression = learn_fusion_regression(source, k=args.folds, rescale=spec.rescale)
        print(f"regression_cv_accuracy\t{regression.cv_accuracy:.4f}")
    elif spec.method in (1, 2, 4):
        model_weights = source.accuracy_vector()
        fusion_logger.info(f"Model weights: {np.round(model_weights, 4).tolist()}")

    records = fuse(table, spec, regression=regression, model_weights=model_weights)
    out = Path(args.out)
    print(f"fused\t{write_prediction_log(records, out / FUSED_LOG)}")
    if records and all(r.label is not None for r in records):
        report = metrics(records)
        write_metrics_json(report, out / FUSED_METRICS)
        print(format_metrics(report), end="")
    return 0
