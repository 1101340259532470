import argparse

from models.config import load_run_config
from pipelines.train import train_pipeline
from utils.errors import ConfigError
from utils.logger import toolkit_logger


def add_parser(subparsers, parents) -> None:
    parser = subparsers.add_parser("train", parents=parents, help="train a pipeline from a run config")
    parser.add_argument("--train", required=True, help="training manifest")
    parser.add_argument("--valid", help="validation manifest (accuracy and macro F1 logged per epoch)")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    if not args.config:
        raise ConfigError("train needs --config")
    cfg = load_run_config(args.config)
    toolkit_logger.info(f"Training {cfg.kind} with seed {args.seed} into {args.out}")
    run = train_pipeline(cfg, args.train, args.valid, seed=args.seed, out_dir=args.out)
    last = run.history[-1]
    print(f"checkpoint\t{run.checkpoint_path}")
    print(f"history\t{run.history_path}")
    print(f"epochs\t{last.epoch}")
    print(f"train_accuracy\t{last.train_accuracy:.4f}")
    if run.validation_accuracy:
        print(f"valid_accuracy\t{run.validation_accuracy[-1]:.4f}")
    return 0
