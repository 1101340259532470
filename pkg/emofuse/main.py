import argparse
import sys
from typing import List, Optional

from handlers import evaluate, fuse, prep, stats, submit, train
from models.config import config_keys_help
from utils.errors import EmoFuseError
from utils.logger import toolkit_logger
from utils.settings import DEFAULT_OUT, DEFAULT_SEED

SUBCOMMANDS = (prep, train, evaluate, fuse, submit, stats)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"run seed (default {DEFAULT_SEED}, EMOFUSE_SEED)")
    common.add_argument("--config", help="run configuration file (key = value)")
    common.add_argument("--out", default=DEFAULT_OUT, help=f"output directory (default {DEFAULT_OUT}, EMOFUSE_OUT)")

    parser = argparse.ArgumentParser(
        prog="emofuse",
        description="Multimodal emotion sequence classification: prepare, train, evaluate, fuse, submit.",
        epilog=config_keys_help(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    subparsers = parser.add_subparsers(dest="command", metavar="{prep,train,eval,fuse,submit,stats}")
    subparsers.required = True
    for module in SUBCOMMANDS:
        module.add_parser(subparsers, [common])
    return parser


def cli_main(argv: Optional[List[str]] = None) -> int:
    """
    Args:
        argv: Аргументы без имени программы (None - sys.argv[1:])

    Returns:
        0 - успех, 1 - ошибка тулкита, 2 - ошибка использования
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    try:
        return args.handler(args)
    except (EmoFuseError, OSError, UnicodeError) as e:
        message = " ".join(str(e).split("\n")).strip()
        toolkit_logger.error(f"{args.command} failed: {message}")
        print(f"error: {message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(cli_main())
