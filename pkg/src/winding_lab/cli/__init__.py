"""winding-lab 命令行"""

from argparse import ArgumentParser
from collections.abc import Sequence
import sys

from loguru import logger

from .. import __version__
from ..exception import ConfigException, LabException
from ..utils import configure_logging
from .base import BaseCommand as BaseCommand
from .commands import print_group_info as print_group_info
from .experiments import run as run

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="winding-lab", description="Brownian and geodesic winding experiments on Γ\\G")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="stderr log level, defaults to the config value or INFO")
    sub = parser.add_subparsers(dest="command", required=True)
    for cls in BaseCommand.get_all_subclass():
        cmd = sub.add_parser(cls.name, help=cls.help)
        cls.add_arguments(cmd)
        cmd.set_defaults(command_cls=cls)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level or "INFO")
    try:
        return args.command_cls().execute(args)
    except ConfigException as e:
        logger.error(e.message)
        return EXIT_CONFIG
    except LabException as e:
        logger.error(e.message)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
