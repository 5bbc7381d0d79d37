import argparse
import logging
import os
import sys
from typing import Optional, Sequence

from commands import COMMANDS
from config.config_manager import ConfigManager
from utils.exception import handle_command_errors
from utils.response import CommandResult

logger = logging.getLogger(__name__)

# keys of the parsed namespace that are not run parameters
_CONTROL_KEYS = {"command", "config", "runner"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pmech", description="p-mechanics on the Heisenberg group")
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for module in COMMANDS:
        module.register(subparsers)
    return parser


def configure_logging(verbose: bool):
    debug = verbose or os.getenv('PMECH_DEBUG', 'False').lower() == 'true'
    logging.basicConfig(level=logging.DEBUG if debug else logging.INFO, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


@handle_command_errors
def execute(args: argparse.Namespace) -> CommandResult:
    manager = ConfigManager()
    if args.config:
        manager.load_file(args.config)
    overrides = {k: v for k, v in vars(args).items() if k not in _CONTROL_KEYS}
    config = manager.run_config(args.command, overrides)
    logger.debug(f"run config: {config.model_dump()}")
    return args.runner(config)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    configure_logging(bool(args.verbose))
    result = execute(args)
    if result.ok:
        if result.message:
            print(result.message)
    else:
        print(f"error: {result.message}", file=sys.stderr)
    return result.code


if __name__ == "__main__":
    sys.exit(main())
