import logging

from config.config_manager import RunConfig
from core.parser import format_symbol
from core.symbols import pbracket
from utils.exception import handle_command_errors
from utils.response import CommandResult
from .common import parse_observable, shared_parser

logger = logging.getLogger(__name__)

NAME = "bracket"


def register(subparsers):
    parser = subparsers.add_parser(NAME, parents=[shared_parser()], help="print the p-mechanical bracket {[f, g]}")
    parser.add_argument("f", help="first symbol, e.g. 'q^3'")
    parser.add_argument("g", help="second symbol, e.g. 'p^3'")
    parser.set_defaults(runner=run)


@handle_command_errors
def run(config: RunConfig) -> CommandResult:
    f = parse_observable(config.f, "first symbol")
    g = parse_observable(config.g, "second symbol")
    result = pbracket(f, g)
    logger.debug(f"bracket of {f} and {g}: {len(result.poly)} terms")
    return CommandResult.success(data={"bracket": result}, message=format_symbol(result))
