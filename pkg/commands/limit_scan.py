import logging

from config.config_manager import RunConfig
from core.states import classical_limit_scan, fitted_error_order
from core.symbols import pmechanise
from utils.exception import handle_command_errors
from utils.output import write_scan_csv
from utils.response import CommandResult
from .common import parse_observable, shared_parser

logger = logging.getLogger(__name__)

NAME = "limit-scan"


def register(subparsers):
    parser = subparsers.add_parser(NAME, parents=[shared_parser()],
                                   help="coherent-state expectations against the classical value as h shrinks")
    parser.add_argument("symbol", help="classical observable, e.g. '1/2*q^2 + 1/2*p^2'")
    parser.add_argument("--q0", type=float, help="coherent state centre q")
    parser.add_argument("--p0", type=float, help="coherent state centre p")
    parser.add_argument("--h-list", help="comma-separated h values, e.g. 1,0.5,0.25")
    parser.set_defaults(runner=run)


@handle_command_errors
def run(config: RunConfig) -> CommandResult:
    B = pmechanise(parse_observable(config.symbol))
    rows = classical_limit_scan(B, config.q0, config.p0, config.m, config.omega, config.h_list, config.workers)
    order = fitted_error_order(rows)
    lines = [f"h={r.h:.17g} value={r.value.real:.17g} classical={r.classical_value.real:.17g} "
             f"error={r.abs_error:.17g}" for r in rows]
    lines.append("fitted error order in h: " + ("n/a" if order is None else f"{order:.6f}"))
    if config.out:
        write_scan_csv(config.out, rows)
        lines.append(f"scan written to {config.out}")
    return CommandResult.success(data={"rows": rows, "order": order}, message="\n".join(lines))
