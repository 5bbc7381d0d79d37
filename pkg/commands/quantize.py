import logging

from config.config_manager import RunConfig
from core.fock import inner, quantize, vacuum
from utils.exception import PreconditionError, handle_command_errors
from utils.output import write_state_csv
from utils.response import CommandResult
from .common import parse_observable, phase_grid, planck_of, shared_parser

logger = logging.getLogger(__name__)

NAME = "quantize"


def register(subparsers):
    parser = subparsers.add_parser(NAME, parents=[shared_parser()],
                                   help="apply the Weyl quantisation of a symbol to the vacuum")
    parser.add_argument("symbol", help="symbol text, e.g. 'q*p'")
    parser.set_defaults(runner=run)


@handle_command_errors
def run(config: RunConfig) -> CommandResult:
    f = parse_observable(config.symbol, "symbol")
    planck = planck_of(config)
    if planck.is_classical:
        raise PreconditionError("quantisation requires h > 0")
    grid = phase_grid(config, planck)
    f0 = vacuum(grid, planck, config.m, config.omega)
    image = quantize(f, planck, grid).apply(f0).check_containment("quantised vector")
    expectation = inner(image, f0) / inner(f0, f0)
    message = f"<f0, op f0>/<f0, f0> = {expectation.real:.17g} {expectation.imag:+.17g}i on a {grid.n_points}² grid"
    if config.out:
        write_state_csv(config.out, image)
        message += f"; samples written to {config.out}"
    return CommandResult.success(data={"vector": image, "expectation": expectation}, message=message)
