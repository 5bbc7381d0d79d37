import logging

import numpy as np

from config.config_manager import RunConfig
from core.dynamics import resonance_amplitude, resonance_bound
from utils.exception import handle_command_errors
from utils.output import write_line_svg, write_resonance_csv
from utils.response import CommandResult
from .common import add_force_flags, shared_parser

logger = logging.getLogger(__name__)

NAME = "resonance"


def register(subparsers):
    parser = subparsers.add_parser(NAME, parents=[shared_parser()],
                                   help="envelope of the forced-oscillator translation under z = Z0 cos Ωt")
    add_force_flags(parser)
    parser.add_argument("--t-max", type=float, help="time horizon")
    parser.add_argument("--samples", type=int, help="number of envelope samples")
    parser.add_argument("--plot-out", help="SVG output path")
    parser.set_defaults(runner=run)


def envelope_slope(rows: list[tuple[float, float]]) -> float:
    """Least-squares slope over the last 90% of the samples."""
    start = len(rows) // 10
    ts, ys = zip(*rows[start:])
    slope, _ = np.polyfit(ts, ys, 1)
    return float(slope)


@handle_command_errors
def run(config: RunConfig) -> CommandResult:
    rows = resonance_amplitude(config.Omega, config.omega, config.Z0, config.t_max, config.samples)
    peak = max(e for _, e in rows)
    if config.Omega == config.omega:
        message = f"resonant drive: envelope slope {envelope_slope(rows):.6g} (Z0/2 = {config.Z0 / 2:.6g})"
    else:
        bound = resonance_bound(config.Omega, config.omega, config.Z0)
        message = f"bounded drive: max envelope {peak:.6g} <= {bound:.6g}"
    if config.out:
        write_resonance_csv(config.out, rows)
        message += f"; envelope written to {config.out}"
    if config.plot_out:
        ts, ys = zip(*rows)
        write_line_svg(config.plot_out, ts, ys, "t", "envelope",
                       f"Z0={config.Z0:g}, Ω={config.Omega:g}, ω={config.omega:g}")
        message += f"; plot written to {config.plot_out}"
    return CommandResult.success(data={"rows": rows, "peak": peak}, message=message)
