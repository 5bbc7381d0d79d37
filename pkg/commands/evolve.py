import logging
import math

from config.config_manager import HamiltonianKind, RunConfig
from core.dynamics import (ForceProfile, Trajectory, forced_flow, hamiltonian_forced, ho_flow,
                           integrate_bracket_ode, max_coefficient_error)
from core.symbols import Symbol, hamiltonian_ho
from utils.exception import handle_command_errors
from utils.output import write_trajectory_csv
from utils.response import CommandResult
from .common import add_force_flags, parse_observable, shared_parser

logger = logging.getLogger(__name__)

NAME = "evolve"


def register(subparsers):
    parser = subparsers.add_parser(NAME, parents=[shared_parser()],
                                   help="evolve an observable under the oscillator or forced oscillator")
    parser.add_argument("symbol", help="observable text, e.g. 'q'")
    parser.add_argument("--hamiltonian", choices=[k.value for k in HamiltonianKind])
    parser.add_argument("--t0", type=float, help="start time")
    parser.add_argument("--t1", type=float, help="end time")
    parser.add_argument("--dt", type=float, help="sampling interval of the trajectory")
    parser.add_argument("--max-step", type=float, help="largest internal RK4 step")
    parser.add_argument("--closed-form", action="store_true", default=None,
                        help="write the closed-form flow instead of the RK4 trajectory")
    parser.add_argument("--degree-cap", type=int, help="largest (q,p)-degree the bracket ODE may reach")
    add_force_flags(parser)
    parser.set_defaults(runner=run)


def force_profile(config: RunConfig) -> ForceProfile:
    if config.hamiltonian is HamiltonianKind.FORCED and config.Z0:
        return ForceProfile.periodic(config.Z0, config.Omega)
    return ForceProfile.zero()


def sampling(config: RunConfig) -> tuple[int, int, float]:
    """(sample intervals, RK4 steps per interval, RK4 step) covering [t0, t1]."""
    span = config.t1 - config.t0
    intervals = max(1, math.ceil(span / config.dt - 1e-9))
    substeps = max(1, math.ceil(span / intervals / config.max_step - 1e-9))
    return intervals, substeps, span / (intervals * substeps)


def closed_form(f: Symbol, config: RunConfig, z: ForceProfile, t: float) -> Symbol:
    if z.is_zero:
        return ho_flow(f, t - config.t0, config.m, config.omega)
    return forced_flow(f, t, config.m, config.omega, z, t0=config.t0)


@handle_command_errors
def run(config: RunConfig) -> CommandResult:
    f = parse_observable(config.symbol)
    z = force_profile(config)
    H = hamiltonian_ho(config.m, config.omega) if z.is_zero else hamiltonian_forced(config.m, config.omega, z)
    intervals, substeps, step = sampling(config)
    logger.info(f"evolving {f} under {config.hamiltonian.value}: {intervals} samples, RK4 step {step:.3e}")

    numeric = integrate_bracket_ode(f, H, (config.t0, config.t1), step, config.degree_cap, record_every=substeps)
    # sample times as t0 + i·Δ so that quarter periods land on exact trig values
    interval = (config.t1 - config.t0) / intervals
    times = tuple(config.t0 + i * interval for i in range(intervals + 1))
    numeric = Trajectory(times, numeric.payloads)
    exact = Trajectory(times, tuple(closed_form(f, config, z, t) for t in times))
    difference = max(max_coefficient_error(a, b) for a, b in zip(numeric.payloads, exact.payloads))

    trajectory = exact if config.closed_form else numeric
    message = f"final: {trajectory.final}; max |rk4 - closed form| = {difference:.3e}"
    if config.out:
        write_trajectory_csv(config.out, trajectory)
        message += f"; trajectory written to {config.out}"
    return CommandResult.success(data={"trajectory": trajectory, "max_difference": difference}, message=message)
