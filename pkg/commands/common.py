import argparse
import logging
from typing import Optional

from config.config_manager import RunConfig
from core.fock import PhaseGrid, default_grid, make_grid
from core.parser import parse_symbol
from core.symbols import PlanckParameter, Symbol
from utils.exception import PreconditionError

logger = logging.getLogger(__name__)


def shared_parser() -> argparse.ArgumentParser:
    """Flags every command accepts; defaults are None so config files can fill them in."""
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", help="key=value or YAML file; flags override its values")
    parent.add_argument("--verbose", action="store_true", default=None, help="debug logging")
    parent.add_argument("--h", type=float, help="Planck constant h >= 0")
    parent.add_argument("--m", type=float, help="mass m > 0")
    parent.add_argument("--omega", type=float, help="frequency ω > 0")
    parent.add_argument("--grid-n", type=int, help="grid points per axis, a power of two >= 64")
    parent.add_argument("--grid-L", type=float, help="grid half-width L > 0")
    parent.add_argument("--out", help="CSV output path")
    parent.add_argument("--workers", type=int, help="threads for sweeps")
    return parent


def add_force_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--Z0", type=float, help="force amplitude (ML/T²)")
    parser.add_argument("--Omega", type=float, help="force frequency Ω > 0")


def planck_of(config: RunConfig) -> PlanckParameter:
    return PlanckParameter(config.h)


def require_text(value: Optional[str], what: str) -> str:
    if value is None or not value.strip():
        raise PreconditionError(f"missing {what}")
    return value


def parse_observable(text: Optional[str], what: str = "observable") -> Symbol:
    return parse_symbol(require_text(text, what))


def phase_grid(config: RunConfig, planck: PlanckParameter, shift: float = 0.0) -> PhaseGrid:
    if config.grid_L is not None:
        return make_grid(config.grid_n, config.grid_L)
    grid = default_grid(planck, config.m, config.omega, shift, n_points=config.grid_n)
    logger.debug(f"default grid: n={grid.n_points}, L={grid.half_width}")
    return grid
