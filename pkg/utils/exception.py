import functools
import logging
import os
import traceback

from pydantic import ValidationError

from .response import CommandResult

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_CLOSURE = 4


class PMechError(Exception):
    """Base class for every error raised by the library."""
    exit_code = 1


class UsageError(PMechError):
    exit_code = EXIT_USAGE


class SymbolParseError(UsageError, ValueError):
    """Malformed expression text; ``offset`` is the 0-based position of the failure."""

    def __init__(self, message: str, text: str = "", offset: int = 0):
        self.text = text
        self.offset = offset
        super().__init__(f"{message} at offset {offset}")


class UnknownVariableError(SymbolParseError):
    pass


class NonIntegerExponentError(SymbolParseError):
    pass


class DimensionMismatchError(UsageError, ValueError):
    pass


class NotSymplecticError(UsageError, ValueError):
    pass


class LineageError(UsageError, ValueError):
    """Symbol has no distributional lineage and cannot be paired with a state."""


class PreconditionError(UsageError, ValueError):
    pass


class NumericPreconditionError(PMechError, ValueError):
    exit_code = EXIT_NUMERIC


class ContainmentError(NumericPreconditionError):
    """Samples do not decay below the boundary tolerance on the grid."""


class QuadratureError(NumericPreconditionError):
    pass


class ClosureError(PMechError):
    exit_code = EXIT_CLOSURE


class DegreeCapExceeded(ClosureError):
    pass


def _debug_enabled() -> bool:
    return os.getenv('PMECH_DEBUG', 'False').lower() == 'true'


def to_result(exc: Exception) -> CommandResult:
    """全局异常处理: map an exception to a CommandResult with its exit code"""
    if isinstance(exc, ValidationError):
        message = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}" for err in exc.errors()
        )
        return CommandResult.error(message=f"invalid configuration: {message}", code=EXIT_USAGE)
    if isinstance(exc, PMechError):
        return CommandResult.error(message=str(exc), code=exc.exit_code)
    error_msg = str(exc)
    error_traceback = traceback.format_exc()
    logger.error(f"未处理的异常: {error_msg}")
    if _debug_enabled():
        error_msg = f"{error_msg}\n\n堆栈跟踪:\n{error_traceback}"
    return CommandResult.error(message=error_msg, code=1)


def handle_command_errors(func):
    """Decorator for command runners: exceptions become CommandResults instead of escaping."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs) -> CommandResult:
        try:
            return func(*args, **kwargs)
        except (PMechError, ValidationError) as exc:
            logger.error(f"{type(exc).__name__}: {exc}")
            if _debug_enabled():
                logger.error(f"异常堆栈: {traceback.format_exc()}")
            return to_result(exc)
        except Exception as exc:
            return to_result(exc)

    return wrapper
