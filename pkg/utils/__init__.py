"""
Utility modules for pmech

Error hierarchy and exit codes, command results, and the CSV/SVG writers
(imported from utils.output directly, it depends on core).
"""

from .exception import PMechError, handle_command_errors, to_result
from .response import CommandResult

__all__ = [
    'PMechError',
    'CommandResult',
    'handle_command_errors',
    'to_result',
]
