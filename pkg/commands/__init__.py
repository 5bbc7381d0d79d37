"""
Command-line commands

One module per command; each exposes NAME, register(subparsers) and run(config).
"""

from . import bracket, evolve, limit_scan, quantize, resonance

COMMANDS = [bracket, quantize, evolve, limit_scan, resonance]

__all__ = [
    'COMMANDS',
    'bracket',
    'quantize',
    'evolve',
    'limit_scan',
    'resonance',
]
