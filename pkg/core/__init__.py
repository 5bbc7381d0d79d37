"""
Core p-mechanics modules

This package contains the Heisenberg group, the symbol calculus, the Fock
space backend, states as kernels and the time evolution.
"""

from .heisenberg import GroupElement, SymplecticMatrix, AdjointPoint, multiply, inverse
from .symbols import PlanckParameter, Symbol, star, pbracket, ladder, pmechanise, symplectic_pullback
from .parser import parse_symbol, format_symbol
from .fock import PhaseGrid, StateVector, quantize, vacuum, coherent_vector
from .states import GaussianKernel, StateFunctional, eval_state, classical_limit_scan
from .dynamics import ForceProfile, Trajectory, ho_flow, forced_flow, integrate_bracket_ode

__all__ = [
    'GroupElement',
    'SymplecticMatrix',
    'AdjointPoint',
    'multiply',
    'inverse',
    'PlanckParameter',
    'Symbol',
    'star',
    'pbracket',
    'ladder',
    'pmechanise',
    'symplectic_pullback',
    'parse_symbol',
    'format_symbol',
    'PhaseGrid',
    'StateVector',
    'quantize',
    'vacuum',
    'coherent_vector',
    'GaussianKernel',
    'StateFunctional',
    'eval_state',
    'classical_limit_scan',
    'ForceProfile',
    'Trajectory',
    'ho_flow',
    'forced_flow',
    'integrate_bracket_ode',
]
