"""
States as kernels on H^1: coherent-state kernels, (q,p)-pure states, mixtures,
and their exact pairing with symbol observables.
"""
from __future__ import annotations

import cmath
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional, Sequence, Union

import numpy as np
from sympy.polys.domains import QQ_I
from sympy.polys.rings import PolyElement, ring

from utils.exception import DimensionMismatchError, LineageError, PreconditionError
from .fock import StateVector, inner, represent
from .heisenberg import GroupElement, SymplecticMatrix
from .symbols import (PlanckParameter, Provenance, Symbol, gaussian_to_complex, to_fraction,
                      to_gaussian)

logger = logging.getLogger(__name__)

Matrix2 = tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]


@lru_cache(maxsize=None)
def hbar_ring():
    return ring("hbar", QQ_I)[0]


def _positive(name: str, value) -> Fraction:
    if not value > 0:
        raise PreconditionError(f"{name} must be positive, got {value}")
    return to_fraction(value)


def coherent_shape(m, omega) -> Matrix2:
    mw = _positive("m", m) * _positive("omega", omega)
    return ((1 / mw, Fraction(0)), (Fraction(0), mw))


@dataclass(frozen=True)
class GaussianKernel:
    """
    l(s,x,y) = exp(−2πi(q0·x + p0·y) − 2πihs − (πh/2)·zᵀDz), z = (x, y).

    D defaults to diag(1/(mω), mω), the coherent-state shape. Centre and shape
    are stored as exact rationals.
    """
    planck: PlanckParameter
    q0: Fraction
    p0: Fraction
    m: Fraction = Fraction(1)
    omega: Fraction = Fraction(1)
    shape: Optional[Matrix2] = None

    def __post_init__(self):
        object.__setattr__(self, "q0", to_fraction(self.q0))
        object.__setattr__(self, "p0", to_fraction(self.p0))
        object.__setattr__(self, "m", _positive("m", self.m))
        object.__setattr__(self, "omega", _positive("omega", self.omega))
        if self.shape is not None:
            shape = tuple(tuple(to_fraction(v) for v in row) for row in self.shape)
            if len(shape) != 2 or any(len(row) != 2 for row in shape) or shape[0][1] != shape[1][0]:
                raise PreconditionError("kernel shape must be a symmetric 2x2 matrix")
            object.__setattr__(self, "shape", None if shape == coherent_shape(self.m, self.omega) else shape)

    @property
    def h(self) -> float:
        return self.planck.h

    @property
    def center(self) -> tuple[Fraction, Fraction]:
        return self.q0, self.p0

    @property
    def quadratic_form(self) -> Matrix2:
        return self.shape if self.shape is not None else coherent_shape(self.m, self.omega)

    @property
    def is_coherent(self) -> bool:
        return self.shape is None

    @property
    def is_pure_classical(self) -> bool:
        return self.planck.h == 0

    def covariance(self) -> Matrix2:
        """Covariance of the (q, p) moments in units of ħ: C = D/2, so that Cov = ħ·C."""
        D = self.quadratic_form
        return tuple(tuple(v / 2 for v in row) for row in D)

    def __call__(self, s: float, x: float, y: float) -> complex:
        D = self.quadratic_form
        h = self.planck.h
        quad = float(D[0][0]) * x * x + 2 * float(D[0][1]) * x * y + float(D[1][1]) * y * y
        return cmath.exp(-2j * math.pi * (float(self.q0) * x + float(self.p0) * y)
                         - 2j * math.pi * h * s - (math.pi * h / 2) * quad)

    def moved(self, q0, p0, shape: Optional[Matrix2] = None) -> "GaussianKernel":
        return GaussianKernel(self.planck, q0, p0, self.m, self.omega, shape)


def coherent_kernel(planck: PlanckParameter, q0, p0, m=1, omega=1) -> GaussianKernel:
    return GaussianKernel(planck, q0, p0, m, omega)


def kernel_value(k: GaussianKernel, g: GroupElement) -> complex:
    if g.n != 1:
        raise DimensionMismatchError("kernels live on H^1")
    return k(float(g.s), float(g.x[0]), float(g.y[0]))


def transform_kernel(A: SymplecticMatrix, k: GaussianKernel) -> GaussianKernel:
    """Kernel composed with the automorphism A: centre Aᵀ(q0,p0), shape AᵀDA."""
    if A.n != 1:
        raise DimensionMismatchError("kernels live on H^1")
    a = A.entries
    q0, p0 = A.apply_transpose((k.q0, k.p0))
    D = k.quadratic_form
    # (AᵀDA)_ij = Σ_kl A_ki D_kl A_lj
    shape = tuple(tuple(sum(a[r][i] * D[r][c] * a[c][j] for r in range(2) for c in range(2))
                        for j in range(2)) for i in range(2))
    return k.moved(q0, p0, shape)


@dataclass(frozen=True)
class StateFunctional:
    """Finite combination Σ w_j·k_j of Gaussian kernels; a pure state has one unit-weight term."""
    components: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if not self.components:
            raise PreconditionError("a state needs at least one kernel")

    @classmethod
    def pure(cls, kernel: GaussianKernel) -> "StateFunctional":
        return cls(((1.0, kernel),))

    @property
    def kernels(self) -> list[GaussianKernel]:
        return [k for _, k in self.components]


def mixed_state(pairs: Iterable[tuple[complex, GaussianKernel]]) -> StateFunctional:
    return StateFunctional(tuple((complex(w), k) for w, k in pairs))


def gaussian_moments(k: GaussianKernel, max_a: int, max_b: int) -> list[list[PolyElement]]:
    """
    M[a][b] = E[q^a p^b] as exact polynomials in ħ, by the Gaussian (Stein) recurrence

        M(a+1, b) = μ_q M(a,b) + a·C_qq M(a−1,b) + b·C_qp M(a,b−1)
        M(a, b+1) = μ_p M(a,b) + a·C_qp M(a−1,b) + b·C_pp M(a,b−1)

    which is the signed differentiation of the kernel at the origin.
    """
    R = hbar_ring()
    hbar = R.gens[0]
    C = k.covariance()
    cqq, cqp, cpp = (hbar.mul_ground(to_gaussian(C[0][0])), hbar.mul_ground(to_gaussian(C[0][1])),
                     hbar.mul_ground(to_gaussian(C[1][1])))
    mq, mp = to_gaussian(k.q0), to_gaussian(k.p0)
    M = [[R.zero] * (max_b + 1) for _ in range(max_a + 1)]
    M[0][0] = R.one
    for a in range(max_a + 1):
        for b in range(max_b + 1):
            if a == b == 0:
                continue
            if a:
                # raise q from (a−1, b)
                value = M[a - 1][b].mul_ground(mq)
                if a > 1:
                    value = value + cqq * M[a - 2][b].mul_ground(to_gaussian(a - 1))
                if b:
                    value = value + cqp * M[a - 1][b - 1].mul_ground(to_gaussian(b))
            else:
                value = M[a][b - 1].mul_ground(mp)
                if b > 1:
                    value = value + cpp * M[a][b - 2].mul_ground(to_gaussian(b - 1))
            M[a][b] = value
    return M


def _require_lineage(B: Symbol):
    if B.provenance.origin is Provenance.RAW:
        raise LineageError(
            "symbol has no distributional lineage; build it with pmechanise or the ladder constructions"
        )
    if B.n != 1:
        raise DimensionMismatchError("kernels live on H^1")


def pair_exact(k: GaussianKernel, B: Symbol) -> PolyElement:
    """∫ B l dg as an exact polynomial in ħ."""
    _require_lineage(B)
    R = hbar_ring()
    hbar = R.gens[0]
    if B.is_zero:
        return R.zero
    max_a = max(m[1] for m in B.poly.keys())
    max_b = max(m[2] for m in B.poly.keys())
    M = gaussian_moments(k, max_a, max_b)
    total = R.zero
    for (power, a, b), coeff in B.poly.items():
        total = total + (M[a][b] * hbar ** power).mul_ground(coeff)
    return total


def _evaluate_hbar_poly(poly: PolyElement, hbar: float) -> complex:
    return sum((gaussian_to_complex(c) * hbar ** m[0] for m, c in poly.items()), 0j)


def eval_state(state: Union[StateFunctional, GaussianKernel], B: Symbol) -> complex:
    if isinstance(state, GaussianKernel):
        state = StateFunctional.pure(state)
    total = 0j
    for weight, kernel in state.components:
        total += weight * _evaluate_hbar_poly(pair_exact(kernel, B), kernel.planck.hbar)
    return total


@dataclass(frozen=True)
class ScanRow:
    h: float
    value: complex
    classical_value: complex
    abs_error: float


def classical_limit_scan(B: Symbol, q0, p0, m, omega, h_list: Sequence[float],
                         workers: Optional[int] = None) -> list[ScanRow]:
    """Coherent expectations of B at each h next to the classical value F(q0, p0)."""
    if not h_list:
        raise PreconditionError("classical_limit_scan needs a non-empty h list")
    if B.provenance.origin is not Provenance.CLASSICAL:
        raise LineageError("classical_limit_scan expects a p-mechanised classical observable")
    classical_exact = B.evaluate_exact(to_fraction(q0), to_fraction(p0))
    classical = gaussian_to_complex(classical_exact)

    def row(h: float) -> ScanRow:
        planck = PlanckParameter(float(h))
        kernel = coherent_kernel(planck, q0, p0, m, omega)
        poly = pair_exact(kernel, B)
        # subtract the classical value exactly before evaluating at ħ
        deviation = poly - poly.ring.ground_new(classical_exact)
        value = _evaluate_hbar_poly(poly, planck.hbar)
        error = abs(_evaluate_hbar_poly(deviation, planck.hbar))
        logger.debug(f"limit scan h={h}: value={value}, error={error}")
        return ScanRow(planck.h, value, classical, error)

    # map keeps input order regardless of completion order
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(row, h_list))


def fitted_error_order(rows: Sequence[ScanRow]) -> Optional[float]:
    """Slope of log(error) against log(h) over rows with h > 0 and error > 0."""
    points = [(math.log(r.h), math.log(r.abs_error)) for r in rows if r.h > 0 and r.abs_error > 0]
    if len(points) < 2:
        return None
    xs, ys = zip(*points)
    slope, _ = np.polyfit(xs, ys, 1)
    return float(slope)


def kernel_from_vector(v: StateVector, points: Sequence) -> np.ndarray:
    """⟨ρ_h(g) v, v⟩ at each group point, by grid quadrature."""
    out = np.empty(len(points), dtype=complex)
    for i, g in enumerate(points):
        if not isinstance(g, GroupElement):
            g = GroupElement.from_values(*g)
        out[i] = inner(represent(g, v), v)
    return out


__all__ = [
    'GaussianKernel', 'StateFunctional', 'ScanRow', 'coherent_kernel', 'coherent_shape',
    'kernel_value', 'transform_kernel', 'mixed_state', 'gaussian_moments', 'pair_exact',
    'eval_state', 'classical_limit_scan', 'fitted_error_order', 'kernel_from_vector',
]
