"""
Fock-type spaces F²(O_h) sampled on a square (q, p) grid.

Derivatives are spectral (FFT on the periodic box), which is accurate as long
as every vector decays below the containment tolerance at the boundary and its
spectrum decays below e^-SPECTRAL_TAIL before the Nyquist wavenumber.
"""
from __future__ import annotations

import enum
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence, Union

import numpy as np

from utils.exception import ContainmentError, DimensionMismatchError, PreconditionError
from .heisenberg import GroupElement
from .symbols import LadderKind, PlanckParameter, Symbol, ladder

logger = logging.getLogger(__name__)

CONTAINMENT_TOLERANCE = 1e-12
# spectra count as resolved once they fall below e^-SPECTRAL_TAIL of their peak
SPECTRAL_TAIL = 25.0
DEFAULT_POINTS = 256
MAX_POINTS = 4096


class Axis(str, enum.Enum):
    Q = "q"
    P = "p"

    @property
    def index(self) -> int:
        return 0 if self is Axis.Q else 1


@dataclass(frozen=True)
class PhaseGrid:
    """n_points² nodes q_j = −L + jΔ (and likewise p), Δ = 2L/n_points; axis 0 is q, axis 1 is p."""
    n_points: int
    half_width: float

    def __post_init__(self):
        if not isinstance(self.n_points, (int, np.integer)) or self.n_points < 64 \
                or self.n_points & (self.n_points - 1):
            raise PreconditionError(f"grid size must be a power of two >= 64, got {self.n_points}")
        if not self.half_width > 0 or not math.isfinite(self.half_width):
            raise PreconditionError(f"grid half-width must be positive, got {self.half_width}")

    @property
    def spacing(self) -> float:
        return 2 * self.half_width / self.n_points

    @cached_property
    def nodes(self) -> np.ndarray:
        return -self.half_width + self.spacing * np.arange(self.n_points)

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return tuple(np.meshgrid(self.nodes, self.nodes, indexing="ij"))

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        k = 2 * np.pi * np.fft.fftfreq(self.n_points, d=self.spacing)
        return k

    @property
    def nyquist(self) -> float:
        return math.pi / self.spacing

    @cached_property
    def derivative_wavenumbers(self) -> np.ndarray:
        k = self.wavenumbers.copy()
        # the Nyquist mode has no consistent odd derivative
        k[self.n_points // 2] = 0.0
        return k

    def coordinate(self, axis: Axis) -> np.ndarray:
        return self.mesh[Axis(axis).index]


def make_grid(n_points: int, L: float) -> PhaseGrid:
    return PhaseGrid(n_points, float(L))


def gaussian_bandwidth(planck: PlanckParameter, m: float = 1.0, omega: float = 1.0) -> tuple[float, float]:
    """(k_q, k_p) beyond which the vacuum spectrum exp(−k²h/(8πmω)) drops below e^-SPECTRAL_TAIL."""
    mw = m * omega
    scale = 8 * math.pi * SPECTRAL_TAIL / planck.h
    return math.sqrt(scale * mw), math.sqrt(scale / mw)


def points_for(half_width: float, wavenumber: float) -> int:
    """Smallest power of two n >= 64 whose Nyquist wavenumber πn/(2L) reaches the given one."""
    n = 64
    while math.pi * n / (2 * half_width) < wavenumber:
        n *= 2
    return n


def check_resolution(grid: PhaseGrid, k_q: float, k_p: float, what: str = "vector"):
    needed = max(k_q, k_p)
    if needed > grid.nyquist:
        raise ContainmentError(
            f"{what} is not resolved by the grid: wavenumbers up to {needed:.1f} but Nyquist is "
            f"{grid.nyquist:.1f}; use --grid-n {points_for(grid.half_width, needed)}"
        )


def spectral_extent(samples: np.ndarray, grid: PhaseGrid) -> tuple[float, float]:
    """Largest |k| along q and p where the sampled spectrum is above e^-SPECTRAL_TAIL of its peak."""
    spectrum = np.abs(np.fft.fft2(samples))
    peak = spectrum.max()
    if peak == 0:
        return 0.0, 0.0
    significant = spectrum > math.exp(-SPECTRAL_TAIL) * peak
    k = np.abs(grid.wavenumbers)
    return float(k[significant.any(axis=1)].max()), float(k[significant.any(axis=0)].max())


def default_grid(planck: PlanckParameter, m: float = 1.0, omega: float = 1.0, shift: float = 0.0,
                 n_points: int = DEFAULT_POINTS) -> PhaseGrid:
    """
    L = 8·max(1, √(ħmω), √(ħ/(mω)), |shift|) where shift = h·max(|x0|, |y0|)/2 is the largest
    centre offset. n_points is raised to the next power of two whose Nyquist wavenumber covers
    the coherent carrier 2π·max(|x0|, |y0|) = 4π|shift|/h plus the Gaussian bandwidth.
    """
    _require_quantum(planck)
    mw = m * omega
    hbar = planck.hbar
    L = 8 * max(1.0, math.sqrt(hbar * mw), math.sqrt(hbar / mw), abs(shift))
    needed = max(gaussian_bandwidth(planck, m, omega)) + 4 * math.pi * abs(shift) / planck.h
    n = max(n_points, points_for(L, needed))
    if n > MAX_POINTS:
        raise ContainmentError(
            f"default grid would need {n}² points (> {MAX_POINTS}²) to resolve shift {shift} at h={planck.h}"
        )
    if n != n_points:
        logger.info(f"default grid refined from {n_points} to {n} points per axis to resolve wavenumber {needed:.1f}")
    return PhaseGrid(n, L)


def check_containment(samples: np.ndarray, tol: float = CONTAINMENT_TOLERANCE, what: str = "vector"):
    magnitude = np.abs(samples)
    peak = magnitude.max()
    if peak == 0:
        return
    edge = max(magnitude[0, :].max(), magnitude[-1, :].max(), magnitude[:, 0].max(), magnitude[:, -1].max())
    if edge > tol * peak:
        raise ContainmentError(
            f"{what} is not contained in the grid: edge/peak = {edge / peak:.3e} > {tol:.0e}; enlarge --grid-L"
        )


@dataclass(frozen=True, eq=False)
class StateVector:
    grid: PhaseGrid
    samples: np.ndarray
    planck: PlanckParameter

    __array_ufunc__ = None

    def __post_init__(self):
        if self.planck.h <= 0:
            raise PreconditionError("state vectors need h > 0")
        samples = np.array(self.samples, dtype=complex)
        if samples.shape != (self.grid.n_points, self.grid.n_points):
            raise DimensionMismatchError(f"samples of shape {samples.shape} do not fit a {self.grid.n_points}² grid")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    def with_samples(self, samples: np.ndarray) -> "StateVector":
        return StateVector(self.grid, samples, self.planck)

    def _check(self, other: "StateVector"):
        if self.grid != other.grid:
            raise DimensionMismatchError("vectors live on different grids")
        if self.planck != other.planck:
            raise DimensionMismatchError(f"vectors have different h: {self.planck.h} != {other.planck.h}")

    def __add__(self, other: "StateVector") -> "StateVector":
        self._check(other)
        return self.with_samples(self.samples + other.samples)

    def __sub__(self, other: "StateVector") -> "StateVector":
        self._check(other)
        return self.with_samples(self.samples - other.samples)

    def __mul__(self, c: complex) -> "StateVector":
        return self.with_samples(self.samples * c)

    __rmul__ = __mul__

    def norm(self) -> float:
        return math.sqrt(max(inner(self, self).real, 0.0))

    def normalized(self) -> "StateVector":
        size = self.norm()
        if size == 0:
            raise PreconditionError("cannot normalise the zero vector")
        return self * (1 / size)

    def check_containment(self, what: str = "vector") -> "StateVector":
        check_containment(self.samples, what=what)
        return self


def inner(v1: StateVector, v2: StateVector) -> complex:
    """(4/h) Σ v1·conj(v2)·Δ²; numpy's pairwise summation fixes the reduction order."""
    v1._check(v2)
    weight = 4.0 / v1.planck.h * v1.grid.spacing ** 2
    return complex(np.sum(v1.samples * np.conj(v2.samples)) * weight)


class GridOperator(ABC):
    """Linear operator on sampled vectors, built as a composition tree."""

    __array_ufunc__ = None

    def apply(self, v: StateVector) -> StateVector:
        return v.with_samples(self.act(v.samples, v.grid))

    @abstractmethod
    def act(self, samples: np.ndarray, grid: PhaseGrid) -> np.ndarray:
        ...

    def __add__(self, other: "GridOperator") -> "GridOperator":
        return OperatorSum((self, other))

    def __sub__(self, other: "GridOperator") -> "GridOperator":
        return OperatorSum((self, ScaledOperator(-1.0, other)))

    def __neg__(self) -> "GridOperator":
        return ScaledOperator(-1.0, self)

    def __mul__(self, c: complex) -> "GridOperator":
        return ScaledOperator(complex(c), self)

    __rmul__ = __mul__

    def __matmul__(self, other: "GridOperator") -> "GridOperator":
        """Composition: (A @ B) v = A(B v)."""
        return OperatorProduct((self, other))


class Identity(GridOperator):
    def act(self, samples, grid):
        return samples

    def __repr__(self):
        return "I"


@dataclass(frozen=True)
class CoordinateMultiply(GridOperator):
    axis: Axis

    def act(self, samples, grid):
        return grid.coordinate(self.axis) * samples


@dataclass(frozen=True)
class SpectralDerivative(GridOperator):
    axis: Axis

    def act(self, samples, grid):
        index = Axis(self.axis).index
        shape = [1, 1]
        shape[index] = grid.n_points
        k = grid.derivative_wavenumbers.reshape(shape)
        return np.fft.ifft(1j * k * np.fft.fft(samples, axis=index), axis=index)


@dataclass(frozen=True)
class ScaledOperator(GridOperator):
    coeff: complex
    operator: GridOperator

    def act(self, samples, grid):
        return self.coeff * self.operator.act(samples, grid)


@dataclass(frozen=True)
class OperatorSum(GridOperator):
    terms: tuple

    def act(self, samples, grid):
        if not self.terms:
            return np.zeros_like(samples)
        out = self.terms[0].act(samples, grid)
        for term in self.terms[1:]:
            out = out + term.act(samples, grid)
        return out


@dataclass(frozen=True)
class OperatorProduct(GridOperator):
    factors: tuple

    def act(self, samples, grid):
        out = samples
        for factor in reversed(self.factors):
            out = factor.act(out, grid)
        return out


@dataclass(frozen=True)
class WeylMonomial(GridOperator):
    """Average of all orderings of a copies of Q and b copies of P."""
    a: int
    b: int
    Q: GridOperator
    P: GridOperator

    def act(self, samples, grid):
        # words[i][j] is the sum over every word with i Q's and j P's applied to the input
        words = [[None] * (self.b + 1) for _ in range(self.a + 1)]
        words[0][0] = samples
        for i in range(self.a + 1):
            for j in range(self.b + 1):
                if i == j == 0:
                    continue
                total = None
                if i:
                    total = self.Q.act(words[i - 1][j], grid)
                if j:
                    term = self.P.act(words[i][j - 1], grid)
                    total = term if total is None else total + term
                words[i][j] = total
        return words[self.a][self.b] / math.comb(self.a + self.b, self.a)


class Generator(str, enum.Enum):
    X = "X"
    Y = "Y"
    S = "S"


def _require_quantum(planck: PlanckParameter):
    if planck.h <= 0:
        raise PreconditionError("this operation requires h > 0")


def derived_rep(which: Union[Generator, str], planck: PlanckParameter) -> GridOperator:
    """dρ_h(X) = (h/2)∂_p − 2πiq, dρ_h(Y) = −(h/2)∂_q − 2πip, dρ_h(S) = −2πih."""
    _require_quantum(planck)
    which = Generator(which)
    h = planck.h
    if which is Generator.X:
        return (h / 2) * SpectralDerivative(Axis.P) + (-2j * np.pi) * CoordinateMultiply(Axis.Q)
    if which is Generator.Y:
        return (-h / 2) * SpectralDerivative(Axis.Q) + (-2j * np.pi) * CoordinateMultiply(Axis.P)
    return (-2j * np.pi * h) * Identity()


def derived_rep_right(which: Union[Generator, str], planck: PlanckParameter) -> GridOperator:
    """Right-invariant fields: dρ^r(X) = −(h/2)∂_p − 2πiq, dρ^r(Y) = (h/2)∂_q − 2πip."""
    _require_quantum(planck)
    which = Generator(which)
    h = planck.h
    if which is Generator.X:
        return (-h / 2) * SpectralDerivative(Axis.P) + (-2j * np.pi) * CoordinateMultiply(Axis.Q)
    if which is Generator.Y:
        return (h / 2) * SpectralDerivative(Axis.Q) + (-2j * np.pi) * CoordinateMultiply(Axis.P)
    return (-2j * np.pi * h) * Identity()


def position_operator(planck: PlanckParameter) -> GridOperator:
    """𝐐 = (−1/2πi) dρ_h(X) = q + (iħ/2)∂_p"""
    return (-1 / (2j * np.pi)) * derived_rep(Generator.X, planck)


def momentum_operator(planck: PlanckParameter) -> GridOperator:
    """𝐏 = (−1/2πi) dρ_h(Y) = p − (iħ/2)∂_q"""
    return (-1 / (2j * np.pi)) * derived_rep(Generator.Y, planck)


def annihilation_operator(planck: PlanckParameter, c_i: float = 1.0) -> GridOperator:
    """A_h = dρ_h(X + i·c·Y); c = 1/(mω) annihilates the vacuum of (m, ω)."""
    return derived_rep(Generator.X, planck) + 1j * c_i * derived_rep(Generator.Y, planck)


def cauchy_riemann_operator(planck: PlanckParameter, c_i: float = 1.0) -> GridOperator:
    """D_h = dρ^r(−X + i·c·Y) = (h/2)(∂_p + i·c·∂_q) + 2π(c·p + i·q)."""
    return -derived_rep_right(Generator.X, planck) + 1j * c_i * derived_rep_right(Generator.Y, planck)


def _residual(op: GridOperator, v: StateVector) -> float:
    size = v.norm()
    if size == 0:
        raise PreconditionError("residual of the zero vector is undefined")
    return op.apply(v).norm() / size


def annihilation_residual(v: StateVector, c_i: float = 1.0) -> float:
    return _residual(annihilation_operator(v.planck, c_i), v)


def fock_membership_residual(v: StateVector, c_i: float = 1.0) -> float:
    return _residual(cauchy_riemann_operator(v.planck, c_i), v)


def _positive(name: str, value: float):
    if not value > 0:
        raise PreconditionError(f"{name} must be positive, got {value}")


def vacuum(grid: PhaseGrid, planck: PlanckParameter, m: float = 1.0, omega: float = 1.0) -> StateVector:
    """exp(−(2π/h)(mω q² + p²/(mω)))"""
    _require_quantum(planck)
    _positive("m", m)
    _positive("omega", omega)
    Q, P = grid.mesh
    mw = m * omega
    check_resolution(grid, *gaussian_bandwidth(planck, m, omega), what="vacuum")
    samples = np.exp(-(2 * np.pi / planck.h) * (mw * Q ** 2 + P ** 2 / mw))
    return StateVector(grid, samples, planck).check_containment("vacuum")


def _shift_samples(samples: np.ndarray, grid: PhaseGrid, dq: float, dp: float) -> np.ndarray:
    """g(q, p) = f(q + dq, p + dp) by spectral interpolation."""
    k = grid.wavenumbers
    out = samples
    if dq:
        out = np.fft.ifft(np.exp(1j * k * dq)[:, None] * np.fft.fft(out, axis=0), axis=0)
    if dp:
        out = np.fft.ifft(np.exp(1j * k * dp)[None, :] * np.fft.fft(out, axis=1), axis=1)
    return out


def represent(g: GroupElement, v: StateVector) -> StateVector:
    """ρ_h(s,x,y) f(q,p) = exp(−2πi(hs + qx + py)) f(q − hy/2, p + hx/2)."""
    if g.n != 1:
        raise DimensionMismatchError("the grid backend supports n = 1 only")
    h = v.planck.h
    s, x, y = float(g.s), float(g.x[0]), float(g.y[0])
    k_q, k_p = spectral_extent(v.samples, v.grid)
    check_resolution(v.grid, k_q + 2 * np.pi * abs(x), k_p + 2 * np.pi * abs(y), what="represented vector")
    Q, P = v.grid.mesh
    shifted = _shift_samples(v.samples, v.grid, -h * y / 2, h * x / 2)
    phase = np.exp(-2j * np.pi * (h * s + Q * x + P * y))
    return v.with_samples(phase * shifted).check_containment("represented vector")


def coherent_vector(grid: PhaseGrid, planck: PlanckParameter, x0: float, y0: float,
                    m: float = 1.0, omega: float = 1.0) -> StateVector:
    """ρ_h(0, x0, y0) applied to the vacuum, in closed form."""
    _require_quantum(planck)
    _positive("m", m)
    _positive("omega", omega)
    h = planck.h
    Q, P = grid.mesh
    mw = m * omega
    k_q, k_p = gaussian_bandwidth(planck, m, omega)
    check_resolution(grid, k_q + 2 * np.pi * abs(x0), k_p + 2 * np.pi * abs(y0), what="coherent vector")
    qs, ps = Q - h * y0 / 2, P + h * x0 / 2
    samples = np.exp(-2j * np.pi * (Q * x0 + P * y0) - (2 * np.pi / h) * (mw * qs ** 2 + ps ** 2 / mw))
    return StateVector(grid, samples, planck).check_containment("coherent vector")


def coherent_vector_at(grid: PhaseGrid, planck: PlanckParameter, q0: float, p0: float,
                       m: float = 1.0, omega: float = 1.0) -> StateVector:
    """Coherent vector whose kernel is centred at (q0, p0): x0 = −p0/h, y0 = q0/h."""
    _require_quantum(planck)
    return coherent_vector(grid, planck, -p0 / planck.h, q0 / planck.h, m, omega)


def quantize(f: Symbol, planck: PlanckParameter, grid: Optional[PhaseGrid] = None) -> GridOperator:
    """Weyl quantisation: q^a p^b ↦ symmetrised products of 𝐐 and 𝐏, ħ substituted numerically."""
    _require_quantum(planck)
    if f.n != 1:
        raise DimensionMismatchError("the grid backend supports n = 1 only")
    Q, P = position_operator(planck), momentum_operator(planck)
    terms = []
    for (a, b), coeff in sorted(f.numeric_terms(planck.hbar).items()):
        monomial = Identity() if a == b == 0 else WeylMonomial(a, b, Q, P)
        terms.append(ScaledOperator(coeff, monomial))
    logger.debug(f"quantized symbol into {len(terms)} Weyl monomials")
    return OperatorSum(tuple(terms))


def expectation(f: Symbol, v: StateVector) -> complex:
    return inner(quantize(f, v.planck, v.grid).apply(v), v)


def eigenfunction(grid: PhaseGrid, planck: PlanckParameter, k: int, m: float = 1.0,
                  omega: float = 1.0) -> StateVector:
    """k-th oscillator eigenvector: the creation ladder applied k times to the vacuum, normalised."""
    if k < 0:
        raise PreconditionError(f"eigenfunction index must be >= 0, got {k}")
    v = vacuum(grid, planck, m, omega).normalized()
    if k == 0:
        return v
    raise_op = quantize(ladder(LadderKind.PLUS, m, omega), planck, grid)
    for level in range(1, k + 1):
        v = raise_op.apply(v).normalized()
        v.check_containment(f"eigenfunction {level}")
    return v


def covariant_symbol(op: GridOperator, x0: float, y0: float, planck: PlanckParameter,
                     m: float = 1.0, omega: float = 1.0, grid: Optional[PhaseGrid] = None) -> complex:
    """⟨op f_(x0,y0), f_(x0,y0)⟩"""
    if grid is None:
        shift = planck.h * max(abs(x0), abs(y0)) / 2
        grid = default_grid(planck, m, omega, shift)
    v = coherent_vector(grid, planck, x0, y0, m, omega)
    return inner(op.apply(v), v)


__all__ = [
    'Axis', 'PhaseGrid', 'StateVector', 'GridOperator', 'Identity', 'CoordinateMultiply',
    'SpectralDerivative', 'ScaledOperator', 'OperatorSum', 'OperatorProduct', 'WeylMonomial',
    'Generator', 'make_grid', 'default_grid', 'gaussian_bandwidth', 'points_for',
    'check_resolution', 'spectral_extent', 'check_containment', 'inner', 'derived_rep',
    'derived_rep_right', 'position_operator', 'momentum_operator', 'annihilation_operator',
    'cauchy_riemann_operator', 'annihilation_residual', 'fock_membership_residual', 'vacuum',
    'represent', 'coherent_vector', 'coherent_vector_at', 'quantize', 'expectation',
    'eigenfunction', 'covariant_symbol',
]
