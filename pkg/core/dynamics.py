"""
Time evolution of symbols and kernels.

Observables follow the bracket equation dB/dt = pbracket(B, H(t)) with H(t) in
fixed coordinates. For quadratic and linear Hamiltonians the solution is an
affine substitution in (q, p), available in closed form; anything else goes
through the RK4 integrator on the monomial closure of the initial symbol.
"""
from __future__ import annotations

import enum
import logging
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np
from scipy import integrate
from scipy.linalg import expm

from utils.exception import DegreeCapExceeded, DimensionMismatchError, PreconditionError, QuadratureError
from .states import GaussianKernel, coherent_shape
from .symbols import PlanckParameter, Symbol, hamiltonian_ho, linear_combine, pbracket, symbol_ring, to_fraction, to_gaussian

logger = logging.getLogger(__name__)

QUADRATURE_TOLERANCE = 1e-10
# closure guard for integrate_bracket_ode
MAX_BASIS_SIZE = 4096
_TRIG_SNAP = 1e-15


class ForceKind(str, enum.Enum):
    ZERO = "zero"
    CONSTANT = "constant"
    PERIODIC = "periodic"
    TABULATED = "tabulated"


@dataclass(frozen=True)
class ForceProfile:
    """
    External force z(t).

    Tabulated profiles interpolate linearly between samples and hold the end
    values outside the table.
    """
    kind: ForceKind = ForceKind.ZERO
    Z0: float = 0.0
    Omega: float = 0.0
    times: tuple = ()
    values: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "kind", ForceKind(self.kind))
        if not (math.isfinite(self.Z0) and math.isfinite(self.Omega)):
            raise PreconditionError("force amplitude and frequency must be finite")
        if self.kind is ForceKind.PERIODIC and self.Omega <= 0:
            raise PreconditionError(f"periodic force needs Omega > 0, got {self.Omega}")
        if self.kind is ForceKind.TABULATED:
            times = tuple(float(t) for t in self.times)
            values = tuple(float(v) for v in self.values)
            if len(times) < 2 or len(times) != len(values):
                raise PreconditionError("tabulated force needs at least two (t, z) samples of equal length")
            if any(b <= a for a, b in zip(times, times[1:])):
                raise PreconditionError("tabulated force times must be strictly increasing")
            object.__setattr__(self, "times", times)
            object.__setattr__(self, "values", values)

    @classmethod
    def zero(cls) -> "ForceProfile":
        return cls(ForceKind.ZERO)

    @classmethod
    def constant(cls, Z0: float) -> "ForceProfile":
        return cls(ForceKind.CONSTANT, Z0=float(Z0))

    @classmethod
    def periodic(cls, Z0: float, Omega: float) -> "ForceProfile":
        return cls(ForceKind.PERIODIC, Z0=float(Z0), Omega=float(Omega))

    @classmethod
    def tabulated(cls, times: Sequence[float], values: Sequence[float]) -> "ForceProfile":
        return cls(ForceKind.TABULATED, times=tuple(times), values=tuple(values))

    @property
    def is_zero(self) -> bool:
        if self.kind is ForceKind.TABULATED:
            return not any(self.values)
        return self.kind is ForceKind.ZERO or self.Z0 == 0

    def __call__(self, t: float) -> float:
        if self.kind is ForceKind.ZERO:
            return 0.0
        if self.kind is ForceKind.CONSTANT:
            return self.Z0
        if self.kind is ForceKind.PERIODIC:
            return self.Z0 * math.cos(self.Omega * t)
        return float(np.interp(t, self.times, self.values))

    def breakpoints(self, t1: float, t2: float) -> list[float]:
        if self.kind is not ForceKind.TABULATED:
            return []
        return [t for t in self.times if t1 < t < t2]


@dataclass(frozen=True)
class Trajectory:
    times: tuple
    payloads: tuple

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        if len(times) != len(self.payloads):
            raise DimensionMismatchError(f"{len(times)} times for {len(self.payloads)} payloads")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise PreconditionError("trajectory times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "payloads", tuple(self.payloads))

    def __len__(self) -> int:
        return len(self.times)

    def __iter__(self):
        return iter(zip(self.times, self.payloads))

    @property
    def final(self):
        return self.payloads[-1]


@dataclass(frozen=True)
class TimeDependentHamiltonian:
    """H(t) = Σ c_j(t)·H_j with numeric or callable coefficients and fixed symbols."""
    terms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if not self.terms:
            raise PreconditionError("a Hamiltonian needs at least one term")
        if len({s.n for _, s in self.terms}) != 1:
            raise DimensionMismatchError("Hamiltonian terms live in different dimensions")

    @classmethod
    def constant(cls, H: Symbol) -> "TimeDependentHamiltonian":
        return cls(((1.0, H),))

    @property
    def n(self) -> int:
        return self.terms[0][1].n

    def coefficients(self, t: float) -> list[float]:
        return [c(t) if callable(c) else c for c, _ in self.terms]


def hamiltonian_forced(m, omega, z: ForceProfile) -> TimeDependentHamiltonian:
    """H_ho − z(t)·q"""
    return TimeDependentHamiltonian(((1.0, hamiltonian_ho(m, omega)), (lambda t: -z(t), Symbol.q())))


def _positive(name: str, value) -> float:
    if not value > 0:
        raise PreconditionError(f"{name} must be positive, got {value}")
    return float(value)


def _snap(value: float) -> float:
    """Trig values within 1e-15 of 0 or ±1 are taken exactly."""
    for target in (0.0, 1.0, -1.0):
        if abs(value - target) < _TRIG_SNAP:
            return target
    return value


def _rotation(t: float, m: float, omega: float) -> list[list[Fraction]]:
    c, s = _snap(math.cos(omega * t)), _snap(math.sin(omega * t))
    mw = m * omega
    return [[Fraction(c), Fraction(s / mw)], [Fraction(-mw * s), Fraction(c)]]


def _require_single(f: Symbol):
    if f.n != 1:
        raise DimensionMismatchError("closed-form flows are implemented on H^1")


def ho_flow(f: Symbol, t: float, m=1.0, omega=1.0) -> Symbol:
    """
    Free oscillator flow: q := q cos ωt + (p/mω) sin ωt, p := −qmω sin ωt + p cos ωt.

    Coefficients are the float trig values taken as exact rationals.
    Orientation follows dB/dt = pbracket(B, H), so q becomes p/(mω) after a quarter period,
    not −p/(mω).
    """
    _require_single(f)
    m, omega = _positive("m", m), _positive("omega", omega)
    return f.substitute_affine(_rotation(t, m, omega))


def _check_interval(t1: float, t2: float):
    if not (math.isfinite(t1) and math.isfinite(t2)):
        raise PreconditionError("integration limits must be finite")
    if t2 < t1:
        raise PreconditionError(f"need t2 >= t1, got [{t1}, {t2}]")


def _quad(func, a: float, b: float, tol: float) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, error = integrate.quad(func, a, b, epsabs=tol, epsrel=1e-12, limit=200)
        except (integrate.IntegrationWarning, ValueError) as e:
            raise QuadratureError(f"quadrature on [{a}, {b}] did not converge: {e}") from None
    if error > max(tol, 1e-12 * abs(value)):
        raise QuadratureError(f"quadrature error estimate {error:.2e} on [{a}, {b}] exceeds {tol:.0e}")
    return value


def force_integrals(z: ForceProfile, omega: float, t1: float, t2: float,
                    tol: float = QUADRATURE_TOLERANCE) -> tuple[float, float]:
    """(α, β) = (∫ z cos ωτ dτ, ∫ z sin ωτ dτ) over [t1, t2], by adaptive quadrature."""
    omega = _positive("omega", omega)
    _check_interval(t1, t2)
    if z.is_zero or t1 == t2:
        return 0.0, 0.0
    top = max(omega, z.Omega) if z.kind is ForceKind.PERIODIC else omega
    # at most one period per quadrature call, and tabulated kinks only at segment ends
    pieces = max(1, math.ceil((t2 - t1) * top / (2 * math.pi)))
    edges = sorted({*np.linspace(t1, t2, pieces + 1).tolist(), *z.breakpoints(t1, t2)})
    alpha = beta = 0.0
    for a, b in zip(edges, edges[1:]):
        alpha += _quad(lambda tau: z(tau) * math.cos(omega * tau), a, b, tol)
        beta += _quad(lambda tau: z(tau) * math.sin(omega * tau), a, b, tol)
    return alpha, beta


def _sin_integral(nu: float, t1: float, t2: float) -> float:
    """∫ cos(ντ) dτ"""
    if nu == 0:
        return t2 - t1
    return (math.sin(nu * t2) - math.sin(nu * t1)) / nu


def _cos_integral(nu: float, t1: float, t2: float) -> float:
    """∫ sin(ντ) dτ"""
    if nu == 0:
        return 0.0
    return (math.cos(nu * t1) - math.cos(nu * t2)) / nu


def periodic_force_integrals(Z0: float, Omega: float, omega: float, t1: float, t2: float) -> tuple[float, float]:
    """
    Definite integrals of Z0·cos(Ωτ)·(cos ωτ, sin ωτ) via product-to-sum.

    Vanish at t1 = t2; Ω = ω gives the resonant Z0·(t/2 + sin 2ωt/4ω).
    """
    _check_interval(t1, t2)
    alpha = Z0 / 2 * (_sin_integral(Omega - omega, t1, t2) + _sin_integral(Omega + omega, t1, t2))
    beta = Z0 / 2 * (_cos_integral(omega + Omega, t1, t2) + _cos_integral(omega - Omega, t1, t2))
    return alpha, beta


def forced_flow(f: Symbol, t: float, m=1.0, omega=1.0, z: Optional[ForceProfile] = None,
                t0: float = 0.0) -> Symbol:
    """
    Solution of dB/dt = pbracket(B, H_ho − z(t)q) with B(t0) = f: the ho_flow
    rotation by t − t0 followed by (q, p) += (I_s/mω, I_c), where
    I_c = ∫ z(τ) cos ω(τ−t0) dτ and I_s = ∫ z(τ) sin ω(τ−t0) dτ over [t0, t].
    """
    _require_single(f)
    m, omega = _positive("m", m), _positive("omega", omega)
    z = z or ForceProfile.zero()
    if t >= t0:
        alpha, beta = force_integrals(z, omega, t0, t)
    else:
        alpha, beta = (-v for v in force_integrals(z, omega, t, t0))
    c0, s0 = math.cos(omega * t0), math.sin(omega * t0)
    i_c = c0 * alpha + s0 * beta if t0 else alpha
    i_s = c0 * beta - s0 * alpha if t0 else beta
    shift = [Fraction(i_s / (m * omega)), Fraction(i_c)]
    return f.substitute_affine(_rotation(t - t0, m, omega), shift)


def _quadratic_parts(H: Symbol, hbar: float) -> tuple[np.ndarray, np.ndarray]:
    """H = ½zᵀKz + bᵀz + const, with ħ-powers collapsed at the given ħ."""
    _require_single(H)
    if H.degree > 2:
        raise PreconditionError(f"closed-form evolution needs a quadratic Hamiltonian, got degree {H.degree}")
    terms = H.numeric_terms(hbar)
    if any(abs(c.imag) > 1e-14 * max(1.0, abs(c)) for c in terms.values()):
        raise PreconditionError("Hamiltonian has non-real coefficients")
    c = {key: value.real for key, value in terms.items()}
    K = np.array([[2 * c.get((2, 0), 0.0), c.get((1, 1), 0.0)],
                  [c.get((1, 1), 0.0), 2 * c.get((0, 2), 0.0)]])
    b = np.array([c.get((1, 0), 0.0), c.get((0, 1), 0.0)])
    return K, b


def affine_flow(H: Symbol, t: float, planck: Optional[PlanckParameter] = None) -> tuple[np.ndarray, np.ndarray]:
    """
    Classical flow z ↦ Mz + d of ż = J(Kz + b), J = [[0, 1], [−1, 0]],
    read off the exponential of the augmented generator [[JK, Jb], [0, 0]].
    """
    hbar = planck.hbar if planck is not None else 0.0
    K, b = _quadratic_parts(H, hbar)
    J = np.array([[0.0, 1.0], [-1.0, 0.0]])
    generator = np.zeros((3, 3))
    generator[:2, :2] = J @ K
    generator[:2, 2] = J @ b
    flow = expm(t * generator)
    return flow[:2, :2], flow[:2, 2]


def evolve_kernel(k: GaussianKernel, H: Symbol, t: float) -> GaussianKernel:
    """
    Kernel transported by the flow of a quadratic H: centre μ ↦ Mμ + d, shape D ↦ MDMᵀ.

    Pairing is dual to the observable flow: eval(evolve_kernel(k, H, t), B) = eval(k, B∘Φ_t).
    """
    M, d = affine_flow(H, t, k.planck)
    center = M @ np.array([float(k.q0), float(k.p0)]) + d
    D = np.array([[float(v) for v in row] for row in k.quadratic_form])
    shape = M @ D @ M.T
    coherent = np.array([[float(v) for v in row] for row in coherent_shape(k.m, k.omega)])
    if k.is_coherent and np.allclose(shape, coherent, rtol=0, atol=1e-12 * max(1.0, np.abs(coherent).max())):
        new_shape = None
    else:
        new_shape = tuple(tuple(Fraction(float(v)) for v in row) for row in (shape + shape.T) / 2)
    logger.debug(f"kernel centre {k.center} -> {tuple(center)} after t={t}")
    return k.moved(Fraction(float(center[0])), Fraction(float(center[1])), new_shape)


def interaction_evolve(k: GaussianKernel, m, omega, z: ForceProfile, t1: float, t2: float) -> GaussianKernel:
    """
    Interaction-picture step: the coherent kernel's centre moves by (Δβ/mω, Δα).

    The p-shift is +Δα, the sign that solves dB/dt = pbracket(B, H_ho − z(t)q); one period of
    Z0·cos ωt moves the centre by (0, Z0π/ω). Same orientation as ho_flow.
    """
    m, omega = _positive("m", m), _positive("omega", omega)
    if not k.is_coherent or k.m != to_fraction(m) or k.omega != to_fraction(omega):
        raise PreconditionError("interaction_evolve needs a coherent kernel for the given m and omega")
    alpha, beta = force_integrals(z, omega, t1, t2)
    if alpha == 0 and beta == 0:
        return k
    return k.moved(k.q0 + Fraction(beta / (m * omega)), k.p0 + Fraction(alpha))


class _BracketGenerator:
    """Exact generator matrices of B ↦ pbracket(B, H_j) on a closed monomial basis."""

    def __init__(self, f0: Symbol, H: TimeDependentHamiltonian, degree_cap: int):
        self.n = f0.n
        self.ring = symbol_ring(self.n)
        symbols = [s for _, s in H.terms]
        images: dict[tuple, list[dict]] = {}
        seen = set(f0.poly.keys())
        queue = sorted(seen)
        while queue:
            monom = queue.pop()
            unit = Symbol(self.ring.from_dict({monom: to_gaussian(1)}), self.n, f0.provenance)
            images[monom] = []
            for term in symbols:
                image = pbracket(unit, term).poly
                images[monom].append(dict(image.items()))
                for out in image.keys():
                    if out in seen:
                        continue
                    if sum(out[1:]) > degree_cap:
                        raise DegreeCapExceeded(
                            f"bracket closure reaches degree {sum(out[1:])} > cap {degree_cap}; "
                            f"the Hamiltonian does not close on this observable"
                        )
                    if len(seen) >= MAX_BASIS_SIZE:
                        raise DegreeCapExceeded(f"bracket closure exceeds {MAX_BASIS_SIZE} monomials")
                    seen.add(out)
                    queue.append(out)
        self.basis = sorted(seen)
        index = {monom: i for i, monom in enumerate(self.basis)}
        size = len(self.basis)
        self.matrices = []
        for j in range(len(symbols)):
            G = np.zeros((size, size), dtype=complex)
            for monom, outs in images.items():
                for out, coeff in outs[j].items():
                    G[index[out], index[monom]] += complex(float(coeff.x), float(coeff.y))
            self.matrices.append(G)
        logger.debug(f"bracket closure: {size} monomials, {len(symbols)} Hamiltonian terms")

    def vector(self, f: Symbol) -> np.ndarray:
        out = np.zeros(len(self.basis), dtype=complex)
        for i, monom in enumerate(self.basis):
            coeff = f.poly.get(monom)
            if coeff is not None:
                out[i] = complex(float(coeff.x), float(coeff.y))
        return out

    def symbol(self, values: np.ndarray, template: Symbol) -> Symbol:
        terms = {monom: to_gaussian(complex(v)) for monom, v in zip(self.basis, values) if v != 0}
        return Symbol(self.ring.from_dict(terms), self.n, template.provenance)


def integrate_bracket_ode(f0: Symbol, H: Union[Symbol, TimeDependentHamiltonian], t_span: tuple[float, float],
                          dt: float, degree_cap: int, record_every: int = 1) -> Trajectory:
    """
    Fixed-step RK4 for dB/dt = pbracket(B, H(t)) on the coefficient vector of B.

    The right-hand side is assembled exactly on the monomial closure of f0 and
    rounded to floats once; growth past degree_cap raises DegreeCapExceeded.
    """
    if not dt > 0:
        raise PreconditionError(f"dt must be positive, got {dt}")
    if degree_cap < f0.degree:
        raise PreconditionError(f"degree cap {degree_cap} is below the degree {f0.degree} of the initial symbol")
    if record_every < 1:
        raise PreconditionError("record_every must be >= 1")
    t0, t1 = (float(t) for t in t_span)
    if not t1 > t0:
        raise PreconditionError(f"empty time span [{t0}, {t1}]")
    if isinstance(H, Symbol):
        H = TimeDependentHamiltonian.constant(H)
    if H.n != f0.n:
        raise DimensionMismatchError(f"Hamiltonian has n={H.n}, observable has n={f0.n}")

    gen = _BracketGenerator(f0, H, degree_cap)
    steps = max(1, math.ceil((t1 - t0) / dt - 1e-9))
    h = (t1 - t0) / steps

    def rhs(t: float, c: np.ndarray) -> np.ndarray:
        out = np.zeros_like(c)
        for coeff, G in zip(H.coefficients(t), gen.matrices):
            if coeff != 0:
                out += coeff * (G @ c)
        return out

    c = gen.vector(f0)
    times, payloads = [t0], [gen.symbol(c, f0)]
    for step in range(1, steps + 1):
        t = t0 + (step - 1) * h
        k1 = rhs(t, c)
        k2 = rhs(t + h / 2, c + h / 2 * k1)
        k3 = rhs(t + h / 2, c + h / 2 * k2)
        k4 = rhs(t + h, c + h * k3)
        c = c + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if step % record_every == 0 or step == steps:
            times.append(t0 + step * h)
            payloads.append(gen.symbol(c, f0))
    logger.info(f"RK4: {steps} steps of {h:.3e} over [{t0}, {t1}], {len(gen.basis)} coefficients")
    return Trajectory(tuple(times), tuple(payloads))


def max_coefficient_error(a: Symbol, b: Symbol) -> float:
    diff = linear_combine([(1, a), (-1, b)])
    return max((abs(v) for v in diff.coefficients().values()), default=0.0)


def resonance_amplitude(Omega: float, omega: float, Z0: float, t_max: float, samples: int) -> list[tuple[float, float]]:
    """
    Envelope |(α(t), β(t))| of the forced-flow translation for z = Z0·cos Ωt,
    accumulated increment by increment on an even time grid over [0, t_max].
    """
    Omega, omega, t_max = _positive("Omega", Omega), _positive("omega", omega), _positive("t_max", t_max)
    if Z0 < 0 or not math.isfinite(Z0):
        raise PreconditionError(f"Z0 must be a finite non-negative amplitude, got {Z0}")
    if samples < 2:
        raise PreconditionError("resonance_amplitude needs at least two samples")
    z = ForceProfile.periodic(Z0, Omega) if Z0 else ForceProfile.zero()
    times = np.linspace(0.0, t_max, samples)
    alpha = beta = 0.0
    rows = [(0.0, 0.0)]
    for a, b in zip(times, times[1:]):
        d_alpha, d_beta = force_integrals(z, omega, float(a), float(b))
        alpha += d_alpha
        beta += d_beta
        rows.append((float(b), math.hypot(alpha, beta)))
    return rows


def resonance_bound(Omega: float, omega: float, Z0: float) -> float:
    """Upper bound of the envelope away from resonance, from the product-to-sum closed forms."""
    if Omega == omega:
        return math.inf
    return math.sqrt(5) / 2 * abs(Z0) * (1 / abs(Omega - omega) + 1 / (Omega + omega))


__all__ = [
    'ForceKind', 'ForceProfile', 'Trajectory', 'TimeDependentHamiltonian', 'hamiltonian_forced',
    'ho_flow', 'force_integrals', 'periodic_force_integrals', 'forced_flow', 'affine_flow',
    'evolve_kernel', 'interaction_evolve', 'integrate_bracket_ode', 'max_coefficient_error',
    'resonance_amplitude', 'resonance_bound', 'QUADRATURE_TOLERANCE',
]
