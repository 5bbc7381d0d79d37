"""
Exact polynomial symbols in (ħ, q_1..q_n, p_1..p_n) and their calculus.

A Symbol wraps a sparse sympy polynomial over the Gaussian rationals. The
generators are ordered (hbar, q1..qn, p1..pn), so a monomial key is the flat
tuple (k, a_1..a_n, b_1..b_n).
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from numbers import Number
from typing import Iterable, Mapping, Optional, Sequence, Union

from sympy.polys.domains import QQ, QQ_I
from sympy.polys.rings import PolyElement, PolyRing, ring

from utils.exception import DimensionMismatchError, PreconditionError

logger = logging.getLogger(__name__)

Scalar = Union[int, float, complex, Fraction]


class Provenance(str, enum.Enum):
    CLASSICAL = "classical-polynomial"
    QUANTUM = "quantum-symbol"
    RAW = "raw"


@dataclass(frozen=True)
class ProvenanceTag:
    origin: Provenance = Provenance.RAW
    note: str = ""

    @classmethod
    def combine(cls, tags: Iterable["ProvenanceTag"], has_hbar: bool) -> "ProvenanceTag":
        origins = {t.origin for t in tags}
        if Provenance.RAW in origins:
            return cls(Provenance.RAW)
        if origins <= {Provenance.CLASSICAL} and not has_hbar:
            return cls(Provenance.CLASSICAL, "δ(s)·č(x,y)")
        return cls(Provenance.QUANTUM, "finite sum of δ-derivatives in s, x, y")


@dataclass(frozen=True)
class PlanckParameter:
    h: float

    def __post_init__(self):
        if not math.isfinite(self.h) or self.h < 0:
            raise PreconditionError(f"Planck constant must be a finite non-negative number, got {self.h}")

    @classmethod
    def from_hbar(cls, hbar: float) -> "PlanckParameter":
        return cls(2 * math.pi * hbar)

    @property
    def hbar(self) -> float:
        return self.h / (2 * math.pi)

    @property
    def is_classical(self) -> bool:
        return self.h == 0


@lru_cache(maxsize=None)
def symbol_ring(n: int) -> PolyRing:
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    names = ["hbar"] + [f"q{i}" for i in range(1, n + 1)] + [f"p{i}" for i in range(1, n + 1)]
    return ring(",".join(names), QQ_I)[0]


def to_fraction(value) -> Fraction:
    """Exact rational from int, Fraction, float, numeric string, or a sympy rational."""
    if hasattr(value, "numerator") and hasattr(value, "denominator") and not isinstance(value, (int, Fraction)):
        return Fraction(int(value.numerator), int(value.denominator))
    return Fraction(value)


def to_gaussian(value):
    """Exact Gaussian rational from a Python number; floats and complex parts convert exactly."""
    if isinstance(value, type(QQ_I.one)):
        return value
    if isinstance(value, complex):
        re, im = to_fraction(value.real), to_fraction(value.imag)
    else:
        re, im = to_fraction(value), Fraction(0)
    return QQ_I(QQ(re.numerator, re.denominator), QQ(im.numerator, im.denominator))


def gaussian_to_complex(value) -> complex:
    return complex(float(value.x), float(value.y))


def gaussian_parts(value) -> tuple[Fraction, Fraction]:
    return to_fraction(value.x), to_fraction(value.y)


@dataclass(frozen=True, eq=False)
class Symbol:
    poly: PolyElement
    n: int = 1
    provenance: ProvenanceTag = field(default_factory=ProvenanceTag)

    def __post_init__(self):
        if self.poly.ring != symbol_ring(self.n):
            raise DimensionMismatchError(f"polynomial ring does not match n={self.n}")

    # construction

    @classmethod
    def zero(cls, n: int = 1, provenance: Optional[ProvenanceTag] = None) -> "Symbol":
        return cls(symbol_ring(n).zero, n, provenance or ProvenanceTag(Provenance.CLASSICAL))

    @classmethod
    def constant(cls, value: Scalar, n: int = 1, provenance: Optional[ProvenanceTag] = None) -> "Symbol":
        R = symbol_ring(n)
        return cls(R.ground_new(to_gaussian(value)), n, provenance or ProvenanceTag(Provenance.CLASSICAL))

    @classmethod
    def from_terms(cls, terms: Mapping[tuple, Scalar], n: int = 1,
                   provenance: Optional[ProvenanceTag] = None) -> "Symbol":
        R = symbol_ring(n)
        for monom in terms:
            if len(monom) != 2 * n + 1:
                raise DimensionMismatchError(f"monomial {monom} does not fit n={n}")
        poly = R.from_dict({tuple(m): to_gaussian(c) for m, c in terms.items()})
        return cls(poly, n, provenance or ProvenanceTag(Provenance.RAW))

    @classmethod
    def hbar(cls, n: int = 1) -> "Symbol":
        return cls(symbol_ring(n).gens[0], n, ProvenanceTag(Provenance.QUANTUM))

    @classmethod
    def q(cls, i: int = 1, n: int = 1) -> "Symbol":
        return cls(symbol_ring(n).gens[i], n, ProvenanceTag(Provenance.CLASSICAL, "δ(s)·(1/2πi)δ'(x)·δ(y)"))

    @classmethod
    def p(cls, i: int = 1, n: int = 1) -> "Symbol":
        return cls(symbol_ring(n).gens[n + i], n, ProvenanceTag(Provenance.CLASSICAL, "δ(s)·δ(x)·(1/2πi)δ'(y)"))

    def with_provenance(self, tag: ProvenanceTag) -> "Symbol":
        return Symbol(self.poly, self.n, tag)

    def _derived(self, poly: PolyElement, *others: "Symbol") -> "Symbol":
        tag = ProvenanceTag.combine([self.provenance] + [o.provenance for o in others], _has_hbar(poly))
        return Symbol(poly, self.n, tag)

    # inspection

    @property
    def ring(self) -> PolyRing:
        return self.poly.ring

    @property
    def is_zero(self) -> bool:
        return not self.poly

    def terms(self) -> dict[tuple, object]:
        return dict(self.poly.items())

    def coefficients(self) -> dict[tuple, complex]:
        return {m: gaussian_to_complex(c) for m, c in sorted(self.poly.items())}

    @property
    def degree(self) -> int:
        """Total (q,p)-degree; −1 for the zero symbol."""
        return max((sum(m[1:]) for m in self.poly.keys()), default=-1)

    @property
    def hbar_degree(self) -> int:
        return max((m[0] for m in self.poly.keys()), default=-1)

    @property
    def has_hbar(self) -> bool:
        return _has_hbar(self.poly)

    def diff_q(self, i: int = 1) -> "Symbol":
        return self._derived(self.poly.diff(self.ring.gens[i]))

    def diff_p(self, i: int = 1) -> "Symbol":
        return self._derived(self.poly.diff(self.ring.gens[self.n + i]))

    def numeric_terms(self, hbar: float) -> dict[tuple, complex]:
        """Collapse ħ-powers numerically: (a_1..a_n, b_1..b_n) ↦ Σ_k c_k ħ^k."""
        out: dict[tuple, complex] = {}
        for monom, coeff in self.poly.items():
            key = monom[1:]
            out[key] = out.get(key, 0j) + gaussian_to_complex(coeff) * hbar ** monom[0]
        return {k: v for k, v in out.items() if v != 0}

    def evaluate_exact(self, q0: Sequence, p0: Sequence, hbar=0):
        """Exact value as a Gaussian rational; q0, p0, hbar must be exact numbers."""
        q0, p0 = _as_points(q0, self.n), _as_points(p0, self.n)
        point = [to_gaussian(hbar)] + [to_gaussian(v) for v in q0] + [to_gaussian(v) for v in p0]
        total = QQ_I.zero
        for monom, coeff in self.poly.items():
            term = coeff
            for base, e in zip(point, monom):
                if e:
                    term = term * base ** e
            total = total + term
        return total

    def to_distribution(self):
        """Point distribution on H^n whose Fourier image is this symbol."""
        from .distributions import PointDistribution
        return PointDistribution.from_symbol(self)

    # arithmetic

    def _check(self, other: "Symbol"):
        if not isinstance(other, Symbol):
            raise TypeError(f"expected Symbol, got {type(other).__name__}")
        if other.n != self.n:
            raise DimensionMismatchError(f"dimension mismatch: {self.n} != {other.n}")

    def __add__(self, other: "Symbol") -> "Symbol":
        self._check(other)
        return self._derived(self.poly + other.poly, other)

    def __sub__(self, other: "Symbol") -> "Symbol":
        self._check(other)
        return self._derived(self.poly - other.poly, other)

    def __neg__(self) -> "Symbol":
        return Symbol(-self.poly, self.n, self.provenance)

    def scale(self, c: Scalar) -> "Symbol":
        return Symbol(self.poly.mul_ground(to_gaussian(c)), self.n, self.provenance) if c != 0 else Symbol.zero(self.n, self.provenance)

    def __mul__(self, other):
        """Pointwise (commutative) product; the non-commutative product is ``star``."""
        if isinstance(other, Number):
            return self.scale(other)
        self._check(other)
        return self._derived(self.poly * other.poly, other)

    def __rmul__(self, other):
        if isinstance(other, Number):
            return self.scale(other)
        return NotImplemented

    def __eq__(self, other) -> bool:
        if not isinstance(other, Symbol):
            return NotImplemented
        return self.n == other.n and self.poly == other.poly

    def __hash__(self) -> int:
        return hash((self.n, frozenset(self.poly.items())))

    def __str__(self) -> str:
        from .parser import format_symbol
        return format_symbol(self)

    def __repr__(self) -> str:
        return f"Symbol({self}, n={self.n}, origin={self.provenance.origin.value})"

    def substitute_affine(self, matrix: Sequence[Sequence], shift: Optional[Sequence] = None) -> "Symbol":
        """Replace z = (q, p) by M z + c exactly; ħ is left alone."""
        size = 2 * self.n
        if len(matrix) != size or any(len(row) != size for row in matrix):
            raise DimensionMismatchError(f"substitution matrix must be {size}x{size}")
        shift = shift if shift is not None else [0] * size
        R = self.ring
        coords = R.gens[1:]
        images = []
        for i in range(size):
            img = R.ground_new(to_gaussian(shift[i]))
            for j in range(size):
                if matrix[i][j] != 0:
                    img = img + coords[j].mul_ground(to_gaussian(matrix[i][j]))
            images.append(img)
        powers: dict[tuple[int, int], PolyElement] = {}

        def power(i: int, e: int) -> PolyElement:
            if (i, e) not in powers:
                powers[(i, e)] = images[i] ** e
            return powers[(i, e)]

        result = R.zero
        hbar_gen = R.gens[0]
        for monom, coeff in self.poly.items():
            term = R.ground_new(coeff) * hbar_gen ** monom[0]
            for i, e in enumerate(monom[1:]):
                if e:
                    term = term * power(i, e)
            result = result + term
        return Symbol(result, self.n, self.provenance)


def _has_hbar(poly: PolyElement) -> bool:
    return any(m[0] for m in poly.keys())


def _as_points(values, n: int) -> tuple:
    if isinstance(values, (list, tuple)):
        if len(values) != n:
            raise DimensionMismatchError(f"expected {n} coordinates, got {len(values)}")
        return tuple(values)
    if n != 1:
        raise DimensionMismatchError(f"expected {n} coordinates, got a scalar")
    return (values,)


def _check_pair(f: Symbol, g: Symbol):
    if f.n != g.n:
        raise DimensionMismatchError(f"dimension mismatch: {f.n} != {g.n}")


def linear_combine(pairs: Iterable[tuple[Scalar, Symbol]], n: Optional[int] = None) -> Symbol:
    pairs = list(pairs)
    if not pairs:
        return Symbol.zero(n or 1)
    dims = {s.n for _, s in pairs}
    if len(dims) != 1 or (n is not None and dims != {n}):
        raise DimensionMismatchError(f"dimension mismatch in linear combination: {sorted(dims)}")
    dim = dims.pop()
    R = symbol_ring(dim)
    poly = R.zero
    for c, s in pairs:
        poly = poly + s.poly.mul_ground(to_gaussian(c))
    tag = ProvenanceTag.combine([s.provenance for _, s in pairs], _has_hbar(poly))
    return Symbol(poly, dim, tag)


class _DerivativeCache:
    """Memoised mixed partials ∂_q^α ∂_p^β of one polynomial."""

    def __init__(self, poly: PolyElement, n: int):
        self.n = n
        self.gens = poly.ring.gens
        self.cache = {(0,) * (2 * n): poly}

    def get(self, orders: tuple) -> PolyElement:
        if orders in self.cache:
            return self.cache[orders]
        k = next(i for i, e in enumerate(orders) if e)
        lower = list(orders)
        lower[k] -= 1
        value = self.get(tuple(lower)).diff(self.gens[1 + k])
        self.cache[orders] = value
        return value


def _compositions(k: int, parts: int):
    """All tuples of ``parts`` non-negative ints summing to k."""
    if parts == 1:
        yield (k,)
        return
    for head in range(k + 1):
        for tail in _compositions(k - head, parts - 1):
            yield (head,) + tail


def _bidifferential(df: _DerivativeCache, dg: _DerivativeCache, k: int) -> PolyElement:
    """Σ_{|α|+|β|=k} (−1)^{|β|}/(α!β!) (∂_q^α ∂_p^β f)(∂_p^α ∂_q^β g), the k-th power of the Poisson bivector."""
    n = df.n
    R = df.gens[0].ring
    total = R.zero
    for m in _compositions(k, 2 * n):
        alpha, beta = m[:n], m[n:]
        left = df.get(alpha + beta)
        if not left:
            continue
        right = dg.get(beta + alpha)
        if not right:
            continue
        weight = Fraction((-1) ** sum(beta), math.prod(math.factorial(e) for e in m))
        total = total + (left * right).mul_ground(to_gaussian(weight))
    return total


def _series_order(f: Symbol, g: Symbol) -> int:
    return max(0, min(f.degree, g.degree))


def star(f: Symbol, g: Symbol) -> Symbol:
    """Moyal product f ⋆ g = Σ_k (iħ/2)^k P^k(f, g); terminates at min(deg f, deg g)."""
    _check_pair(f, g)
    R = f.ring
    df, dg = _DerivativeCache(f.poly, f.n), _DerivativeCache(g.poly, g.n)
    hbar = R.gens[0]
    total = R.zero
    for k in range(_series_order(f, g) + 1):
        term = _bidifferential(df, dg, k)
        if term:
            coeff = QQ_I(0, 1) ** k * QQ_I(QQ(1, 2 ** k))
            total = total + (term * hbar ** k).mul_ground(coeff)
    return f._derived(total, g)


def pbracket(f: Symbol, g: Symbol) -> Symbol:
    """
    p-mechanical bracket (f⋆g − g⋆f)/(iħ).

    Even orders of the star series cancel in the commutator, so only odd k
    survive and the division by iħ is exact term by term:
    Σ_{k odd} (−1)^{(k−1)/2} 2^{1−k} ħ^{k−1} P^k(f, g).
    """
    _check_pair(f, g)
    R = f.ring
    df, dg = _DerivativeCache(f.poly, f.n), _DerivativeCache(g.poly, g.n)
    hbar = R.gens[0]
    total = R.zero
    for k in range(1, _series_order(f, g) + 1, 2):
        term = _bidifferential(df, dg, k)
        if term:
            coeff = Fraction((-1) ** ((k - 1) // 2), 2 ** (k - 1))
            total = total + (term * hbar ** (k - 1)).mul_ground(to_gaussian(coeff))
    return f._derived(total, g)


def poisson(f: Symbol, g: Symbol) -> Symbol:
    _check_pair(f, g)
    df, dg = _DerivativeCache(f.poly, f.n), _DerivativeCache(g.poly, g.n)
    return f._derived(_bidifferential(df, dg, 1), g)


def classical_project(f: Symbol, q0, p0) -> complex:
    """ρ_(q,p) at h=0: drop every ħ-term and evaluate at (q0, p0)."""
    return evaluate(f, PlanckParameter(0.0), q0, p0)


def evaluate(f: Symbol, planck: PlanckParameter, q0, p0) -> complex:
    q0, p0 = _as_points(q0, f.n), _as_points(p0, f.n)
    point = [float(v) for v in q0] + [float(v) for v in p0]
    total = 0j
    for key, coeff in f.numeric_terms(planck.hbar).items():
        total += coeff * math.prod(base ** e for base, e in zip(point, key))
    return total


def _positive(name: str, value) -> Fraction:
    if not value > 0:
        raise PreconditionError(f"{name} must be positive, got {value}")
    return to_fraction(value)


class LadderKind(str, enum.Enum):
    PLUS = "plus"
    MINUS = "minus"


def ladder(kind: Union[LadderKind, str], m, omega) -> Symbol:
    """a⁺ ↦ mωq − ip, a⁻ ↦ mωq + ip."""
    kind = LadderKind(kind)
    mw = _positive("m", m) * _positive("omega", omega)
    sign = -1 if kind is LadderKind.PLUS else 1
    poly = Symbol.q().poly.mul_ground(to_gaussian(mw)) + Symbol.p().poly.mul_ground(to_gaussian(sign * 1j))
    note = "(1/2πi)(mω δ'(x) ∓ i δ'(y))·δ(s)"
    return Symbol(poly, 1, ProvenanceTag(Provenance.QUANTUM, note))


def pmechanise(classical: Symbol) -> Symbol:
    """E∘W_0 on a classical polynomial; the symbol is unchanged, the lineage is recorded."""
    if classical.has_hbar:
        raise PreconditionError("pmechanise expects a classical polynomial without ħ-terms")
    return classical.with_provenance(ProvenanceTag(Provenance.CLASSICAL, "δ(s)·č(x,y)"))


def symplectic_pullback(A, f: Symbol) -> Symbol:
    """Substitute (q, p) := Aᵀ(q, p)."""
    from .heisenberg import SymplecticMatrix
    if not isinstance(A, SymplecticMatrix):
        A = SymplecticMatrix.from_rows(A)
    if A.n != f.n:
        raise DimensionMismatchError(f"matrix acts on n={A.n}, symbol has n={f.n}")
    transpose = [list(col) for col in zip(*A.entries)]
    return f.substitute_affine(transpose)


def hamiltonian_ho(m, omega, n: int = 1) -> Symbol:
    """(mω²/2)Σq_i² + (1/2m)Σp_i²"""
    m_, w_ = _positive("m", m), _positive("omega", omega)
    terms = {}
    for i in range(n):
        q_sq = [0] * (2 * n + 1)
        p_sq = [0] * (2 * n + 1)
        q_sq[1 + i] = 2
        p_sq[1 + n + i] = 2
        terms[tuple(q_sq)] = m_ * w_ ** 2 / 2
        terms[tuple(p_sq)] = 1 / (2 * m_)
    return Symbol.from_terms(terms, n, ProvenanceTag(Provenance.CLASSICAL, "δ(s)·Ȟ(x,y)"))


def monomials_up_to(degree: int, n: int = 1) -> list[tuple]:
    """All (q,p)-exponent tuples of total degree ≤ degree."""
    out = []
    for total in range(degree + 1):
        out.extend(_compositions(total, 2 * n))
    return out


__all__ = [
    'Provenance', 'ProvenanceTag', 'PlanckParameter', 'Symbol', 'LadderKind',
    'symbol_ring', 'to_gaussian', 'to_fraction', 'gaussian_to_complex', 'gaussian_parts',
    'linear_combine', 'star', 'pbracket', 'poisson', 'classical_project', 'evaluate',
    'ladder', 'pmechanise', 'symplectic_pullback', 'hamiltonian_ho', 'monomials_up_to',
]
