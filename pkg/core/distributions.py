"""
Point distributions on H^n: finite sums of δ-derivatives at the identity.

Coefficients are stored against the normalised basis

    E_(k,a,b) = δ^(k)(s) δ^(a)(x) δ^(b)(y) / ((2πi)^|a+b| (4π²i)^k),

whose full Fourier transform is exactly ħ^k q^a p^b. Convolution is computed
directly from the group law by pairing with polynomial test functions, so it
gives an independent route to the star product and the p-mechanical bracket.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from sympy.polys.domains import QQ, QQ_I
from sympy.polys.rings import PolyElement, ring

from utils.exception import DimensionMismatchError, PreconditionError
from .symbols import Provenance, ProvenanceTag, Symbol, gaussian_parts, symbol_ring, to_gaussian

logger = logging.getLogger(__name__)


@lru_cache(maxsize=None)
def _pair_ring(n: int):
    """Polynomial ring in the coordinates of two group points (s1, x1, y1, s2, x2, y2)."""
    names = (["s1"] + [f"x1_{i}" for i in range(n)] + [f"y1_{i}" for i in range(n)]
             + ["s2"] + [f"x2_{i}" for i in range(n)] + [f"y2_{i}" for i in range(n)])
    R, *gens = ring(",".join(names), QQ)
    size = 2 * n + 1
    s1, x1, y1 = gens[0], gens[1:1 + n], gens[1 + n:size]
    s2, x2, y2 = gens[size], gens[size + 1:size + 1 + n], gens[size + 1 + n:]
    product_s = s1 + s2 + sum(((x1[i] * y2[i] - x2[i] * y1[i]) for i in range(n)), R.zero).mul_ground(QQ(1, 2))
    product_x = [x1[i] + x2[i] for i in range(n)]
    product_y = [y1[i] + y2[i] for i in range(n)]
    return R, product_s, product_x, product_y


def _factorial_product(exponents) -> int:
    return math.prod(math.factorial(e) for e in exponents)


@lru_cache(maxsize=4096)
def convolve_basis(m1: tuple, m2: tuple, n: int) -> dict:
    """E_m1 * E_m2 as {monomial: Gaussian rational}, from ⟨u*v, φ⟩ = ⟨u⊗v, φ(g1·g2)⟩."""
    R, S, X, Y = _pair_ring(n)
    k1, a1, b1 = m1[0], m1[1:1 + n], m1[1 + n:]
    k2, a2, b2 = m2[0], m2[1:1 + n], m2[1 + n:]
    target = tuple(m1) + tuple(m2)
    scale = _factorial_product(m1) * _factorial_product(m2)
    out = {}
    ranges = [range(min(a1[i] + a2[i], b1[i] + b2[i]) + 1) for i in range(n)]
    for j in itertools.product(*ranges):
        K = k1 + k2 + sum(j)
        A = tuple(a1[i] + a2[i] - j[i] for i in range(n))
        B = tuple(b1[i] + b2[i] - j[i] for i in range(n))
        test = S ** K
        for i in range(n):
            test = test * X[i] ** A[i] * Y[i] ** B[i]
        coeff = test.get(target, QQ.zero)
        if not coeff:
            continue
        weight = Fraction(int(coeff.numerator), int(coeff.denominator)) * Fraction(scale, _factorial_product((K,) + A + B))
        # (−1)^|j| from the δ-pairing signs times (−i)^|j| from the basis normalisation
        value = QQ_I(0, 1) ** sum(j) * to_gaussian(weight)
        key = (K,) + A + B
        out[key] = out.get(key, QQ_I.zero) + value
    return {key: value for key, value in out.items() if value}


@dataclass(frozen=True, eq=False)
class PointDistribution:
    poly: PolyElement
    n: int = 1

    @classmethod
    def from_symbol(cls, symbol: Symbol) -> "PointDistribution":
        return cls(symbol.poly, symbol.n)

    @classmethod
    def basis(cls, monomial: tuple, n: int = 1) -> "PointDistribution":
        if len(monomial) != 2 * n + 1:
            raise DimensionMismatchError(f"monomial {monomial} does not fit n={n}")
        return cls(symbol_ring(n).from_dict({tuple(monomial): QQ_I.one}), n)

    def to_symbol(self) -> Symbol:
        has_hbar = any(m[0] for m in self.poly.keys())
        origin = Provenance.QUANTUM if has_hbar else Provenance.CLASSICAL
        return Symbol(self.poly, self.n, ProvenanceTag(origin, "Fourier image of a point distribution"))

    def __add__(self, other: "PointDistribution") -> "PointDistribution":
        self._check(other)
        return PointDistribution(self.poly + other.poly, self.n)

    def __sub__(self, other: "PointDistribution") -> "PointDistribution":
        self._check(other)
        return PointDistribution(self.poly - other.poly, self.n)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointDistribution):
            return NotImplemented
        return self.n == other.n and self.poly == other.poly

    def __hash__(self) -> int:
        return hash((self.n, frozenset(self.poly.items())))

    def _check(self, other: "PointDistribution"):
        if self.n != other.n:
            raise DimensionMismatchError(f"dimension mismatch: {self.n} != {other.n}")

    def describe(self) -> str:
        """Human-readable δ-form, e.g. '1·(2πi)^-1·δ(s)δ'(x)δ(y)'."""
        if not self.poly:
            return "0"
        pieces = []
        for monom in sorted(self.poly.keys()):
            re_part, im_part = gaussian_parts(self.poly[monom])
            coeff = str(re_part) if im_part == 0 else f"({re_part}+{im_part}i)"
            k, rest = monom[0], monom[1:]
            a, b = rest[:self.n], rest[self.n:]
            norm = []
            if sum(a) + sum(b):
                norm.append(f"(2πi)^-{sum(a) + sum(b)}")
            if k:
                norm.append(f"(4π²i)^-{k}")
            factors = [_delta_text("s", k)]
            factors += [_delta_text(f"x{i + 1}" if self.n > 1 else "x", e) for i, e in enumerate(a)]
            factors += [_delta_text(f"y{i + 1}" if self.n > 1 else "y", e) for i, e in enumerate(b)]
            pieces.append("·".join([coeff] + norm + ["".join(factors)]))
        return " + ".join(pieces)


def _delta_text(var: str, order: int) -> str:
    primes = {0: "", 1: "'", 2: "''"}
    return f"δ{primes.get(order, f'^({order})')}({var})"


def convolve(u: PointDistribution, v: PointDistribution) -> PointDistribution:
    u._check(v)
    R = symbol_ring(u.n)
    total = {}
    for m1, c1 in u.poly.items():
        for m2, c2 in v.poly.items():
            for key, value in convolve_basis(m1, m2, u.n).items():
                total[key] = total.get(key, QQ_I.zero) + c1 * c2 * value
    return PointDistribution(R.from_dict(total), u.n)


def commutator(u: PointDistribution, v: PointDistribution) -> PointDistribution:
    return convolve(u, v) - convolve(v, u)


def antiderivative(u: PointDistribution) -> PointDistribution:
    """
    Right inverse of the central field on point distributions: δ^(k)(s) ↦ 4π²δ^(k−1)(s).

    In the normalised basis this is E_(k,a,b) ↦ −i·E_(k−1,a,b). Only defined
    when every term carries at least one s-derivative.
    """
    R = symbol_ring(u.n)
    out = {}
    minus_i = QQ_I(0, -1)
    for monom, coeff in u.poly.items():
        if monom[0] == 0:
            raise PreconditionError("antiderivative needs an s-derivative in every term")
        out[(monom[0] - 1,) + monom[1:]] = coeff * minus_i
    return PointDistribution(R.from_dict(out), u.n)


def distributional_bracket(u: PointDistribution, v: PointDistribution) -> PointDistribution:
    """{[u, v]} = 𝒜(u*v − v*u), computed on H^n without the symbol calculus."""
    c = commutator(u, v)
    if not c.poly:
        return c
    return antiderivative(c)


__all__ = [
    'PointDistribution', 'convolve', 'convolve_basis', 'commutator',
    'antiderivative', 'distributional_bracket',
]
