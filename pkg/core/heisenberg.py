"""
Exact arithmetic of the Heisenberg group H^n and its symplectic automorphisms.

Points are kept in exponential coordinates (s, x, y) with rational entries,
so every group identity holds bit-exactly.
"""
from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from utils.exception import DimensionMismatchError, NotSymplecticError

logger = logging.getLogger(__name__)

Rational = Union[int, Fraction, str]


def _rational(value) -> Fraction:
    # floats convert exactly, not through their decimal repr
    return Fraction(value)


def _vector(values: Iterable) -> tuple[Fraction, ...]:
    return tuple(_rational(v) for v in values)


def _dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def _check_same_n(*lengths: int):
    if len(set(lengths)) != 1:
        raise DimensionMismatchError(f"dimension mismatch: {lengths}")


@dataclass(frozen=True)
class GroupElement:
    s: Fraction
    x: tuple[Fraction, ...]
    y: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.x) == 0:
            raise ValueError("GroupElement needs n >= 1")
        if len(self.x) != len(self.y):
            raise DimensionMismatchError(f"x and y have different lengths: {len(self.x)} != {len(self.y)}")

    @classmethod
    def from_values(cls, s: Rational, x, y) -> "GroupElement":
        if not isinstance(x, (list, tuple)):
            x = (x,)
        if not isinstance(y, (list, tuple)):
            y = (y,)
        return cls(s=_rational(s), x=_vector(x), y=_vector(y))

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def is_central(self) -> bool:
        return all(v == 0 for v in self.x + self.y)

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return multiply(self, other)


def identity(n: int = 1) -> GroupElement:
    zero = (Fraction(0),) * n
    return GroupElement(Fraction(0), zero, zero)


def symplectic_form(z1: Sequence, z2: Sequence) -> Fraction:
    """ω(x1,y1; x2,y2) = x1·y2 − x2·y1 for 2n-vectors laid out as (x, y)."""
    _check_same_n(len(z1), len(z2))
    if len(z1) % 2:
        raise DimensionMismatchError(f"symplectic vectors need even length, got {len(z1)}")
    n = len(z1) // 2
    u, v = _vector(z1), _vector(z2)
    return _dot(u[:n], v[n:]) - _dot(v[:n], u[n:])


def multiply(g1: GroupElement, g2: GroupElement) -> GroupElement:
    _check_same_n(g1.n, g2.n)
    omega = _dot(g1.x, g2.y) - _dot(g2.x, g1.y)
    return GroupElement(
        s=g1.s + g2.s + omega / 2,
        x=tuple(a + b for a, b in zip(g1.x, g2.x)),
        y=tuple(a + b for a, b in zip(g1.y, g2.y)),
    )


def inverse(g: GroupElement) -> GroupElement:
    return GroupElement(-g.s, tuple(-v for v in g.x), tuple(-v for v in g.y))


def commutator(g1: GroupElement, g2: GroupElement) -> GroupElement:
    """g1 g2 g1⁻¹ g2⁻¹, always central and equal to (ω(g1, g2), 0, 0)."""
    return multiply(multiply(g1, g2), multiply(inverse(g1), inverse(g2)))


def character(g: GroupElement, q: Sequence[float], p: Sequence[float]) -> complex:
    """One-dimensional representation ρ_(q,p)(s,x,y) = exp(−2πi(q·x + p·y))."""
    _check_same_n(g.n, len(q), len(p))
    phase = sum(float(a) * b for a, b in zip(g.x, q)) + sum(float(a) * b for a, b in zip(g.y, p))
    return cmath.exp(-2j * math.pi * phase)


@dataclass(frozen=True)
class LieElement:
    """Element c_S·S + Σ c_X·X_j + Σ c_Y·Y_j of the Heisenberg Lie algebra."""
    S: Fraction
    X: tuple[Fraction, ...]
    Y: tuple[Fraction, ...]

    def __post_init__(self):
        _check_same_n(len(self.X), len(self.Y))

    @classmethod
    def from_values(cls, S: Rational, X, Y) -> "LieElement":
        X = X if isinstance(X, (list, tuple)) else (X,)
        Y = Y if isinstance(Y, (list, tuple)) else (Y,)
        return cls(_rational(S), _vector(X), _vector(Y))


def lie_bracket(a: LieElement, b: LieElement) -> LieElement:
    """[X_i, Y_j] = δ_ij S; S is central."""
    _check_same_n(len(a.X), len(b.X))
    n = len(a.X)
    s = _dot(a.X, b.Y) - _dot(b.X, a.Y)
    zero = (Fraction(0),) * n
    return LieElement(s, zero, zero)


def exp_map(a: LieElement) -> GroupElement:
    # exponential coordinates
    return GroupElement(a.S, a.X, a.Y)


@dataclass(frozen=True)
class SymplecticMatrix:
    entries: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        if not is_symplectic(self.entries):
            raise NotSymplecticError("matrix does not preserve the symplectic form")

    @classmethod
    def from_rows(cls, rows) -> "SymplecticMatrix":
        return cls(tuple(_vector(row) for row in rows))

    @property
    def n(self) -> int:
        return len(self.entries) // 2

    def apply(self, z: Sequence) -> tuple[Fraction, ...]:
        _check_same_n(len(z), len(self.entries))
        z = _vector(z)
        return tuple(_dot(row, z) for row in self.entries)

    def transpose(self) -> "SymplecticMatrix":
        return SymplecticMatrix(tuple(zip(*self.entries)))

    def apply_transpose(self, z: Sequence) -> tuple[Fraction, ...]:
        _check_same_n(len(z), len(self.entries))
        z = _vector(z)
        size = len(self.entries)
        return tuple(sum((self.entries[i][j] * z[i] for i in range(size)), Fraction(0)) for j in range(size))

    def __matmul__(self, other: "SymplecticMatrix") -> "SymplecticMatrix":
        _check_same_n(len(self.entries), len(other.entries))
        cols = list(zip(*other.entries))
        return SymplecticMatrix(tuple(tuple(_dot(row, col) for col in cols) for row in self.entries))

    def inverse(self) -> "SymplecticMatrix":
        # A⁻¹ = −J Aᵀ J for symplectic A
        J = _standard_j(self.n)
        minus_j = SymplecticMatrix(tuple(tuple(-v for v in row) for row in J.entries))
        return minus_j @ self.transpose() @ J

    def to_float(self):
        return [[float(v) for v in row] for row in self.entries]


def is_symplectic(matrix) -> bool:
    rows = [_vector(r) for r in (matrix.entries if isinstance(matrix, SymplecticMatrix) else matrix)]
    size = len(rows)
    if size == 0 or any(len(r) != size for r in rows):
        raise ValueError(f"is_symplectic needs a square matrix, got {size} rows of lengths {[len(r) for r in rows]}")
    if size % 2:
        return False
    cols = list(zip(*rows))
    for i in range(size):
        for j in range(i + 1, size):
            e_i = [Fraction(int(k == i)) for k in range(size)]
            e_j = [Fraction(int(k == j)) for k in range(size)]
            if symplectic_form(cols[i], cols[j]) != symplectic_form(e_i, e_j):
                return False
    return True


def _unit_rows(n: int) -> list[list[Fraction]]:
    size = 2 * n
    return [[Fraction(int(r == c)) for c in range(size)] for r in range(size)]


def _standard_j(n: int) -> SymplecticMatrix:
    size = 2 * n
    rows = [[Fraction(0)] * size for _ in range(size)]
    for k in range(n):
        rows[k][n + k] = Fraction(1)
        rows[n + k][k] = Fraction(-1)
    return SymplecticMatrix(tuple(tuple(r) for r in rows))


def shear(n: int, i: int, t: Rational) -> SymplecticMatrix:
    """x_i += t·y_i; for n=1 and t=1 this is [[1,1],[0,1]]."""
    rows = _unit_rows(n)
    rows[i][n + i] += _rational(t)
    return SymplecticMatrix(tuple(tuple(r) for r in rows))


def lower_shear(n: int, i: int, t: Rational) -> SymplecticMatrix:
    """y_i += t·x_i"""
    rows = _unit_rows(n)
    rows[n + i][i] += _rational(t)
    return SymplecticMatrix(tuple(tuple(r) for r in rows))


def coupled_shear(n: int, i: int, j: int, t: Rational) -> SymplecticMatrix:
    """y_i += t·x_j and y_j += t·x_i, coupling two degrees of freedom."""
    rows = _unit_rows(n)
    t = _rational(t)
    rows[n + i][j] += t
    rows[n + j][i] += t
    return SymplecticMatrix(tuple(tuple(r) for r in rows))


def quarter_turn(n: int = 1) -> SymplecticMatrix:
    """Rotation by 90°: (x, y) ↦ (−y, x)."""
    size = 2 * n
    rows = [[Fraction(0)] * size for _ in range(size)]
    for k in range(n):
        rows[k][n + k] = Fraction(-1)
        rows[n + k][k] = Fraction(1)
    return SymplecticMatrix(tuple(tuple(r) for r in rows))


def identity_matrix(n: int = 1) -> SymplecticMatrix:
    size = 2 * n
    return SymplecticMatrix(tuple(tuple(Fraction(int(r == c)) for c in range(size)) for r in range(size)))


def apply_automorphism(A: SymplecticMatrix, g: GroupElement) -> GroupElement:
    _check_same_n(A.n, g.n)
    z = A.apply(g.x + g.y)
    return GroupElement(g.s, z[:g.n], z[g.n:])


@dataclass(frozen=True)
class AdjointPoint:
    h: Fraction
    q: tuple[Fraction, ...]
    p: tuple[Fraction, ...]

    def __post_init__(self):
        _check_same_n(len(self.q), len(self.p))

    @classmethod
    def from_values(cls, h: Rational, q, p) -> "AdjointPoint":
        q = q if isinstance(q, (list, tuple)) else (q,)
        p = p if isinstance(p, (list, tuple)) else (p,)
        return cls(_rational(h), _vector(q), _vector(p))

    @property
    def n(self) -> int:
        return len(self.q)


def adjoint_action(A: SymplecticMatrix, pt: AdjointPoint) -> AdjointPoint:
    """(h, q, p) ↦ (h, Aᵀ(q, p)); every h-slice is invariant."""
    _check_same_n(A.n, pt.n)
    z = A.apply_transpose(pt.q + pt.p)
    return AdjointPoint(pt.h, z[:pt.n], z[pt.n:])


def coadjoint_action(g: GroupElement, pt: AdjointPoint) -> AdjointPoint:
    """Co-adjoint representation: (h, q, p) ↦ (h, q + h·y, p − h·x)."""
    _check_same_n(g.n, pt.n)
    return AdjointPoint(
        pt.h,
        tuple(q + pt.h * y for q, y in zip(pt.q, g.y)),
        tuple(p - pt.h * x for p, x in zip(pt.p, g.x)),
    )
