from fractions import Fraction
from typing import Optional

import pytest
from hypothesis import strategies as st

from core.fock import default_grid, make_grid
from core.symbols import PlanckParameter, Symbol

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)


def group_points(n: int = 1):
    from core.heisenberg import GroupElement
    return st.builds(
        lambda s, x, y: GroupElement(s, tuple(x), tuple(y)),
        rationals,
        st.lists(rationals, min_size=n, max_size=n),
        st.lists(rationals, min_size=n, max_size=n),
    )


def small_symbols(max_degree: int = 3, max_total: Optional[int] = None):
    """Random classical polynomials in (q, p) with small rational coefficients."""
    monomials = st.tuples(st.just(0), st.integers(0, max_degree), st.integers(0, max_degree))
    if max_total is not None:
        monomials = monomials.filter(lambda m: m[1] + m[2] <= max_total)
    terms = st.dictionaries(
        monomials,
        st.fractions(min_value=-5, max_value=5, max_denominator=4),
        max_size=4,
    )
    return terms.map(lambda t: Symbol.from_terms({m: c for m, c in t.items() if c}))


@pytest.fixture
def planck():
    return PlanckParameter(1.0)


@pytest.fixture
def grid(planck):
    return default_grid(planck)


@pytest.fixture
def small_grid():
    return make_grid(128, 4.0)


@pytest.fixture
def q():
    return Symbol.q()


@pytest.fixture
def p():
    return Symbol.p()


@pytest.fixture
def half():
    return Fraction(1, 2)
