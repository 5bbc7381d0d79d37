import pytest
from hypothesis import given, settings

from core.distributions import (PointDistribution, antiderivative, commutator, convolve,
                                distributional_bracket)
from core.parser import parse_symbol
from core.symbols import Symbol, ladder, pbracket, star
from utils.exception import PreconditionError
from .conftest import small_symbols


def D(text, n=1):
    return parse_symbol(text, n).to_distribution()


def test_basis_fourier_image():
    assert PointDistribution.basis((1, 2, 0)).to_symbol() == parse_symbol("hbar*q^2")


def test_convolution_of_shift_generators():
    assert convolve(D("q"), D("p")).to_symbol() == parse_symbol("q*p + 1/2*i*hbar")
    assert convolve(D("p"), D("q")).to_symbol() == parse_symbol("q*p - 1/2*i*hbar")
    assert commutator(D("q"), D("p")).to_symbol() == parse_symbol("i*hbar")


@given(small_symbols(2), small_symbols(2))
@settings(max_examples=40, deadline=None)
def test_convolution_matches_star_product(f, g):
    assert convolve(f.to_distribution(), g.to_distribution()).to_symbol() == star(f, g)


@given(small_symbols(2), small_symbols(2))
@settings(max_examples=40, deadline=None)
def test_distributional_bracket_matches_pbracket(f, g):
    assert distributional_bracket(f.to_distribution(), g.to_distribution()).to_symbol() == pbracket(f, g)


def test_ladder_bracket_factor():
    for m, w in ((1, 1), (2, 3)):
        bracket = distributional_bracket(ladder("plus", m, w).to_distribution(),
                                         ladder("minus", m, w).to_distribution())
        assert bracket.to_symbol() == Symbol.constant(2j * m * w)


def test_shift_generator_brackets():
    f = parse_symbol("q^2*p + p^3")
    assert distributional_bracket(D("q"), f.to_distribution()).to_symbol() == f.diff_p()
    assert distributional_bracket(D("p"), f.to_distribution()).to_symbol() == -f.diff_q()


def test_two_dimensional_convolution():
    q1, p1, p2 = D("q1", 2), D("p1", 2), D("p2", 2)
    assert convolve(q1, p2) == convolve(p2, q1)
    assert commutator(q1, p1).to_symbol() == parse_symbol("i*hbar", 2)


def test_antiderivative_needs_central_derivative():
    assert antiderivative(D("hbar*q")).to_symbol() == parse_symbol("-i*q")
    with pytest.raises(PreconditionError):
        antiderivative(D("q + hbar"))


def test_describe():
    assert "δ'(x)" in D("q").describe()
    assert PointDistribution.from_symbol(Symbol.zero()).describe() == "0"
