"""
Expression grammar for symbols and their canonical printed form.

    expr   := term (('+'|'-') term)*
    term   := ('+'|'-')? factor ('*' factor)*
    factor := base ('^' uint)?
    base   := rational | decimal | 'i' | 'hbar' | var | '(' expr ')'
    var    := ('q'|'p') uint?        unindexed q, p only when n = 1

Printing produces text this grammar reads back to the same symbol.
"""
import logging
import re
from fractions import Fraction

from parsimonious.exceptions import ParseError
from parsimonious.expressions import Compound
from parsimonious.grammar import Grammar
from parsimonious.nodes import NodeVisitor

from utils.exception import NonIntegerExponentError, SymbolParseError, UnknownVariableError
from .symbols import Provenance, ProvenanceTag, Symbol, gaussian_parts, symbol_ring, to_gaussian

logger = logging.getLogger(__name__)

SYMBOL_GRAMMAR = Grammar(r"""
    expression = _ sum _ end
    sum        = term (_ addop _ term)*
    addop      = "+" / "-"
    term       = sign? _ product
    sign       = "+" / "-"
    product    = power (_ "*" _ power)*
    power      = base (_ "^" _ exponent)?
    exponent   = ~r"[0-9]+(\.[0-9]*)?|[A-Za-z_][A-Za-z_0-9]*"
    base       = rational / decimal / name / group
    group      = "(" _ sum _ ")"
    rational   = ~r"[0-9]+/[0-9]+"
    decimal    = ~r"[0-9]+(\.[0-9]+)?|\.[0-9]+"
    name       = ~r"[A-Za-z_][A-Za-z_0-9]*"
    _          = ~r"[ \t]*"
    end        = !~r"[\s\S]"
""")

_INDEXED = re.compile(r"^([qp])([0-9]+)?$")


class SymbolVisitor(NodeVisitor):
    """Builds the polynomial bottom-up from the parse tree."""
    unwrapped_exceptions = (SymbolParseError,)

    def __init__(self, text: str, n: int):
        self.text = text
        self.n = n
        self.ring = symbol_ring(n)

    def generic_visit(self, node, visited_children):
        return visited_children if isinstance(node.expr, Compound) else node

    def visit_expression(self, node, visited_children):
        _, value, _, _ = visited_children
        return value

    def visit_sum(self, node, visited_children):
        first, rest = visited_children
        total = first
        for _, op, _, term in rest:
            total = total + term if op == "+" else total - term
        return total

    def visit_addop(self, node, visited_children):
        return node.text

    def visit_sign(self, node, visited_children):
        return node.text

    def visit_term(self, node, visited_children):
        sign, _, value = visited_children
        if sign and sign[0] == "-":
            return -value
        return value

    def visit_product(self, node, visited_children):
        first, rest = visited_children
        total = first
        for _, _, _, factor in rest:
            total = total * factor
        return total

    def visit_power(self, node, visited_children):
        base, exponent = visited_children
        if not exponent:
            return base
        _, _, _, e = exponent[0]
        return base ** e

    def visit_exponent(self, node, visited_children):
        if not node.text.isdigit():
            raise NonIntegerExponentError(f"non-integer exponent {node.text!r}", self.text, node.start)
        return int(node.text)

    def visit_base(self, node, visited_children):
        return visited_children[0]

    def visit_group(self, node, visited_children):
        return visited_children[2]

    def visit_rational(self, node, visited_children):
        value = Fraction(node.text)
        return self.ring.ground_new(to_gaussian(value))

    def visit_decimal(self, node, visited_children):
        # Fraction reads decimal text exactly
        return self.ring.ground_new(to_gaussian(Fraction(node.text)))

    def visit_name(self, node, visited_children):
        name = node.text
        gens = self.ring.gens
        if name == "i":
            return self.ring.ground_new(to_gaussian(1j))
        if name == "hbar":
            return gens[0]
        match = _INDEXED.match(name)
        if match:
            axis, index = match.group(1), match.group(2)
            if index is None and self.n == 1:
                index = 1
            elif index is not None:
                index = int(index)
            if index is not None and 1 <= index <= self.n:
                return gens[index] if axis == "q" else gens[self.n + index]
        raise UnknownVariableError(f"unknown variable {name!r} for n={self.n}", self.text, node.start)


def parse_symbol(text: str, n: int = 1) -> Symbol:
    if not isinstance(text, str):
        raise TypeError(f"expected text, got {type(text).__name__}")
    try:
        tree = SYMBOL_GRAMMAR.parse(text)
    except ParseError as e:
        raise SymbolParseError("syntax error", text, e.pos) from None
    poly = SymbolVisitor(text, n).visit(tree)
    logger.debug(f"parsed {text!r} into {len(poly)} terms")
    return Symbol(poly, n, ProvenanceTag(Provenance.RAW, f"parsed from {text!r}"))


def monomial_order(monom: tuple):
    """Sort key: descending (q,p)-degree, then ascending ħ-power, then descending exponents."""
    k, rest = monom[0], monom[1:]
    return (-sum(rest), k, tuple(-e for e in rest))


def _variable_names(n: int) -> list[str]:
    if n == 1:
        return ["q", "p"]
    return [f"q{i}" for i in range(1, n + 1)] + [f"p{i}" for i in range(1, n + 1)]


def _coefficient_text(re_part: Fraction, im_part: Fraction) -> tuple[str, str]:
    """(sign, body) for a coefficient; body is '1' for unit real coefficients."""
    if im_part == 0:
        return ("-" if re_part < 0 else "+"), str(abs(re_part))
    if re_part == 0:
        magnitude = abs(im_part)
        body = "i" if magnitude == 1 else f"{magnitude}*i"
        return ("-" if im_part < 0 else "+"), body
    op = "-" if im_part < 0 else "+"
    im_body = "i" if abs(im_part) == 1 else f"{abs(im_part)}*i"
    return "+", f"({re_part} {op} {im_body})"


def format_symbol(symbol: Symbol) -> str:
    """Canonical text: descending (q,p)-degree, then ascending ħ-power; exact coefficients."""
    if symbol.is_zero:
        return "0"
    names = _variable_names(symbol.n)
    pieces = []
    for monom in sorted(symbol.poly.keys(), key=monomial_order):
        sign, body = _coefficient_text(*gaussian_parts(symbol.poly[monom]))
        factors = [name if e == 1 else f"{name}^{e}" for name, e in zip(names, monom[1:]) if e]
        if monom[0]:
            factors.append("hbar" if monom[0] == 1 else f"hbar^{monom[0]}")
        if factors and body == "1":
            text = "*".join(factors)
        else:
            text = "*".join([body] + factors)
        pieces.append((sign, text))
    first_sign, first_text = pieces[0]
    out = ("-" if first_sign == "-" else "") + first_text
    for sign, text in pieces[1:]:
        out += f" {sign} {text}"
    return out


def monomial_label(monom: tuple, n: int = 1) -> str:
    """Column label such as 'q^1 p^0 hbar^0'."""
    names = _variable_names(n)
    parts = [f"{name}^{e}" for name, e in zip(names, monom[1:])]
    parts.append(f"hbar^{monom[0]}")
    return " ".join(parts)


__all__ = ['parse_symbol', 'format_symbol', 'monomial_label', 'monomial_order', 'SYMBOL_GRAMMAR']
