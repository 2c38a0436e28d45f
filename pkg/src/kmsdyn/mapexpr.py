"""Recursive-descent parser for rational-map expressions.

Grammar over {z, i, exact decimal/integer literals, + - * / ^, parentheses},
with integer exponents.  Expressions evaluate to a pair of coprime
polynomials over the Gaussian rationals, so degree and coprimality are exact
decisions; floats enter only when the resulting map does numeric work.

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-')* power
    power  := atom ('^' signed_int)?
    atom   := NUMBER | 'i' | 'z' | '(' expr ')'
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import exact as xq
from .errors import DivisionByZeroPolynomial, MapSyntaxError
from .ratmap import RationalMap


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Num:
    value: xq.QG


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Unary:
    op: str  # '-'
    operand: object


@dataclass(frozen=True)
class Binary:
    op: str  # '+', '-', '*', '/'
    left: object
    right: object


@dataclass(frozen=True)
class Power:
    base: object
    exponent: int


@dataclass(frozen=True)
class MapExpression:
    source: str
    ast: object

    def __str__(self):
        return to_string(self.ast)


# ---------------------------------------------------------------------------
# tokenizer


_OPS = set("+-*/^()")


def _tokenize(source: str):
    tokens = []  # (kind, value, position)
    pos = 0
    n = len(source)
    while pos < n:
        ch = source[pos]
        if ch.isspace():
            pos += 1
            continue
        if ch in _OPS:
            tokens.append((ch, ch, pos))
            pos += 1
            continue
        if ch.isdigit() or (ch == "." and pos + 1 < n and source[pos + 1].isdigit()):
            start = pos
            seen_dot = False
            while pos < n and (source[pos].isdigit() or (source[pos] == "." and not seen_dot)):
                seen_dot = seen_dot or source[pos] == "."
                pos += 1
            tokens.append(("num", source[start:pos], start))
            continue
        if ch == "z":
            tokens.append(("z", ch, pos))
            pos += 1
            continue
        if ch == "i":
            tokens.append(("i", ch, pos))
            pos += 1
            continue
        raise MapSyntaxError(f"unexpected character {ch!r}", pos)
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = _tokenize(source)
        self.k = 0

    def peek(self):
        return self.tokens[self.k]

    def advance(self):
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def expect(self, kind):
        tok = self.advance()
        if tok[0] != kind:
            raise MapSyntaxError(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        return tok

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise MapSyntaxError(f"unexpected trailing input {tok[1]!r}", tok[2])
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.advance()[0]
            node = Binary(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] in ("*", "/"):
            op = self.advance()[0]
            node = Binary(op, node, self.unary())
        return node

    def unary(self):
        signs = 0
        while self.peek()[0] in ("+", "-"):
            if self.advance()[0] == "-":
                signs += 1
        node = self.power()
        if signs % 2:
            node = Unary("-", node)
        return node

    def power(self):
        node = self.atom()
        if self.peek()[0] == "^":
            self.advance()
            node = Power(node, self.signed_int())
        return node

    def signed_int(self):
        sign = 1
        tok = self.peek()
        if tok[0] in ("+", "-"):
            self.advance()
            sign = -1 if tok[0] == "-" else 1
        tok = self.expect("num")
        if "." in tok[1]:
            raise MapSyntaxError("exponent must be an integer", tok[2])
        return sign * int(tok[1])

    def atom(self):
        tok = self.advance()
        kind, text, pos = tok
        if kind == "num":
            return Num(xq.QG(Fraction(text)))
        if kind == "i":
            return Num(xq.QG_I)
        if kind == "z":
            return Var()
        if kind == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise MapSyntaxError(f"unexpected token {text!r}", pos)


def parse_expression(source: str) -> MapExpression:
    return MapExpression(source=source, ast=_Parser(source).parse())


# ---------------------------------------------------------------------------
# printing (minimal parentheses; print -> parse round-trips to the same AST)


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "pow": 4, "atom": 5}


def _prec(node) -> int:
    if isinstance(node, Binary):
        return _PREC[node.op]
    if isinstance(node, Unary):
        return _PREC["neg"]
    if isinstance(node, Power):
        return _PREC["pow"]
    return _PREC["atom"]


def _exact_decimal(q: Fraction) -> str | None:
    """Exact decimal text when the denominator is 2^a 5^b, else None."""
    den = q.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return None
    k = max(twos, fives)
    scaled = q.numerator * 10**k // q.denominator
    text = str(abs(scaled)).rjust(k + 1, "0")
    body = text if k == 0 else f"{text[:-k]}.{text[-k:]}"
    return ("-" if scaled < 0 else "") + body


def _format_qg(v: xq.QG) -> str:
    def frac(q: Fraction) -> str:
        if q.denominator == 1:
            return str(q.numerator)
        # decimal literals reparse to the identical Num node; a/b would not
        dec = _exact_decimal(q)
        return dec if dec is not None else f"{q.numerator}/{q.denominator}"

    if not v.im:
        return frac(v.re)
    if not v.re:
        return "i" if v.im == 1 else f"{frac(v.im)}*i"
    im = "i" if v.im == 1 else f"{frac(v.im)}*i"
    return f"{frac(v.re)}+{im}"


def to_string(node) -> str:
    if isinstance(node, Num):
        text = _format_qg(node.value)
        # negative or composite literals reparse only when parenthesized
        if text.startswith("-") or "+" in text[1:] or "/" in text or "*" in text:
            return f"({text})"
        return text
    if isinstance(node, Var):
        return "z"
    if isinstance(node, Unary):
        inner = to_string(node.operand)
        # a nested negation must keep its parentheses: the tokenizer would
        # otherwise collapse the sign chain into the literal
        if _prec(node.operand) <= _PREC["neg"]:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, Power):
        base = to_string(node.base)
        if _prec(node.base) < _PREC["pow"] or isinstance(node.base, Power):
            base = f"({base})"
        return f"{base}^{node.exponent}"
    if isinstance(node, Binary):
        lhs = to_string(node.left)
        rhs = to_string(node.right)
        if _prec(node.left) < _PREC[node.op]:
            lhs = f"({lhs})"
        # the parser is left-associative, so an equal-precedence right child
        # needs parentheses to reparse to the identical tree
        if _prec(node.right) <= _PREC[node.op]:
            rhs = f"({rhs})"
        return f"{lhs}{node.op}{rhs}"
    raise TypeError(f"not an AST node: {node!r}")


# ---------------------------------------------------------------------------
# evaluation to a rational map


def _eval_ratfunc(node):
    """Evaluate to (numerator, denominator) over Q(i)[z]."""
    if isinstance(node, Num):
        return [node.value], [xq.QG_ONE]
    if isinstance(node, Var):
        return [xq.QG_ZERO, xq.QG_ONE], [xq.QG_ONE]
    if isinstance(node, Unary):
        n, d = _eval_ratfunc(node.operand)
        return [-c for c in n], d
    if isinstance(node, Power):
        n, d = _eval_ratfunc(node.base)
        e = node.exponent
        if e >= 0:
            return xq.xp_pow(n, e), xq.xp_pow(d, e)
        if not xq.xp_trim(list(n)):
            raise DivisionByZeroPolynomial("zero raised to a negative power")
        return xq.xp_pow(d, -e), xq.xp_pow(n, -e)
    if isinstance(node, Binary):
        an, ad = _eval_ratfunc(node.left)
        bn, bd = _eval_ratfunc(node.right)
        if node.op == "+":
            return xq.xp_add(xq.xp_mul(an, bd), xq.xp_mul(bn, ad)), xq.xp_mul(ad, bd)
        if node.op == "-":
            return xq.xp_sub(xq.xp_mul(an, bd), xq.xp_mul(bn, ad)), xq.xp_mul(ad, bd)
        if node.op == "*":
            return xq.xp_mul(an, bn), xq.xp_mul(ad, bd)
        if node.op == "/":
            if not xq.xp_trim(list(bn)):
                raise DivisionByZeroPolynomial("division by the zero polynomial")
            return xq.xp_mul(an, bd), xq.xp_mul(ad, bn)
    raise TypeError(f"not an AST node: {node!r}")


def reduce_ratfunc(num, den):
    """Cancel the gcd and make the denominator's leading coefficient one."""
    num, den = xq.xp_trim(list(num)), xq.xp_trim(list(den))
    if not den:
        raise DivisionByZeroPolynomial("denominator is the zero polynomial")
    if not num:
        return [], [xq.QG_ONE]
    g = xq.xp_gcd(num, den)
    if xq.xp_degree(g) >= 1:
        num, _ = xq.xp_divmod(num, g)
        den, _ = xq.xp_divmod(den, g)
    lead = den[-1]
    num = [c / lead for c in num]
    den = [c / lead for c in den]
    return num, den


def parse_map(source: str) -> RationalMap:
    """Parse an expression into a degree >= 2 rational map with exact coefficients."""
    expr = parse_expression(source)
    num, den = _eval_ratfunc(expr.ast)
    num, den = reduce_ratfunc(num, den)
    return RationalMap.from_exact(num, den)


def parse_constant(source: str) -> complex:
    """Evaluate a z-free expression to an exact constant (as a complex)."""
    expr = parse_expression(source)
    num, den = _eval_ratfunc(expr.ast)
    num, den = reduce_ratfunc(num, den)
    if xq.xp_degree(num) > 0 or xq.xp_degree(den) > 0:
        raise MapSyntaxError("expected a constant expression without z", 0)
    if not num:
        return 0j
    return (num[0] / den[0]).to_complex()
