"""Expression parsing: exact coefficients, precedence, round trips, errors."""

from fractions import Fraction

import pytest

from kmsdyn.errors import DegreeTooLow, DivisionByZeroPolynomial, MapSyntaxError
from kmsdyn.mapexpr import parse_constant, parse_expression, parse_map, to_string


def exact_coeffs(poly):
    return [(c.re, c.im) for c in poly]


def test_parse_z2_plus_1():
    R = parse_map("z^2+1")
    assert R.n == 2
    assert exact_coeffs(R.exact[0]) == [(1, 0), (0, 0), (1, 0)]
    assert exact_coeffs(R.exact[1]) == [(1, 0)]


def test_parse_reciprocal_square():
    R = parse_map("1/z^2")
    assert R.n == 2
    assert exact_coeffs(R.exact[0]) == [(1, 0)]
    assert exact_coeffs(R.exact[1]) == [(0, 0), (0, 0), (1, 0)]


def test_parse_gasket_map():
    R = parse_map("(z^3-16/27)/z")
    assert R.n == 3
    assert exact_coeffs(R.exact[0]) == [(Fraction(-16, 27), 0), (0, 0), (0, 0), (1, 0)]
    assert exact_coeffs(R.exact[1]) == [(0, 0), (1, 0)]


def test_gcd_reduction_is_exact():
    # (z^3 + z) / (z^2 + 1) reduces exactly to z / 1
    R = parse_map("(z^3+z)/(z^2+1)*z")
    assert R.n == 2
    assert exact_coeffs(R.exact[0]) == [(0, 0), (0, 0), (1, 0)]
    assert exact_coeffs(R.exact[1]) == [(1, 0)]


def test_precedence_golden():
    a = parse_expression("z^2+1/z")
    b = parse_expression("(z^2+1)/z")
    assert a.ast != b.ast
    Ra = parse_map("z^2+1/z")  # z^2 + (1/z) = (z^3 + 1)/z
    assert exact_coeffs(Ra.exact[0]) == [(1, 0), (0, 0), (0, 0), (1, 0)]
    Rb = parse_map("(z^2+1)/z")
    assert exact_coeffs(Rb.exact[0]) == [(1, 0), (0, 0), (1, 0)]


def test_unary_minus_binds_below_power():
    # -z^2 is -(z^2); as a map offset it differs from (-z)^2
    Ra = parse_map("1-z^2")
    Rb = parse_map("1+(-z)^2")
    assert exact_coeffs(Ra.exact[0]) == [(1, 0), (0, 0), (-1, 0)]
    assert exact_coeffs(Rb.exact[0]) == [(1, 0), (0, 0), (1, 0)]


def test_gaussian_rational_literals():
    R = parse_map("z^2 + 1/2 + 3*i")
    c0 = R.exact[0][0]
    assert c0.re == Fraction(1, 2) and c0.im == 3


def test_decimal_literals_are_exact():
    R = parse_map("z^2 + 0.125")
    assert R.exact[0][0].re == Fraction(1, 8)


def test_negative_exponent():
    R = parse_map("z^-2")
    assert R.n == 2
    assert exact_coeffs(R.exact[1]) == [(0, 0), (0, 0), (1, 0)]


def test_round_trip_corpus():
    corpus = [
        "z^2+1",
        "1/z^2",
        "(z^3-16/27)/z",
        "z^2+1/z",
        "(z^2+1)/z",
        "-z^3+2*z-1/2",
        "(1+i)*z^2-(3/4)*z",
        "z^2-z*1.5+0.25",
        "((z))^4/(z-1)",
    ]
    for src in corpus:
        ast = parse_expression(src).ast
        printed = to_string(ast)
        assert parse_expression(printed).ast == ast, (src, printed)


def test_syntax_error_positions():
    with pytest.raises(MapSyntaxError) as err:
        parse_expression("z^2+")
    assert err.value.position == 4
    with pytest.raises(MapSyntaxError) as err:
        parse_expression("z?1")
    assert err.value.position == 1
    with pytest.raises(MapSyntaxError) as err:
        parse_expression("(z+1")
    assert err.value.position == 4
    with pytest.raises(MapSyntaxError):
        parse_expression("z^2.5")


def test_degree_too_low():
    with pytest.raises(DegreeTooLow):
        parse_map("z+1")
    with pytest.raises(DegreeTooLow):
        parse_map("3/4")
    with pytest.raises(DegreeTooLow):
        parse_map("(z^2+z)/(z+1)")  # reduces to z


def test_division_by_zero_polynomial():
    with pytest.raises(DivisionByZeroPolynomial):
        parse_map("z^2/(z-z)")
    with pytest.raises(DivisionByZeroPolynomial):
        parse_map("(z-z)^-1 + z^2")


def test_parse_constant():
    assert parse_constant("3/4") == 0.75
    assert parse_constant("1+2*i") == 1 + 2j
    assert parse_constant("-(1/2)*i") == -0.5j
    with pytest.raises(MapSyntaxError):
        parse_constant("z+1")


def test_whitespace_tolerated():
    R = parse_map("  z ^ 2  +  1 ")
    assert R.n == 2


def test_nested_negation_round_trip():
    # printing must keep the parentheses: "--18" would collapse into a literal
    src = "-(-18)*z^2"
    ast = parse_expression(src).ast
    printed = to_string(ast)
    assert parse_expression(printed).ast == ast
    assert "--" not in printed


def test_sign_chains_collapse_at_parse_time():
    a = parse_expression("--z^2").ast
    b = parse_expression("z^2").ast
    assert a == b
    c = parse_expression("---z^2").ast
    d = parse_expression("-z^2").ast
    assert c == d
