from fractions import Fraction

import pytest
from hypothesis import given, settings

from tests.conftest import NINE_F2, NINE_P
from tests.strategies import polys, small_rationals
from worldline.errors import CoefficientOverflow
from worldline.parser import parse_poly
from worldline.poly import (ONE, ZERO, MultiPoly, UniPolyInT, as_rational, differentiate, evaluate_complex,
                            evaluate_exact, poly_arith)

x, y, t, M = (MultiPoly.var(v) for v in "xytM")


def test_add_cancels_like_terms():
    assert poly_arith(x + 1, x - 1, "add") == 2 * x


def test_difference_of_squares():
    assert poly_arith(x - 1, x + 1, "mul") == x ** 2 - 1


def test_self_subtraction_is_empty():
    F2 = parse_poly(NINE_F2)
    r = poly_arith(F2, F2, "sub")
    assert r.is_zero() and r.terms == {}


def test_no_zero_coefficients_stored():
    p = x + y - x
    assert p == y
    assert all(c != 0 for c in p.terms.values())


def test_coefficients_reduced():
    p = MultiPoly.constant(Fraction(4, 6)) * x
    assert p.terms[(1, 0, 0, 0)] == Fraction(2, 3)
    assert type((MultiPoly.constant(Fraction(1, 2)) * 2).constant_value()) is int


def test_power_rule_in_t():
    assert differentiate(t ** 3 + 9 * t ** 2 + 27 * t + 27, "t") == 3 * t ** 2 + 18 * t + 27


def test_partial_x_of_second_equation():
    F2 = parse_poly(NINE_F2)
    assert differentiate(F2, "x") == -3 * x ** 2 - 4 * x * y


def test_linear_in_M():
    vx, vy = MultiPoly.constant(3), MultiPoly.constant(-2)
    H = M - (x * vy - y * vx)
    assert differentiate(H, "M") == ONE


def test_evaluate_full_binding():
    F2 = parse_poly(NINE_F2)
    assert evaluate_exact(F2, {"x": 1, "y": 1, "t": 0}) == 0
    assert evaluate_exact(t ** 3 + 9 * t ** 2 + 27 * t + 27, {"t": -3}) == 0


def test_evaluate_partial_binding():
    assert evaluate_exact(x + y, {"x": Fraction(1, 2)}) == y + Fraction(1, 2)


def test_evaluate_complex_coefficients():
    P = UniPolyInT.from_poly(parse_poly(NINE_P), "x")
    c = evaluate_complex(P, 1)
    assert len(c) == 10
    assert c[-1] == -17 and c[0] == 64
    assert all(v.imag == 0 for v in c)


def test_evaluate_complex_zero():
    assert evaluate_complex(UniPolyInT("x", []), 0) == []


def test_evaluate_complex_overflow():
    huge = UniPolyInT("x", [MultiPoly.constant(10 ** 400), ONE])
    with pytest.raises(CoefficientOverflow):
        evaluate_complex(huge, 0)


def test_unipoly_rejects_main_variable_in_coefficients():
    with pytest.raises(ValueError):
        UniPolyInT("x", [x, ONE])


def test_unipoly_at_matches_generic_evaluation():
    P = UniPolyInT.from_poly(parse_poly(NINE_P), "x")
    for tv in (Fraction(0), Fraction(-7, 3), Fraction(123, 17)):
        assert P.at(tv) == [evaluate_exact(c, {"t": tv}) for c in P.coeffs]


def test_exact_division():
    a = (x + y) * (x - 2 * t)
    assert a.exact_div(x + y) == x - 2 * t
    with pytest.raises(ArithmeticError):
        (x + 1).exact_div(x - 1)


def test_as_rational_forms():
    assert as_rational("4/17") == Fraction(4, 17)
    assert as_rational(Fraction(6, 3)) == 2


def test_printing_order():
    assert str(parse_poly("2 + y + t*y + t*x + y^3 - 2*x^3")) == "-2*x^3 + y^3 + t*x + t*y + y + 2"
    assert str(ZERO) == "0"


@settings(max_examples=60, deadline=None)
@given(polys(), polys(), polys())
def test_distributive(a, b, c):
    assert a * (b + c) == a * b + a * c


@settings(max_examples=60, deadline=None)
@given(polys(), polys())
def test_commutative(a, b):
    assert a * b == b * a and a + b == b + a


@settings(max_examples=60, deadline=None)
@given(polys(), polys())
def test_degree_of_product(a, b):
    if not a.is_zero() and not b.is_zero():
        assert (a * b).total_degree() == a.total_degree() + b.total_degree()


@settings(max_examples=60, deadline=None)
@given(polys(), polys(), small_rationals)
def test_derivative_linear_and_product_rule(a, b, c):
    for v in "xytM":
        assert (a + b * c).differentiate(v) == a.differentiate(v) + b.differentiate(v) * c
        assert (a * b).differentiate(v) == a.differentiate(v) * b + a * b.differentiate(v)


@settings(max_examples=60, deadline=None)
@given(polys(), polys(), small_rationals, small_rationals, small_rationals, small_rationals)
def test_evaluation_is_a_homomorphism(a, b, vx, vy, vt, vm):
    env = {"x": vx, "y": vy, "t": vt, "M": vm}
    assert evaluate_exact(a * b, env) == evaluate_exact(a, env) * evaluate_exact(b, env)
    assert evaluate_exact(a + b, env) == evaluate_exact(a, env) + evaluate_exact(b, env)


@settings(max_examples=80, deadline=None)
@given(polys(max_terms=7))
def test_print_parse_round_trip(p):
    assert parse_poly(str(p)) == p
