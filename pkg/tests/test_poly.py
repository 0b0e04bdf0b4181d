from fractions import Fraction
from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robustpop.poly import (
    Polynomial,
    PolynomialParseError,
    basis,
    even_square_perturbation,
    grlex_key,
    half_degree,
    l1_perturbation_orthant,
    parse_polynomial,
    poly_eval,
    to_fraction,
)

x1, x2 = Polynomial.variables(2)


def test_basis_sizes_match_binomials():
    for n in (1, 2, 3):
        for d in range(6):
            assert len(basis(n, d)) == comb(n + d, d)


def test_grlex_order_two_variables():
    assert basis(2, 2).monomials == ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))
    mons = basis(3, 3).monomials
    assert list(mons) == sorted(mons, key=grlex_key)


def test_basis_rejects_bad_arguments():
    with pytest.raises(ValueError):
        basis(0, 2)
    with pytest.raises(ValueError):
        basis(2, -1)


def test_to_fraction_keeps_decimal_strings_exact():
    assert to_fraction("1e-8") == Fraction(1, 10**8)
    assert to_fraction("3/4") == Fraction(3, 4)
    assert to_fraction(0.5) == Fraction(1, 2)
    with pytest.raises(ValueError):
        to_fraction(float("nan"))
    with pytest.raises(TypeError):
        to_fraction(object())


def test_motzkin_vanishes_at_its_zeros():
    f = Fraction(1, 27) + x1**2 * x2**2 * (x1**2 + x2**2 - 1)
    t = Fraction(1, 3)
    # x1^2 = x2^2 = 1/3 is a zero; evaluate through the squared coordinates
    assert f.degree == 6
    assert Fraction(1, 27) + t * t * (2 * t - 1) == 0
    assert f(0, 0) == Fraction(1, 27)
    assert f(1, 1) == Fraction(1, 27) + 1


def test_arithmetic_with_scalars_on_either_side():
    p = 2 - x1 + x1 * 3
    assert p == Polynomial(2, {(0, 0): 2, (1, 0): 2})
    assert (1 - x1) ** 2 == 1 - 2 * x1 + x1 * x1
    assert (x1 - x1).is_zero()
    with pytest.raises(ValueError):
        x1 + Polynomial.variables(3)[0]


def test_derivative_and_coefficients_univariate():
    (x,) = Polynomial.variables(1)
    p = 3 * x**4 - x + 7
    assert p.derivative() == 12 * x**3 - 1
    assert p.coefficients() == [7, -1, 0, 0, 3]
    assert Polynomial.from_coefficients([7, -1, 0, 0, 3]) == p


def test_riesz_functional():
    p = 2 * x1 * x2 - 5
    y = {(0, 0): Fraction(1), (1, 1): Fraction(3, 2)}
    assert p.riesz(y) == 2 * Fraction(3, 2) - 5


def test_parse_terms_and_comments():
    p = parse_polynomial("""
        # Motzkin
        1/27 0 0
        1 4 2
        1 2 4
        -1 2 2
    """)
    assert p == Fraction(1, 27) + x1**4 * x2**2 + x1**2 * x2**4 - x1**2 * x2**2


def test_parse_error_reports_line_number():
    with pytest.raises(PolynomialParseError) as info:
        parse_polynomial(["1 2 0", "# fine", "x 1 1"])
    assert info.value.line == 3
    assert "line 3" in str(info.value)
    with pytest.raises(PolynomialParseError) as info:
        parse_polynomial(["1 2 0", "2 1"])
    assert info.value.line == 2
    with pytest.raises(PolynomialParseError):
        parse_polynomial(["1 -1"])
    with pytest.raises(PolynomialParseError):
        parse_polynomial([])


def test_text_round_trip():
    p = Fraction(-3, 7) * x1**3 * x2 + x2**2 - 4
    assert parse_polynomial(p.to_text(), 2) == p


def test_half_degree():
    assert half_degree(Polynomial.constant(2, 1)) == 0
    assert half_degree(x1) == 1
    assert half_degree(x1**2 * x2) == 2


def test_even_square_perturbation_unconstrained():
    (x,) = Polynomial.variables(1)
    p = even_square_perturbation(x**2, [], 1, Fraction(1, 2))
    assert p == x**2 + Fraction(1, 2) * (1 + x**2)


def test_even_square_perturbation_with_constraint():
    (x,) = Polynomial.variables(1)
    g = 1 - x**2
    p = even_square_perturbation(x, [g], 2, 1)
    assert p == x + (1 + x**2 + x**4) + g * (1 + x**2)
    with pytest.raises(ValueError):
        even_square_perturbation(x**6, [], 2, 1)


def test_l1_perturbation_orthant():
    (x,) = Polynomial.variables(1)
    p = l1_perturbation_orthant(x**2, 1, Fraction(1, 10))
    assert p == x**2 + Fraction(1, 10) * (1 + x + x**2)
    with pytest.raises(ValueError):
        l1_perturbation_orthant(x1, 1, 1)


def test_poly_eval_exact_and_float():
    p = x1**2 - x2
    assert poly_eval(p, [Fraction(1, 2), 1]) == Fraction(-3, 4)
    assert poly_eval(p, [0.5, 1.0]) == pytest.approx(-0.75)
    with pytest.raises(ValueError):
        poly_eval(p, [1])


rationals = st.fractions(min_value=-5, max_value=5, max_denominator=20)


@st.composite
def polys(draw, n=2, max_deg=3):
    mons = basis(n, max_deg).monomials
    chosen = draw(st.lists(st.sampled_from(mons), max_size=5, unique=True))
    return Polynomial(n, {m: draw(rationals) for m in chosen})


@settings(max_examples=60, deadline=None)
@given(polys(), polys(), rationals, rationals)
def test_ring_operations_commute_with_evaluation(p, q, a, b):
    assert (p * q)(a, b) == p(a, b) * q(a, b)
    assert (p + q)(a, b) == p(a, b) + q(a, b)
    assert (p - q)(a, b) == p(a, b) - q(a, b)


@settings(max_examples=60, deadline=None)
@given(polys(), polys())
def test_product_degree_is_additive(p, q):
    if p.is_zero() or q.is_zero():
        assert (p * q).is_zero()
    else:
        assert (p * q).degree == p.degree + q.degree


@settings(max_examples=40, deadline=None)
@given(polys())
def test_parse_inverts_to_text(p):
    if p.is_zero():
        return
    assert parse_polynomial(p.to_text(), 2) == p
