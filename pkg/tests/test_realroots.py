from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robustpop.poly import Polynomial
from robustpop.problems import perturbed_minima, univariate
from robustpop.realroots import isolate_real_roots, local_minima, sign_variations, sturm_sequence

(x,) = Polynomial.variables(1)


def test_sturm_counts_roots_of_a_cubic():
    p = (x - 1) * (x - 2) * (x + 3)
    chain = sturm_sequence(p)
    assert sign_variations(chain, Fraction(-10)) - sign_variations(chain, Fraction(10)) == 3
    assert sign_variations(chain, Fraction(0)) - sign_variations(chain, Fraction(10)) == 2


def test_isolation_widths_and_containment():
    p = (x - Fraction(1, 3)) * (x - Fraction(1, 2)) * (x - 7)
    iso = isolate_real_roots(p, 0, 10, width=Fraction(1, 1000))
    assert len(iso) == 3
    roots = [Fraction(1, 3), Fraction(1, 2), Fraction(7)]
    for (a, b), r in zip(iso.intervals, roots):
        assert b - a <= Fraction(1, 1000)
        assert a <= r <= b


def test_repeated_roots_counted_once():
    p = (x - 2) ** 3 * (x - 5) ** 2
    assert len(isolate_real_roots(p, 0, 10)) == 2


def test_root_on_the_boundary_of_the_range():
    iso = isolate_real_roots(x * (x - 1), 0, 1)
    assert iso.intervals[0] == (0, 0)
    assert len(iso) == 2


def test_isolation_rejects_invalid_input():
    with pytest.raises(ValueError):
        isolate_real_roots(Polynomial.zero(1))
    with pytest.raises(ValueError):
        isolate_real_roots(x, 3, 1)
    with pytest.raises(ValueError):
        isolate_real_roots(Polynomial.variables(2)[0])


def test_refine_narrows_intervals():
    iso = isolate_real_roots(x * x - 2, 0, 4, width=None)
    fine = iso.refine(Fraction(1, 10**9))
    a, b = fine.intervals[0]
    assert a * a <= 2 <= b * b and b - a <= Fraction(1, 10**9)


def test_local_minima_of_double_well():
    p = (x * x - 1) ** 2
    mins = local_minima(p, -3, 3)
    assert len(mins) == 2
    for m, target in zip(mins, (-1, 1)):
        a, b = m.interval
        assert a <= target <= b


def test_unperturbed_univariate_has_two_minima():
    mins = local_minima(univariate(0), 0, 200)
    assert [round(float(m.estimate), 4) for m in mins] == [1.0, 100.0]


def test_tiny_perturbation_keeps_both_minima():
    table = perturbed_minima(0, Fraction(1, 10**30))
    assert len(table) == 2
    assert abs(float(table[0].refined) - 1) < 1e-5
    assert abs(float(table[1].refined) - 100) < 1e-5


def test_moderate_perturbation_removes_the_far_minimum():
    assert len(perturbed_minima(0, Fraction(1, 10**7))) == 1


@settings(max_examples=40, deadline=None)
@given(st.lists(st.fractions(min_value=-20, max_value=20, max_denominator=50), min_size=1, max_size=5, unique=True))
def test_isolation_recovers_planted_roots(roots):
    p = Polynomial.constant(1, 1)
    for r in roots:
        p = p * (x - r)
    iso = isolate_real_roots(p, -21, 21, width=Fraction(1, 10**4))
    assert len(iso) == len(roots)
    for (a, b), r in zip(iso.intervals, sorted(roots)):
        assert a <= r <= b
