from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from frobcheck.errors import ParseError
from frobcheck.expr import Expression, polynomial
from frobcheck.numeric import DD

F = Fraction


def a2_prepotential():
    return polynomial(2, [(F(1, 2), [2, 1]), (F(1, 72), [0, 4])])


def test_power_rule():
    e = polynomial(2, [(F(1, 2), [2, 1])])
    assert e.differentiate(1) == polynomial(2, [(F(1, 2), [2, 0])])


def test_constant_derivative_is_zero():
    assert Expression.constant(2, 5).differentiate(0).is_zero()


def test_exponential_fixed_point():
    e = Expression.exponential(2, [0, 1])
    assert e.differentiate(1) == e


def test_a2_value_at_0_1():
    assert a2_prepotential().evaluate([0, 1]) == pytest.approx(1 / 72, rel=1e-15)


def test_evaluate_no_constant_term_at_origin():
    assert a2_prepotential().evaluate([0, 0]) == 0


def test_exp_at_origin():
    assert Expression.exponential(2, [0, 1]).evaluate([0, 0]) == pytest.approx(1)


def test_dd_evaluation_matches_double():
    e = a2_prepotential() + Expression.exponential(2, [F(1, 3), 1])
    p = [0.3 + 0.1j, -0.2 + 0.5j]
    assert complex(e.evaluate(p, DD)) == pytest.approx(e.evaluate(p), rel=1e-14)


def test_text_roundtrip():
    e = a2_prepotential() + Expression.variable(2, 1) * Expression.exponential(2, [0, F(3, 2)])
    assert Expression.from_text(e.to_text(), 2) == e


def test_malformed_text():
    with pytest.raises(ParseError):
        Expression.from_text("1 0 | 1 x | 0 0", 2)


def test_no_zero_coefficients_after_cancellation():
    e = polynomial(2, [(1, [1, 0])]) - polynomial(2, [(1, [1, 0])])
    assert e.is_zero() and not e.terms


coeff = st.fractions(min_value=-3, max_value=3, max_denominator=7)
power = st.integers(0, 4)
weight = st.sampled_from([F(0), F(0), F(1), F(-1, 2)])
term = st.tuples(coeff, st.tuples(power, power, power), st.tuples(weight, weight, weight))


def build(terms):
    e = Expression.zero(3)
    for c, p, k in terms:
        mono = polynomial(3, [(c, list(p))])
        e = e + (mono * Expression.exponential(3, list(k)) if any(k) else mono)
    return e


@settings(max_examples=60, deadline=None)
@given(st.lists(term, min_size=1, max_size=5), st.integers(0, 2), st.integers(0, 2))
def test_partials_commute(terms, a, b):
    e = build(terms)
    assert e.differentiate(a).differentiate(b) == e.differentiate(b).differentiate(a)


@settings(max_examples=60, deadline=None)
@given(st.lists(term, min_size=1, max_size=5), st.integers(0, 2),
       st.lists(st.floats(-0.8, 0.8), min_size=6, max_size=6))
def test_derivative_matches_finite_difference(terms, a, xs):
    e = build(terms)
    p = [complex(xs[2 * i], xs[2 * i + 1]) for i in range(3)]
    step = 1e-4
    fwd = list(p)
    bwd = list(p)
    fwd[a] += step
    bwd[a] -= step
    fd = (e.evaluate(fwd) - e.evaluate(bwd)) / (2 * step)
    exact = e.differentiate(a).evaluate(p)
    scale = max(1.0, abs(exact), max(abs(c[0]) for c in terms) * 10)
    assert abs(fd - exact) / scale < 1e-6
