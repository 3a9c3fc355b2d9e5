from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wishart_roots.ratfunc import MPoly, RatFunc


@st.composite
def mpolys(draw, nvars=2):
    n_terms = draw(st.integers(0, 4))
    terms = {}
    for _ in range(n_terms):
        e = tuple(draw(st.integers(-2, 3)) for _ in range(nvars))
        terms[e] = Fraction(draw(st.integers(-5, 5)), draw(st.integers(1, 4)))
    return MPoly(nvars, terms)


@settings(max_examples=50, deadline=None)
@given(mpolys(), mpolys(), mpolys())
def test_mpoly_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a * b == b * a
    assert a * (b + c) == a * b + a * c


@settings(max_examples=40, deadline=None)
@given(mpolys(), mpolys())
def test_mpoly_product_rule(a, b):
    for var in (0, 1):
        assert (a * b).diff(var) == a.diff(var) * b + a * b.diff(var)


class TestMPoly:
    def test_eval_laurent(self):
        p = MPoly(2, {(-1, 2): Fraction(3)})
        assert p.eval([2.0, 3.0]) == pytest.approx(13.5)

    def test_const_extraction(self):
        assert MPoly.const(2, Fraction(5, 3)).const_value() == Fraction(5, 3)
        with pytest.raises(ValueError):
            MPoly.var(2, 0).const_value()


class TestRatFunc:
    def test_zero_denominator_rejected(self):
        with pytest.raises(ZeroDivisionError):
            RatFunc(MPoly.const(2, 1), MPoly(2))

    def test_cross_multiplication_equality(self):
        x = MPoly.var(2, 0)
        one = MPoly.const(2, 1)
        # (x^2 - 1)/(x - 1) == (x + 1)/1
        a = RatFunc(x * x - one, x - one)
        b = RatFunc(x + one)
        assert a == b

    def test_quotient_rule(self):
        x, y = MPoly.var(2, 0), MPoly.var(2, 1)
        f = RatFunc(x * x, y)
        d = f.diff(0)
        assert d == RatFunc(MPoly(2, {(1, 0): Fraction(2)}), y)

    def test_eval_pole(self):
        f = RatFunc(MPoly.const(2, 1), MPoly.var(2, 0) - MPoly.var(2, 1))
        with pytest.raises(ZeroDivisionError):
            f.eval([1.0, 1.0])

    def test_arithmetic_closure(self):
        x, y = RatFunc(MPoly.var(2, 0)), RatFunc(MPoly.var(2, 1))
        expr = (x / y + y / x) * (x * y)
        expect = RatFunc(MPoly.var(2, 0) * MPoly.var(2, 0) + MPoly.var(2, 1) * MPoly.var(2, 1))
        assert expr == expect

    def test_as_poly_guard(self):
        f = RatFunc(MPoly.const(2, 1), MPoly.var(2, 0) + MPoly.const(2, 1))
        assert not f.is_poly()
        with pytest.raises(ValueError):
            f.as_poly()
