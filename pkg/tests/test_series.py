from __future__ import annotations

from fractions import Fraction
from math import factorial

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from airy.series import (HalfLaurent, MPoly, Window, binom, binomial_pow, compose, dfact,
                         mpoly_binomial, mpoly_from_json, mpoly_inverse, nilpotent_pow, project,
                         rat, rat_str, residue, reversion, series_from_json, series_mul, t_to_u,
                         u_to_t)

small = st.fractions(min_value=-5, max_value=5, max_denominator=7)


@st.composite
def polys(draw, nvars=3, max_deg=3):
    terms = draw(st.dictionaries(
        st.tuples(*[st.integers(0, max_deg)] * nvars), small, max_size=5))
    return MPoly({(0, *k): c for k, c in terms.items()})


def to_sympy(p: MPoly):
    us = sp.symbols("u0:8")
    lam = sp.Symbol("lam")
    out = 0
    for k, c in p.items():
        term = sp.Rational(c.numerator, c.denominator) * lam ** k[0]
        for i, e in enumerate(k[1:]):
            term *= us[i] ** e
        out += term
    return sp.expand(out)


def test_rat_and_strings():
    assert rat("3/6") == Fraction(1, 2)
    assert rat(4) == Fraction(4)
    assert rat_str(Fraction(-2, 4)) == "-1/2"
    assert rat_str(3) == "3/1"


def test_double_factorial_conventions():
    assert [dfact(n) for n in (-3, -1, 0, 1, 5, 7)] == [-1, 1, 1, 1, 15, 105]


def test_binom_fractional():
    assert binom(Fraction(1, 2), 2) == Fraction(-1, 8)
    assert binom(-1, 3) == -1


def test_window_fields():
    w = Window(6, 4, 2)
    assert (w.D, w.N, w.G) == (6, 4, 2)


def test_trailing_zero_keys_are_canonical():
    assert MPoly.monomial([1, 0, 0]) == MPoly.var(0)
    assert MPoly.var(2).coeff([0, 0, 1]) == 1


def test_lambda_slot():
    p = MPoly.lam(-2, 3) * MPoly.var(0)
    assert p.lam_powers() == [-2]
    assert p.coeff([1], lam=-2) == 3


@given(polys(), polys())
@settings(max_examples=40, deadline=None)
def test_mul_matches_sympy(a, b):
    assert to_sympy(a * b) == sp.expand(to_sympy(a) * to_sympy(b))


@given(polys(), polys(), polys())
@settings(max_examples=30, deadline=None)
def test_ring_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == MPoly.zero()


@given(polys(), st.integers(0, 2))
@settings(max_examples=30, deadline=None)
def test_diff_matches_sympy(p, i):
    assert to_sympy(p.diff(i)) == sp.diff(to_sympy(p), sp.Symbol(f"u{i}"))


def test_diff_zero_times_is_identity():
    p = MPoly.var(1) + MPoly.var(0)
    assert p.diff(0, 0) == p


@given(polys())
@settings(max_examples=30, deadline=None)
def test_integrate_then_diff(p):
    assert p.integrate(1).diff(1) == p


def test_truncate_and_restrict():
    p = MPoly.var(0) ** 3 + MPoly.var(1) * MPoly.var(2) + MPoly.const(1)
    assert p.truncate(2) == MPoly.var(1) * MPoly.var(2) + MPoly.const(1)
    assert p.restrict([0]) == MPoly.var(0) ** 3 + MPoly.const(1)


def test_substitute():
    p = MPoly.var(0) ** 2
    assert p.substitute({0: MPoly.var(1) + MPoly.const(1)}) == MPoly.var(1) ** 2 + MPoly.var(1).scale(2) + 1


@given(polys())
@settings(max_examples=20, deadline=None)
def test_json_round_trip(p):
    assert mpoly_from_json(p.to_json()) == p


def test_inverse_and_binomial():
    w = MPoly.var(0) + MPoly.var(1) * MPoly.var(0)
    one = MPoly.const(1)
    inv = mpoly_inverse(one + w, 6)
    assert (inv * (one + w)).truncate(6) == one
    half = mpoly_binomial(w, Fraction(1, 2), 6)
    assert half.mul(half, 6) == (one + w).truncate(6)


def test_t_u_round_trip():
    p = MPoly.monomial([2, 1, 0, 1], Fraction(1, 3))
    assert u_to_t(t_to_u(p)) == p
    # t_k = (2k+1)!! u_k
    assert t_to_u(MPoly.var(2)) == MPoly.var(2, 15)


def test_series_window_is_enforced():
    s = HalfLaurent({0: 1, 1: 2}, lo=-2, hi=3)
    assert s.coeff(-2) == MPoly.zero()
    with pytest.raises(KeyError):
        s.coeff(4)


def test_product_window_shrinks():
    a = HalfLaurent({1: 1}, lo=None, hi=4)
    b = HalfLaurent({0: 1, -1: 1})
    prod = series_mul(a, b)
    assert (prod.lo, prod.hi) == (None, 3)  # f^5 unknown times f^-1
    assert prod.coeff(1) == MPoly.const(1) and prod.coeff(0) == MPoly.const(1)


def test_opposite_unknown_tails_leave_nothing_certified():
    a = HalfLaurent({1: 1}, lo=None, hi=4)
    b = HalfLaurent({0: 1}, lo=-3, hi=None)
    prod = series_mul(a, b)
    with pytest.raises(KeyError):
        prod.coeff(1)


def test_project_and_residue():
    s = HalfLaurent({2: 1, 0: 3, -1: 5, -3: 1})
    assert project(s, "plus").support() == [0, 2]
    assert project(s, "minus").support() == [-3, -1]
    assert residue(s) == MPoly.const(5)


def test_binomial_pow_sqrt_at_zero():
    s = HalfLaurent({0: 1, 1: 1}, None, 8)
    r = binomial_pow(s, Fraction(1, 2), order=8, at="zero")
    assert [r.coeff(k).constant() for k in range(5)] == [binom(Fraction(1, 2), k) for k in range(5)]
    assert series_mul(r, r).agrees_with(s)


def test_binomial_pow_at_infinity():
    # (f^2 - 1)^(1/2) = f (1 - f^-2)^(1/2)
    s = HalfLaurent({2: 1, 0: -1})
    r = binomial_pow(s, Fraction(1, 2), order=-7)
    assert r.coeff(1) == MPoly.const(1) and r.coeff(-1) == MPoly.const(Fraction(-1, 2))
    assert series_mul(r, r).truncate(lo=-6).agrees_with(s)


def test_nilpotent_pow():
    w = HalfLaurent({1: MPoly.var(0), -1: MPoly.var(1)}, degree=4)
    r = nilpotent_pow(w, Fraction(1, 2))
    one = HalfLaurent({0: 1}, degree=4)
    assert series_mul(r, r).agrees_with(one + w)


def test_reversion_and_compose():
    s = HalfLaurent({1: 1, 2: -1})
    t = reversion(s, 7)
    # inverse of y - y^2 is the Catalan series
    assert [t.coeff(k).constant() for k in range(1, 8)] == [1, 1, 2, 5, 14, 42, 132]
    back = compose(s, t, 7)
    assert back.agrees_with(HalfLaurent({1: 1}, None, 7))


def test_series_json_round_trip():
    s = HalfLaurent({1: MPoly.var(0), -3: Fraction(1, 2)}, -5, 4, 3)
    assert series_from_json(s.to_json()) == s


def test_exponential_check_against_factorials():
    # (1 + y)^r coefficients are binomials
    r = Fraction(-3, 2)
    s = binomial_pow(HalfLaurent({0: 1, 1: 1}, None, 6), r, order=6, at="zero")
    expected = [Fraction(1)]
    for k in range(1, 7):
        expected.append(expected[-1] * (r - k + 1) / k)
    assert [s.coeff(k).constant() for k in range(7)] == expected
    assert factorial(6) * expected[6] == prod_falling(r, 6)


def prod_falling(r, k):
    out = Fraction(1)
    for i in range(k):
        out *= r - i
    return out
