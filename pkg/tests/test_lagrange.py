from __future__ import annotations

from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from airy.lagrange import (burgers_residual, burgers_solve, dispersionless_chain, fuss_catalan,
                           lagrange_dual, nth_root_identity_check)
from airy.series import MPoly

coeff = st.fractions(min_value=-3, max_value=3, max_denominator=5)


@given(st.lists(coeff, min_size=1, max_size=4))
@settings(max_examples=25, deadline=None)
def test_lagrange_dual_matches_sympy_reversion(bs):
    y, x = sp.symbols("y x")
    fwd = y + sum(sp.Rational(b.numerator, b.denominator) * y ** (i + 2) for i, b in enumerate(bs))
    count = 6
    # invert by fixed point: y = x - (fwd(y) - y)
    inv = x
    for _ in range(count):
        full = sp.Poly(sp.expand(x - (fwd - y).subs(y, inv)), x)
        inv = sum(c * x ** m for (m,), c in full.terms() if m <= count)
    expected = [sp.Rational(sp.Poly(inv, x).coeff_monomial(x ** n)) for n in range(2, count + 1)]
    got = lagrange_dual(bs, count)
    assert [sp.Rational(g.numerator, g.denominator) for g in got] == expected


def test_catalan_from_lagrange_dual():
    # inverse of y - y^2
    assert lagrange_dual([-1], 7) == [1, 2, 5, 14, 42, 132]


def test_fuss_catalan():
    assert [fuss_catalan(2, k) for k in range(7)] == [1, 1, 2, 5, 14, 42, 132]
    assert [fuss_catalan(3, k) for k in range(5)] == [1, 1, 3, 12, 55]


@pytest.mark.parametrize("n", [2, 3, 4])
def test_nth_root_identity(n):
    assert nth_root_identity_check(n, 8)


@given(st.lists(coeff, min_size=1, max_size=3))
@settings(max_examples=15, deadline=None)
def test_burgers_routes_agree(cs):
    x = MPoly.var(0)
    u0 = sum((x ** (i + 1)).scale(c) for i, c in enumerate(cs))
    if not u0:
        return
    a = burgers_solve(u0, 4, "lagrange")
    b = burgers_solve(u0, 4, "picard")
    assert a.u_series == b.u_series
    assert not burgers_residual(a)


def test_burgers_linear_datum_closed_form():
    # u(x,0) = x gives u = x/(1 - t)
    sol = burgers_solve(MPoly.var(0), 5)
    for n in range(6):
        assert sol.t_coefficient(n) == MPoly.monomial([1, n])


def test_burgers_constant_term_uses_picard():
    sol = burgers_solve(MPoly.const(1) + MPoly.var(0), 3)
    assert not burgers_residual(sol)
    with pytest.raises(ValueError):
        burgers_solve(MPoly.const(1), 2, "lagrange")


def test_dispersionless_two_variable_closed_form():
    f0 = dispersionless_chain(1, 8).f0
    # t0^3 / (6 (1 - t1))
    expected = MPoly({(0, 3, k): Fraction(1, 6) for k in range(6)})
    assert f0 == expected


def test_dispersionless_chain_order_is_irrelevant():
    a = dispersionless_chain(3, 6).f0
    b = dispersionless_chain(3, 6, chain=[3, 1, 2]).f0
    assert a == b
    with pytest.raises(ValueError):
        dispersionless_chain(3, 6, chain=[1, 1, 2])


def test_dispersionless_matches_correlators(energy_t):
    assert dispersionless_chain(6, 6).f0 == energy_t[0]
