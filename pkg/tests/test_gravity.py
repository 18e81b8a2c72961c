from __future__ import annotations

from fractions import Fraction
from math import factorial, prod

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from airy.gravity import (CorrelatorSolver, OutsideWindowError, compute_correlators, free_energy,
                          genus0_one_point_recursion, jet_antiderivative, kdv_flow_check, kdv_R,
                          string_equation_check, total_derivative)
from airy.series import MPoly, Window, dfact


def test_seeds(table_662):
    assert table_662.lookup(0, (0, 0, 0)) == 1
    assert table_662.lookup(1, (1,)) == Fraction(1, 24)


@pytest.mark.parametrize("alphas, g, value", [
    ((4,), 2, Fraction(1, 1152)),
    ((2, 3), 2, Fraction(29, 5760)),
    ((2, 2, 2), 2, Fraction(7, 240)),
    ((7,), 3, Fraction(1, 82944)),
    ((0, 2), 1, Fraction(1, 24)),
    ((1, 1), 1, Fraction(1, 24)),
])
def test_known_values(solver, alphas, g, value):
    assert solver(g, alphas) == value


def test_top_one_point_law(solver):
    # <tau_{3g-2}>_g = 1/(24^g g!)
    for g in range(1, 5):
        assert solver(g, (3 * g - 2,)) == Fraction(1, 24 ** g * factorial(g))


@given(st.lists(st.integers(0, 4), min_size=3, max_size=7))
@settings(max_examples=60, deadline=None)
def test_genus_zero_multinomial(alphas):
    n = len(alphas)
    expected = Fraction(factorial(n - 3), prod(factorial(a) for a in alphas)) if sum(alphas) == n - 3 else 0
    assert CorrelatorSolver()(0, alphas) == expected


@given(st.integers(0, 3), st.lists(st.integers(0, 5), min_size=1, max_size=4))
@settings(max_examples=40, deadline=None)
def test_dilaton_equation(g, alphas):
    s = CorrelatorSolver()
    n = len(alphas)
    if 2 * g - 2 + n <= 0:
        return
    assert s(g, [1, *alphas]) == (2 * g - 2 + n) * s(g, alphas)


def test_string_equation(table_662):
    assert string_equation_check(table_662) == []


def test_window_guard(table_662):
    with pytest.raises(OutsideWindowError):
        table_662.lookup(3, (7,))
    assert table_662.lookup(0, (0, 0, 1)) == 0


def test_seed_injection_propagates():
    bad = CorrelatorSolver({(0, (0, 0, 0)): Fraction(1), (1, (1,)): Fraction(1, 23)})
    assert bad(1, (1, 1)) == Fraction(1, 23)
    assert bad(0, (0, 0, 0, 1)) == 1


def test_free_energy_coordinates(table_662, energy_t, energy_u):
    # u_k = t_k/(2k+1)!!, so a monomial picks up the product of double factorials
    t_coeff = energy_t[1].coeff([0, 1])
    u_coeff = energy_u[1].coeff([0, 1])
    assert t_coeff == Fraction(1, 24) and u_coeff == Fraction(1, 8)
    assert energy_t[0].coeff([3]) == Fraction(1, 6)


def test_genus0_one_point_recursion():
    fs = genus0_one_point_recursion(8)
    for n, f in enumerate(fs):
        assert f == MPoly.monomial([n + 2], Fraction(dfact(2 * n + 1), factorial(n + 2)))


def test_kdv_polynomials():
    assert kdv_R(2).expression == (MPoly.var(0) ** 2).scale(Fraction(1, 2)) + \
        MPoly.var(2) * MPoly.lam(2, Fraction(1, 12))
    p = MPoly.var(0) * MPoly.var(1)
    assert jet_antiderivative(total_derivative(p)) == p
    with pytest.raises(ValueError):
        jet_antiderivative(MPoly.var(0))


@pytest.mark.parametrize("n", [1, 2])
def test_kdv_flows(solver, n):
    assert kdv_flow_check(n, Window(4, 3, 2), solver=solver)["ok"]


def test_kdv_flow_detects_fault():
    bad = CorrelatorSolver({(0, (0, 0, 0)): Fraction(1), (1, (1,)): Fraction(1, 23)})
    assert not kdv_flow_check(1, Window(4, 3, 1), solver=bad)["ok"]


def test_compute_correlators_is_sorted_and_sized():
    t = compute_correlators(Window(4, 3, 1))
    assert len(t) == len(list(t))
    assert all(t.in_window(g, a) for (g, a), _ in t)
