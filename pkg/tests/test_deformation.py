from __future__ import annotations

from fractions import Fraction
from math import comb, factorial

import pytest

from airy.deformation import (a_coefficients, a_coefficients_reference, build_special_x,
                              bump_coefficient, check_x2_minus, compose_back, example_u0_u2,
                              genus0_energy, superpotential_coeffs, unique_w)
from airy.gravity import CorrelatorSolver
from airy.series import MPoly, Window, dfact, series_mul

W = Window(6, 6, 0)


@pytest.fixture(scope="module")
def f0(solver):
    return genus0_energy(W, solver)


@pytest.fixture(scope="module")
def special(f0):
    return build_special_x(f0, W)


def test_special_x_is_homogeneous(special):
    assert special.is_weighted_homogeneous()


def test_x2_minus_vanishes(special):
    report = check_x2_minus(special)
    assert report["minus_zero"] and report["plus_matches_a"] and report["plus_matches_closed_form"]


def test_a_coefficients_specialize(special):
    a = a_coefficients(special)
    u0, u1 = MPoly.var(0), MPoly.var(1)
    one3 = 1 - u1.scale(3)
    assert a[0].restrict([0, 1]) == -(u0.scale(2) * one3)
    assert a[1].restrict([0, 1]) == one3 * one3
    assert all(not am.restrict([0, 1]) for am in a[2:])


def test_a_coefficients_weighted_degree(special):
    assert all(am.is_weighted_homogeneous(2 - 2 * m) for m, am in enumerate(a_coefficients(special)) if am)


def test_a_coefficient_derivatives_at_u0(special):
    a = a_coefficients(special)
    u0 = MPoly.var(0)
    for m, am in enumerate(a):
        for n in range(W.N + 1):
            got = am.diff(n).restrict([0]).truncate(W.D - 1)
            k = 2 * n - 2 * m - 3
            df = dfact(k) if k >= -3 else 0
            want = MPoly.zero() if n < m else (u0 ** (n - m)).scale(Fraction(2 * (2 * n + 1) * df, factorial(n - m)))
            assert got == want.truncate(W.D - 1), (m, n)


def test_reference_high_a_coefficients_disagree(special):
    # the variant with u_1 cross terms counted twice is not the square of x
    x2 = series_mul(special.x_series, special.x_series)
    ref = a_coefficients_reference(special)
    assert any(x2.coeff(2 * m) != ref[m] for m in range(2, len(ref)))


def test_fault_in_f0_breaks_x2_minus(f0):
    bad = bump_coefficient(f0, [2, 0, 1], Fraction(1, 7))
    assert not check_x2_minus(build_special_x(bad, W))["minus_zero"]


def test_genus_one_seed_does_not_reach_genus_zero():
    bad = CorrelatorSolver({(0, (0, 0, 0)): Fraction(1), (1, (1,)): Fraction(1, 23)})
    assert check_x2_minus(build_special_x(genus0_energy(W, bad), W))["ok"]


def test_uniqueness_recursion_matches(f0):
    sol = unique_w(W.D, W.N).in_u()
    keep = range(W.N + 1)
    for n in range(W.N + 1):
        assert sol[n].truncate(W.D).restrict(keep) == f0.diff(n).truncate(W.D).restrict(keep)


def test_uniqueness_strata_sum(f0):
    sol = unique_w(5, 3)
    for m, row in enumerate(sol.strata):
        assert sum(row, MPoly.zero()) == sol.w[m]
        assert all(not p or p.min_degree() == p.degree() == n for n, p in enumerate(row))


def test_superpotential_inverts(f0):
    sp = superpotential_coeffs(f0, Window(4, 4, 0), count=10)
    back = compose_back(sp, 3)
    assert back.agrees_with(back.__class__({1: 1}, None, 3, 4))


def test_u0_u2_example():
    out = example_u0_u2(5)
    assert out["catalan"] == out["catalan_expected"] == [1, 2, 7, 30, 143]
    assert out["agree"]
    assert out["closed_form"][1] == MPoly({(0, k, 0, k): Fraction(30 ** k) for k in range(6)})
    assert [comb(3 * n + 1, n) // (n + 1) for n in range(5)] == [1, 2, 7, 30, 143]
