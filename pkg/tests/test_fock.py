from __future__ import annotations

from fractions import Fraction
from math import factorial

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from airy import fock
from airy.gravity import free_energy
from airy.series import MPoly, Window

BAD_SEEDS = {(0, (0, 0, 0)): Fraction(1), (1, (1,)): Fraction(1, 23)}


def test_modes():
    p = MPoly.var(1) ** 2
    assert fock.beta(3).apply(p) == MPoly.var(1, 2)
    assert fock.beta(-3).apply(MPoly.const(1)) == MPoly.var(1, 3)
    with pytest.raises(ValueError):
        fock.beta(2)
    with pytest.raises(ValueError):
        fock.OperatorSum({((2,), ()): 1})


def test_lambda_grading_and_dilaton():
    op = fock.OperatorSum({((3,), (1,)): 1})
    out = op.apply(MPoly.var(0), lam_graded=True, dilaton=True)
    assert out == MPoly.var(1, 3) - 1
    assert fock.NormalTerm((3,), (1, 1)).lam_power == 1
    with pytest.raises(ValueError):
        fock.beta(1).apply(MPoly.var(0), lam_graded=True)


def test_canonical_commutation():
    assert fock.canonical_commutation_check(3, 5)


def test_normal_power_needs_one_bound():
    with pytest.raises(ValueError):
        fock.normal_power_coeff(2, 4)
    with pytest.raises(ValueError):
        fock.normal_power_coeff(2, 4, max_creator=1, max_annihilator=1)


def test_single_field_modes():
    # x(z) = -sum beta_j z^(-(j+2)/2): z^(-5/2) holds -beta_3, z^(-1/2) holds -beta_{-3}
    assert fock.normal_power_coeff(1, 5, max_creator=3).terms == {((), (3,)): -1}
    assert fock.normal_power_coeff(1, -1, max_creator=3).terms == {((3,), ()): -1}


def test_propagator():
    assert fock.propagator_expand(8) == fock.propagator_closed_form(8)
    assert fock.vacuum_two_point(6) == fock.propagator_expand(6)


def test_contraction_finite_part():
    parts = fock.contraction_finite_part(3)
    assert parts[-2] == 2 and parts[-1] == 0 and parts[0] == Fraction(1, 4)


def test_bessel_numbers():
    assert fock.bessel_T(4, 2) == 3
    assert fock.bessel_T(6, 3) == 15
    assert fock.bessel_polynomial(2) == [1, 3, 3]
    assert fock.bessel_polynomial(3) == [1, 6, 15, 15]
    assert fock.bessel_egf_check(10)
    with pytest.raises(ValueError):
        fock.bessel_T(3, 2)


@pytest.mark.parametrize("n", range(9))
def test_regularized_power_routes(n):
    closed = {n - 2 * j: c for j, c in fock.regularized_power(n).items()}
    assert fock.regularized_power_recursive(n) == closed
    assert fock.compose_expansions(n) == {0: 1}


def test_regularized_cube():
    assert fock.regularized_power(3) == {0: 1, 1: Fraction(3, 4)}


@given(st.integers(0, 5), st.integers(0, 5))
@settings(max_examples=25, deadline=None)
def test_wick_product_symmetric(m, n):
    assert fock.wick_product(m, n) == fock.wick_product(n, m)
    assert fock.wick_product(m, n)[m + n] == 1


@pytest.mark.parametrize("m,n", [(1, 1), (1, 2), (2, 2)])
def test_product_check(m, n):
    report = fock.product_check(m, n, max_creator=2, degree=3)
    assert report["ok"], report


@pytest.mark.parametrize("n", range(-1, 5))
def test_virasoro_from_field(n):
    assert fock.virasoro_matches_field(n, 5)


def test_virasoro_low_modes_as_differential_operators():
    # L_{-1} = sum (2k+1) u_k d_{k-1} + u_0^2/(2 lam^2); on 1 only the quadratic term survives
    out = fock.virasoro_L(-1, 3).apply(MPoly.const(1), lam_graded=True, dilaton=True)
    assert out == (MPoly.var(0) ** 2) * MPoly.lam(-2, Fraction(1, 2))
    out0 = fock.virasoro_L(0, 3).apply(MPoly.const(1), lam_graded=True, dilaton=True)
    assert out0 == MPoly.const(Fraction(1, 8))


@pytest.mark.parametrize("m,n", [(1, -1), (2, -2), (1, 0), (2, 1)])
def test_observed_commutators(m, n):
    # with L(z) = (1/8) :x^2: the bracket is (1/2)(m-n) L_{m+n} + (2m^3+m)/96 delta
    r = fock.commutator_check(m, n, nvars=3, degree=3)
    assert r["consistent"]
    assert r["alpha"] == Fraction(1, 2)
    expected = Fraction(2 * m ** 3 + m, 96) if m == -n else 0
    assert r["central"] == expected


def test_tau_function_constant_term():
    Z = fock.tau_function(Window(4, 4, 1))
    assert Z.series().constant() == 1


def test_contamination_min_degrees():
    assert fock._min_degree(0, 4) == 3
    assert fock._min_degree(1, 0) is None
    assert fock._min_degree(2, 4) == 1
    assert fock._min_degree(3, 2) == 6


def test_constraint_residual_vanishes(table_662):
    Z = fock.TauFunction(dict(free_energy(table_662, "u").per_genus), Window(6, 6, 2))
    report = fock.constraint_residual(Z)
    assert report.ok
    assert report.determined > 10_000 and report.excluded > 0


def test_constraint_residual_catches_fault():
    report = fock.constraint_residual(fock.tau_function(Window(4, 4, 1), seeds=BAD_SEEDS))
    assert not report.ok
    assert any(e["lam"] == 0 and e["u"] == [0] * 5 for e in report.nonzero)


def test_w2_matches_constraint_pattern():
    Z = fock.tau_function(Window(4, 4, 1))
    a = fock.constraint_residual(Z)
    b = fock.w_constraint_residual(Z, 2)
    assert a.ok and b.ok
    assert {k: (v["determined"], v["excluded"]) for k, v in a.strata.items()} == \
        {k: (v["determined"], v["excluded"]) for k, v in b.strata.items()}


def test_residual_rejects_odd_power():
    with pytest.raises(ValueError):
        fock.w_constraint_residual(fock.tau_function(Window(2, 2, 0)), 3)


def test_report_json_shape():
    report = fock.constraint_residual(fock.tau_function(Window(3, 3, 1)))
    data = report.to_json()
    assert data["power"] == 2 and data["window"] == {"vars": 3, "degree": 3, "genus": 1}
    assert {s["status"] for s in data["strata"]} <= {"zero", "nonzero", "excluded"}
    assert data["determined"] == sum(s["determined"] for s in data["strata"])


def test_factorial_sign_of_normal_power():
    # beta_{-1} sits at z^(-1/2), so beta_{-1}^n is the z^(-n/2) coefficient
    for n in range(1, 5):
        op = fock.normal_power_coeff(n, n, max_creator=0)
        assert op.terms == {((1,) * n, ()): Fraction((-1) ** n * factorial(n), factorial(n))}
