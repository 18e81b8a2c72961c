"""Quantized deformation field on the Airy curve.

Operators act on polynomials in ``u_0, u_1, ...``.  The modes are

    beta_{-(2k+1)} = (2k+1) ut_k / lambda      (creators)
    beta_{2k+1}    = lambda d/du_k             (annihilators)

with ``ut_k = u_k - delta_{k,1}/3``.  The powers of ``lambda`` make the
quadratic operators reproduce the genus expansion of the Virasoro
constraints; pass ``lam_graded=False`` to act on plain polynomials.  Only
even numbers of modes are ever applied with the grading on.

A field such as ``:x(z)^n:`` is an infinite sum per power of ``z``.  It is
materialized with a bound on the creator (or annihilator) indices; for a
fixed bound the remaining sum is finite.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial, prod
from typing import Iterator, Mapping

from .gravity import CorrelatorSolver, compute_correlators, free_energy
from .series import HalfLaurent, MPoly, Window, binom, binomial_pow, dfact, series_mul

__all__ = [
    "NormalTerm",
    "OperatorSum",
    "beta",
    "normal_power_coeff",
    "regularized_power_coeff",
    "field_coeffs",
    "propagator_expand",
    "propagator_closed_form",
    "vacuum_two_point",
    "contraction_finite_part",
    "bessel_T",
    "bessel_egf_check",
    "bessel_polynomial",
    "regularized_power",
    "regularized_power_inverse",
    "regularized_power_recursive",
    "compose_expansions",
    "wick_product",
    "odot",
    "product_check",
    "virasoro_L",
    "virasoro_formula",
    "virasoro_matches_field",
    "field_L",
    "commutator_check",
    "canonical_commutation_check",
    "TauFunction",
    "tau_function",
    "ResidualReport",
    "constraint_residual",
    "w_constraint_residual",
]


def _k(mode: int) -> int:
    return (mode - 1) // 2


@dataclass(frozen=True, order=True)
class NormalTerm:
    """``coeff * beta_{-c_1} ... beta_{-c_r} beta_{a_1} ... beta_{a_s}`` (creators left)."""

    creators: tuple[int, ...]  # odd mode numbers 2k+1, sorted
    annihilators: tuple[int, ...]
    coeff: Fraction = Fraction(1)

    @property
    def shape(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return self.creators, self.annihilators

    @property
    def lam_power(self) -> int:
        return len(self.annihilators) - len(self.creators)


class OperatorSum:
    """Finite sum of normally ordered monomials in the modes."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple[tuple[int, ...], tuple[int, ...]], Fraction] | None = None):
        clean: dict = {}
        for (c, a), v in (terms or {}).items():
            key = (tuple(sorted(c)), tuple(sorted(a)))
            if any(m <= 0 or m % 2 == 0 for m in key[0] + key[1]):
                raise ValueError("modes must be odd positive integers")
            clean[key] = clean.get(key, 0) + Fraction(v)
        self.terms = {k: v for k, v in sorted(clean.items()) if v}

    @classmethod
    def scalar(cls, c) -> "OperatorSum":
        return cls({((), ()): Fraction(c)})

    def normal_terms(self) -> list[NormalTerm]:
        return [NormalTerm(c, a, v) for (c, a), v in self.terms.items()]

    def __eq__(self, other) -> bool:
        return isinstance(other, OperatorSum) and self.terms == other.terms

    def __repr__(self) -> str:
        return f"OperatorSum({len(self.terms)} terms)"

    def __add__(self, other: "OperatorSum") -> "OperatorSum":
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return OperatorSum(out)

    def __sub__(self, other: "OperatorSum") -> "OperatorSum":
        return self + other.scale(-1)

    def scale(self, c) -> "OperatorSum":
        c = Fraction(c)
        return OperatorSum({k: v * c for k, v in self.terms.items()})

    def restrict(self, max_creator: int | None = None, max_annihilator: int | None = None) -> "OperatorSum":
        """Drop terms with a creator (annihilator) index ``k`` above the bound."""

        def ok(c, a):
            if max_creator is not None and any(_k(m) > max_creator for m in c):
                return False
            return max_annihilator is None or all(_k(m) <= max_annihilator for m in a)

        return OperatorSum({(c, a): v for (c, a), v in self.terms.items() if ok(c, a)})

    def apply(self, poly: MPoly, lam_graded: bool = False, dilaton: bool = False,
              degree: int | None = None) -> MPoly:
        """Act on ``poly``; ``degree`` drops output terms above that ordinary degree."""
        out = MPoly.zero()
        derivs: dict[tuple[int, ...], MPoly] = {(): poly}

        def derived(ann):
            if ann not in derivs:
                derivs[ann] = derived(ann[:-1]).diff(_k(ann[-1]))
            return derivs[ann]

        for (cre, ann), v in self.terms.items():
            p = derived(ann)
            if not p:
                continue
            mult = MPoly.const(v)
            for m in cre:
                ut = MPoly.var(_k(m), m)
                if dilaton and m == 3:
                    ut = ut - 1
                mult = mult * ut
            if lam_graded:
                shift = len(ann) - len(cre)
                if shift % 2:
                    raise ValueError("odd number of modes cannot act with the lambda grading")
                mult = mult * MPoly.lam(shift)
            out = out + p.mul(mult, degree)
        return out


def beta(mode: int) -> OperatorSum:
    """``beta_mode`` for odd ``mode``; negative modes are creators."""
    if mode % 2 == 0:
        raise ValueError("beta modes are odd")
    return OperatorSum({((-mode,), ()) if mode < 0 else ((), (mode,)): 1})


# ---------------------------------------------------------------------------
# fields


def _bounded_multisets(size: int, top: int) -> Iterator[tuple[int, ...]]:
    def rec(size, low):
        if size == 0:
            yield ()
            return
        for first in range(low, top + 1):
            for tail in rec(size - 1, first):
                yield (first, *tail)

    yield from rec(size, 0)


def _sum_multisets(total: int, size: int, top: int | None = None) -> Iterator[tuple[int, ...]]:
    def rec(total, size, low):
        if size == 0:
            if total == 0:
                yield ()
            return
        hi = total if top is None else min(top, total)
        for first in range(low, hi + 1):
            if first * size > total:
                break
            for tail in rec(total - first, size - 1, first):
                yield (first, *tail)

    if total >= 0:
        yield from rec(total, size, 0)


def _multiplicity(ks: tuple[int, ...]) -> int:
    return prod(factorial(c) for c in Counter(ks).values())


def normal_power_coeff(n: int, q2: int, max_creator: int | None = None,
                       max_annihilator: int | None = None) -> OperatorSum:
    """Coefficient of ``z^(-q2/2)`` in ``:x(z)^n:``, with ``x(z) = -sum_j beta_j z^(-(j+2)/2)``.

    Exactly one of the bounds must be given (indices ``k`` of ``beta_{+-(2k+1)}``).
    """
    if (max_creator is None) == (max_annihilator is None):
        raise ValueError("give exactly one of max_creator, max_annihilator")
    if n == 0:
        return OperatorSum.scalar(1) if q2 == 0 else OperatorSum()
    # sum of annihilator modes minus sum of creator modes is q2 - 2n
    terms: dict = {}
    sign = (-1) ** n
    for c in range(n + 1):
        a = n - c
        # sum_A k - sum_C k = (q2 - 2n - a + c) / 2
        diff2 = q2 - 2 * n - a + c
        if diff2 % 2:
            continue
        diff = diff2 // 2
        if max_creator is not None:
            for C in _bounded_multisets(c, max_creator):
                for A in _sum_multisets(sum(C) + diff, a):
                    terms[_shape(C, A)] = Fraction(sign * factorial(n), _multiplicity(C) * _multiplicity(A))
        else:
            for A in _bounded_multisets(a, max_annihilator):
                for C in _sum_multisets(sum(A) - diff, c):
                    terms[_shape(C, A)] = Fraction(sign * factorial(n), _multiplicity(C) * _multiplicity(A))
    return OperatorSum(terms)


def _shape(C, A):
    return tuple(2 * k + 1 for k in C), tuple(2 * k + 1 for k in A)


def regularized_power_coeff(n: int, q2: int, max_creator: int | None = None,
                            max_annihilator: int | None = None) -> OperatorSum:
    """Coefficient of ``z^(-q2/2)`` in ``x(z)^{(.)n}``, through its normally ordered expansion."""
    out = OperatorSum()
    for j, c in regularized_power(n).items():
        # (4z^2)^(-j) shifts the exponent by 2j, i.e. q2 by 4j
        out = out + normal_power_coeff(n - 2 * j, q2 - 4 * j, max_creator, max_annihilator).scale(c)
    return out


def field_coeffs(n: int, q2_range, max_creator: int) -> dict[Fraction, OperatorSum]:
    """``{exponent of z: coefficient}`` of ``x(z)^{(.)n}`` for ``q2`` in ``q2_range``."""
    out = {}
    for q2 in q2_range:
        op = regularized_power_coeff(n, q2, max_creator=max_creator)
        if op.terms:
            out[Fraction(-q2, 2)] = op
    return out


# ---------------------------------------------------------------------------
# propagator


def propagator_expand(order: int) -> dict[tuple[Fraction, Fraction], Fraction]:
    """``sum_{n <= order} (2n+1) z^(-(2n+3)/2) w^((2n-1)/2)`` as ``{(z exp, w exp): coeff}``."""
    return {(Fraction(-(2 * n + 3), 2), Fraction(2 * n - 1, 2)): Fraction(2 * n + 1) for n in range(order + 1)}


def propagator_closed_form(order: int) -> dict[tuple[Fraction, Fraction], Fraction]:
    """``(z + w)/(sqrt(zw) (z - w)^2)`` expanded for ``|w| < |z|``.

    With ``r = w/z`` this is ``z^(-3/2) w^(-1/2) (1 + r)(1 - r)^(-2)``.
    """
    geo = binomial_pow(HalfLaurent({0: 1, 1: -1}, None, order), -2, order=order, at="zero")
    series = series_mul(HalfLaurent({0: 1, 1: 1}), geo)
    return {(Fraction(-3, 2) - n, Fraction(-1, 2) + n): series.coeff(n).constant()
            for n in range(order + 1) if series.coeff(n)}


def vacuum_two_point(order: int) -> dict[tuple[Fraction, Fraction], Fraction]:
    """``<0| x(z) x(w) |0>`` computed by letting the modes act on the vacuum ``1``."""
    out = {}
    vac = MPoly.const(1)
    # x(w)|0> keeps only creators, x(z) then contributes annihilators
    for kw in range(order + 1):
        qw = -(2 * kw - 1)  # creator beta_{-(2k+1)} sits at w^(k - 1/2)
        right = normal_power_coeff(1, qw, max_creator=order).apply(vac)
        for kz in range(order + 1):
            qz = 2 * kz + 3
            left = normal_power_coeff(1, qz, max_annihilator=order).apply(right)
            value = left.constant()
            if value:
                out[(Fraction(-qz, 2), Fraction(-qw, 2))] = value
    return out


def contraction_finite_part(order: int = 4) -> dict[int, Fraction]:
    """Laurent coefficients of ``<x(z+e) x(z)>`` in ``e`` at ``z = 1``.

    ``(2 + e)(1 + e)^(-1/2) e^(-2)``; the ``e^0`` entry is the regularized
    value ``1/4`` (times ``z^-2`` by homogeneity).
    """
    root = binomial_pow(HalfLaurent({0: 1, 1: 1}, None, order + 2), Fraction(-1, 2), order=order + 2, at="zero")
    s = series_mul(HalfLaurent({0: 2, 1: 1}), root).shift(-2)
    return {k: s.coeff(k).constant() for k in range(-2, order + 1)}


# ---------------------------------------------------------------------------
# regularized powers


def bessel_T(n: int, j: int) -> int:
    """``n! / (2^j j! (n-2j)!)``."""
    if j < 0 or 2 * j > n:
        raise ValueError("need 0 <= 2j <= n")
    return factorial(n) // (2 ** j * factorial(j) * factorial(n - 2 * j))


def bessel_egf_check(order: int = 8) -> bool:
    """``sum T(n,j) z^n t^j / n! = exp(z + t z^2/2)`` through ``z^order``."""
    Z, T = 0, 1
    arg = MPoly.var(Z) + MPoly.monomial({Z: 2, T: 1}, Fraction(1, 2))

    def zdeg_ok(k):
        return (k[1] if len(k) > 1 else 0) <= order

    total = MPoly.const(1)
    term = MPoly.const(1)
    for m in range(1, order + 1):
        term = (term * arg).filter(zdeg_ok).scale(Fraction(1, m))
        total = total + term
    expected = MPoly({(0, n, j): Fraction(bessel_T(n, j), factorial(n))
                      for n in range(order + 1) for j in range(n // 2 + 1)})
    return total == expected


def bessel_polynomial(n: int) -> list[int]:
    """Coefficients ``[x^0, x^1, ...]`` of ``sum_k T(2n-k, n-k) x^(n-k)``."""
    coeffs = [0] * (n + 1)
    for k in range(n + 1):
        coeffs[n - k] = bessel_T(2 * n - k, n - k)
    return coeffs


def regularized_power(n: int) -> dict[int, Fraction]:
    """``x^{(.)n} = sum_j c_j (z^-2)^j :x^(n-2j):``; returns ``{j: c_j}``, ``c_j = T(n,j)/4^j``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return {j: Fraction(bessel_T(n, j), 4 ** j) for j in range(n // 2 + 1)}


def regularized_power_inverse(n: int) -> dict[int, Fraction]:
    """``:x^n: = sum_j c_j (z^-2)^j x^{(.)(n-2j)}``; ``c_j = (-1)^j T(n,j)/4^j``."""
    return {j: Fraction((-1) ** j * bessel_T(n, j), 4 ** j) for j in range(n // 2 + 1)}


def compose_expansions(n: int) -> dict[int, Fraction]:
    """Substitute the inverse expansion into the forward one; the identity gives ``{0: 1}``."""
    out: dict[int, Fraction] = {}
    for j, c in regularized_power(n).items():
        for i, d in regularized_power_inverse(n - 2 * j).items():
            out[j + i] = out.get(j + i, 0) + c * d
    return {k: v for k, v in out.items() if v}


def regularized_power_recursive(n: int) -> dict[int, Fraction]:
    """``x^{(.)n}`` from ``x (.) :x^k: = :x^(k+1): + k kappa z^-2 :x^(k-1):``.

    ``kappa`` is the finite part of the two-point contraction, taken from its
    Laurent expansion (whose ``e^-1`` term must vanish).  Returns
    ``{k: coefficient of z^(-(n-k)) :x^k:}``.
    """
    parts = contraction_finite_part(2)
    if parts[-1] != 0:
        raise ArithmeticError("contraction has a simple pole")
    kappa = parts[0]
    cur = {0: Fraction(1)}
    for _ in range(n):
        nxt: dict[int, Fraction] = {}
        for k, c in cur.items():
            nxt[k + 1] = nxt.get(k + 1, 0) + c
            if k:
                nxt[k - 1] = nxt.get(k - 1, 0) + c * k * kappa
        cur = nxt
    return dict(sorted(cur.items(), reverse=True))


def wick_product(m: int, n: int) -> dict[int, Fraction]:
    """``:x^m: (.) :x^n: = sum_j j! C(m,j) C(n,j) (4z^2)^-j :x^(m+n-2j):`` as ``{power: coeff}``."""
    return {m + n - 2 * j: Fraction(factorial(j) * comb(m, j) * comb(n, j), 4 ** j) for j in range(min(m, n) + 1)}


def odot(left: Mapping[int, Fraction], right: Mapping[int, Fraction]) -> dict[int, Fraction]:
    """Bilinear extension of :func:`wick_product` to ``{power of :x^k:: coeff}`` maps.

    Every coefficient carries the power of ``z^-2`` fixed by homogeneity.
    """
    out: dict[int, Fraction] = {}
    for a, ca in left.items():
        for b, cb in right.items():
            for k, w in wick_product(a, b).items():
                out[k] = out.get(k, 0) + ca * cb * w
    return {k: v for k, v in sorted(out.items(), reverse=True) if v}


def _as_powers(n: int) -> dict[int, Fraction]:
    return {n - 2 * j: c for j, c in regularized_power(n).items()}


def product_check(m: int, n: int, max_creator: int = 3, degree: int = 4) -> dict:
    """``x^{(.)m} (.) x^{(.)n} = x^{(.)(m+n)}`` coefficientwise and as operators.

    The operator test materializes both sides at every ``z``-exponent where
    they can act on monomials of ``u_0..u_max_creator`` of degree ``<= degree``.
    """
    lhs = odot(_as_powers(m), _as_powers(n))
    rhs = _as_powers(m + n)
    coeff_ok = lhs == rhs
    total = m + n
    monos = _monomials(max_creator, degree)
    op_ok = True
    for q2 in range(-2 * total * (max_creator + 1), 2 * total * (max_creator + 2) + 1):
        lop = OperatorSum()
        for k, c in lhs.items():
            lop = lop + normal_power_coeff(k, q2 - 2 * (total - k), max_annihilator=max_creator).scale(c)
        rop = regularized_power_coeff(total, q2, max_annihilator=max_creator)
        if any(lop.apply(p) != rop.apply(p) for p in monos):
            op_ok = False
            break
    assoc = odot(odot(_as_powers(1), _as_powers(1)), _as_powers(2)) == odot(_as_powers(1), odot(_as_powers(1), _as_powers(2)))
    return {"m": m, "n": n, "coefficients": coeff_ok, "operators": op_ok, "associative_1_1_2": assoc,
            "ok": coeff_ok and op_ok and assoc}


def _monomials(nvars_top: int, degree: int) -> list[MPoly]:
    out = []
    for d in range(degree + 1):
        for ks in _bounded_multisets(d, nvars_top):
            out.append(prod((MPoly.var(k) for k in ks), start=MPoly.const(1)))
    return out


def canonical_commutation_check(top: int = 3, degree: int = 8) -> bool:
    """``[beta_{2a+1}, beta_{-(2b+1)}] = (2a+1) delta_ab`` on monomials of degree ``<= degree``."""
    monos = _monomials(top, degree)
    for a in range(top + 1):
        for b in range(top + 1):
            ann, cre = beta(2 * a + 1), beta(-(2 * b + 1))
            for p in monos:
                comm = ann.apply(cre.apply(p)) - cre.apply(ann.apply(p))
                if comm != p.scale(2 * a + 1 if a == b else 0):
                    return False
    return True


# ---------------------------------------------------------------------------
# Virasoro operators


def virasoro_L(n: int, max_creator: int) -> OperatorSum:
    """``L_n = (1/2) [z^(-n-2)] x^{(.)2} + beta_{2n+3}``, creators ``k <= max_creator``.

    Acting with the lambda grading and the dilaton shift this is
    ``sum (2k+1) u_k d_{k+n} + (lambda^2/2) sum d_a d_b + u_0^2/(2 lambda^2) [n=-1] + [n=0]/8``;
    ``beta_{2n+3} = d/du_{n+1}`` is the part of ``3 u_1 d_{n+1}`` hidden in the shift.
    """
    op = regularized_power_coeff(2, 2 * n + 4, max_creator=max_creator).scale(Fraction(1, 2))
    if n >= -1:
        op = op + OperatorSum({((), (2 * n + 3,)): 1})
    return op


def virasoro_formula(n: int, max_creator: int) -> OperatorSum:
    """``L_n`` assembled term by term from the differential-operator form."""
    terms: dict = {}

    def add(c, a, v):
        key = (tuple(sorted(c)), tuple(sorted(a)))
        terms[key] = terms.get(key, 0) + Fraction(v)

    for k in range(max(0, -n), max_creator + 1):
        # (2k+1) u_k d_{k+n}: beta_{-(2k+1)} already carries 2k+1; u_1 = ut_1 + 1/3
        add((2 * k + 1,), (2 * (k + n) + 1,), 1)
        if k == 1:
            add((), (2 * (k + n) + 1,), 1)
    for a in range(0, n):
        add((), (2 * a + 1, 2 * (n - 1 - a) + 1), Fraction(1, 2))
    if n == -1:
        add((1, 1), (), Fraction(1, 2))
    if n == 0:
        add((), (), Fraction(1, 8))
    return OperatorSum(terms)


def virasoro_matches_field(n: int, max_creator: int) -> bool:
    return virasoro_L(n, max_creator) == virasoro_formula(n, max_creator)


def field_L(n: int, max_annihilator: int) -> OperatorSum:
    """``L_n`` with ``L(z) = (1/8) :x(z)^2: = sum L_n z^(-n-2)`` (no regularization constant)."""
    return normal_power_coeff(2, 2 * n + 4, max_annihilator=max_annihilator).scale(Fraction(1, 8))


def _act(op_builder, p: MPoly) -> MPoly:
    top = max(p.max_var(), 0)
    return op_builder(top).apply(p)


def commutator_check(m: int, n: int, nvars: int = 4, degree: int = 5) -> dict:
    """Compare ``[L_m, L_n]`` with ``alpha (m-n) L_{m+n} + c delta_{m,-n}`` on monomials.

    Reports the observed ``alpha`` and central value ``c`` (or ``None`` when
    the commutator is not of that form) and whether the reference relation
    ``alpha = 1``, ``c = (2m^3+m)/48`` holds.
    """
    monos = _monomials(nvars - 1, degree)

    def L(idx):
        return lambda top: field_L(idx, top)

    alpha = central = None
    consistent = True
    for p in monos:
        comm = _act(L(m), _act(L(n), p)) - _act(L(n), _act(L(m), p))
        target = _act(L(m + n), p).scale(m - n) if m != n else MPoly.zero()
        # comm = alpha * target + central * p
        if target and alpha is None:
            rest = comm - (p.scale(central) if central is not None else MPoly.zero())
            key = next(iter(sorted(k for k, _ in target.items())))
            alpha = rest.coeff(key[1:], key[0]) / target.coeff(key[1:], key[0])
        a = alpha or Fraction(0)
        rest = comm - target.scale(a)
        if rest:
            if central is None:
                key = next(iter(sorted(k for k, _ in p.items())))
                central = rest.coeff(key[1:], key[0]) / p.coeff(key[1:], key[0])
            if rest != p.scale(central):
                consistent = False
    central = central or Fraction(0)
    expected_central = Fraction(2 * m ** 3 + m, 48) if m == -n else Fraction(0)
    if alpha is None:
        alpha = Fraction(1)  # L_{m+n} or m - n vanishes: alpha is not probed
    return {
        "m": m,
        "n": n,
        "consistent": consistent,
        "alpha": alpha if consistent else None,
        "central": central if consistent else None,
        "expected_alpha": Fraction(1),
        "expected_central": expected_central,
        "matches_reference": consistent and alpha == 1 and central == expected_central,
    }


# ---------------------------------------------------------------------------
# tau function and constraint residuals


@dataclass(frozen=True)
class TauFunction:
    """``Z = exp sum_g lambda^(2g-2) F_g`` truncated to ``window`` (u-coordinates)."""

    log_z: dict[int, MPoly]
    window: Window
    _series: list = field(default_factory=list, compare=False, repr=False)

    def series(self) -> MPoly:
        if not self._series:
            D = self.window.D
            exponent = MPoly.zero()
            for g, fg in self.log_z.items():
                exponent = exponent + fg.truncate(D) * MPoly.lam(2 * g - 2)
            total = MPoly.const(1)
            term = MPoly.const(1)
            for m in range(1, D + 1):
                term = term.mul(exponent, D).scale(Fraction(1, m))
                if not term:
                    break
                total = total + term
            self._series.append(total)
        return self._series[0]


def tau_function(window: Window, seeds: Mapping | None = None,
                 solver: CorrelatorSolver | None = None) -> TauFunction:
    table = compute_correlators(window, seeds=seeds, solver=solver)
    return TauFunction(dict(free_energy(table, "u").per_genus), window)


def _min_degree(g: int, N: int) -> int | None:
    """Smallest number of insertions in a nonzero genus-``g`` correlator with indices ``<= N``."""
    if g == 0:
        return 3
    if g == 1:
        return 1 if N >= 1 else None
    if N <= 1:
        return None
    return max(1, -(-(3 * g - 3) // (N - 1)))


def _contamination(window: Window, max_degree: int) -> tuple[set, set]:
    """``(reachable, contaminated)`` sets of ``(lambda power, degree)``.

    ``reachable`` collects strata of products of ``F_g`` (any genus);
    ``contaminated`` those reachable with some factor of genus above ``G``,
    where the truncated ``Z`` may be wrong.
    """
    N, G = window.N, window.G
    items = []
    g = 0
    while True:
        d = _min_degree(g, N)
        if d is not None and d <= max_degree:
            items.append((2 * g - 2, d, g > G))
        elif g > 1 and (d is None or d > max_degree):
            break
        g += 1
    # states: (lambda power, min degree, uses high genus); degree bounds above by max_degree
    states = {(0, 0, False)}
    frontier = set(states)
    while frontier:
        nxt = set()
        for p, d, high in frontier:
            for w, c, h in items:
                s = (p + w, d + c, high or h)
                if s[1] <= max_degree and s not in states:
                    nxt.add(s)
        states |= nxt
        frontier = nxt
    reachable, contaminated = set(), set()
    for p, d, high in states:
        for dd in range(d, max_degree + 1):
            reachable.add((p, dd))
            if high:
                contaminated.add((p, dd))
    return reachable, contaminated


@dataclass
class ResidualReport:
    """Residual coefficients of ``(x^{(.)power})_- Z``.

    ``strata`` maps ``(z exponent, lambda power, degree)`` to counts of
    determined and excluded coefficients and the number of nonzero ones;
    ``nonzero`` lists every determined coefficient that does not vanish.
    """

    power: int
    window: Window
    strata: dict[tuple[Fraction, int, int], dict[str, int]]
    nonzero: list[dict]

    @property
    def ok(self) -> bool:
        return not self.nonzero

    @property
    def determined(self) -> int:
        return sum(s["determined"] for s in self.strata.values())

    @property
    def excluded(self) -> int:
        return sum(s["excluded"] for s in self.strata.values())

    def to_json(self) -> dict:
        from .series import rat_str

        return {
            "power": self.power,
            "window": {"vars": self.window.N, "degree": self.window.D, "genus": self.window.G},
            "determined": self.determined,
            "excluded": self.excluded,
            "strata": [
                {"z": rat_str(z), "lam": p, "degree": d, **counts,
                 "status": "nonzero" if counts["nonzero"] else ("zero" if counts["determined"] else "excluded")}
                for (z, p, d), counts in sorted(self.strata.items())
            ],
            "nonzero": [{**e, "z": rat_str(e["z"]), "value": rat_str(e["value"])} for e in self.nonzero],
        }


def _exps(key: tuple) -> tuple[int, ...]:
    return tuple(key[1:])


def _residual(Z: TauFunction, power: int, scale: Fraction) -> ResidualReport:
    if power < 2 or power % 2:
        raise ValueError("power must be an even integer >= 2")
    window = Z.window
    N, D = window.N, window.D
    series = Z.series()
    reachable, contaminated = _contamination(window, D)

    def known(p, d):
        return d <= D and (p, d) not in contaminated

    # every output monomial u^e with e over u_0..u_N, degree <= D
    outputs = [tuple(Counter(ks).get(i, 0) for i in range(N + 1))
               for d in range(D + 1) for ks in _bounded_multisets(d, N)]
    lam_out = sorted({p + s for p, _ in reachable for s in range(-power, power + 1, 2)})
    strata: dict = {}
    nonzero = []
    # z^(-q): creators and annihilators k <= N bound q through the mode sums
    q_max = power + power // 2 + power * (N + 1)
    for q in range(1, q_max + 1):
        op = regularized_power_coeff(power, 2 * q, max_creator=N).scale(scale)
        if not op.terms:
            continue
        value = op.apply(series, lam_graded=True, dilaton=True, degree=D)
        shapes = []
        for (cre, ann) in op.terms:
            ck = Counter(_k(m) for m in cre)
            r = ck.pop(1, 0)
            shapes.append((ck, r, sum(ck.values()), len(ann), max((_k(m) for m in ann), default=-1),
                           len(ann) - len(cre)))
        for e in outputs:
            deg = sum(e)
            for p in lam_out:
                det = True
                touched = False
                for ck, r, nc, na, amax, shift in shapes:
                    if any(e[k] < c if k <= N else True for k, c in ck.items()):
                        continue
                    e1 = e[1] if N >= 1 else 0
                    for s in range(min(r, e1) + 1):
                        touched = True
                        if amax > N or not known(p - shift, deg - nc - s + na):
                            det = False
                            break
                    if not det:
                        break
                if not touched:
                    continue
                key = (Fraction(-q), p, deg)
                slot = strata.setdefault(key, {"determined": 0, "excluded": 0, "nonzero": 0})
                if not det:
                    slot["excluded"] += 1
                    continue
                slot["determined"] += 1
                c = value.coeff(list(e), p)
                if c:
                    slot["nonzero"] += 1
                    nonzero.append({"z": Fraction(-q), "lam": p, "u": list(e), "value": c})
    nonzero.sort(key=lambda r: (r["z"], r["lam"], r["u"]))
    return ResidualReport(power, window, dict(sorted(strata.items())), nonzero)


def constraint_residual(Z: TauFunction) -> ResidualReport:
    """``dZ/du_{n+1} - L_n Z`` for every ``n >= -1``, i.e. ``-(1/2) [z^(-n-2)] x^{(.)2} Z``.

    The ``z`` label of a stratum is ``-(n+2)``.
    """
    return _residual(Z, 2, Fraction(-1, 2))


def w_constraint_residual(Z: TauFunction, power: int) -> ResidualReport:
    """Negative-``z`` coefficients of ``x^{(.)power} Z``: a probe, nothing is asserted.

    ``power = 2`` reproduces :func:`constraint_residual` with the opposite
    overall normalization, so the zero pattern is identical.
    """
    return _residual(Z, power, Fraction(1))
