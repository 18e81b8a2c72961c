"""Lagrange inversion and formal solutions of the inviscid Burgers hierarchy.

The genus-zero free energy produced here never consults a correlator table:
it comes from iterating the dispersionless flows, which makes it an
independent oracle for the Virasoro solve in :mod:`airy.gravity`.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Sequence

from .series import HalfLaurent, MPoly, binomial_pow

__all__ = [
    "lagrange_dual",
    "fuss_catalan",
    "BurgersSolution",
    "burgers_solve",
    "burgers_residual",
    "DispersionlessF0",
    "dispersionless_chain",
    "nth_root_identity_check",
]

X, T = 0, 1  # variable slots used for series in (x, t)


def lagrange_dual(b: Sequence, count: int, degree: int | None = None) -> list:
    """Coefficients ``a_2..a_count`` of the inverse of ``x = y + b_2 y^2 + ...``.

    ``b`` starts at ``b_2``; entries may be rationals or ``MPoly``.  Uses
    ``a_n = (1/n) [y^(n-1)] (1 + b_2 y + b_3 y^2 + ...)^(-n)``.
    """
    coeffs = {0: MPoly.const(1)}
    for i, bi in enumerate(b):
        bi = MPoly._coerce(bi)
        if bi:
            coeffs[i + 1] = bi
    base = HalfLaurent(coeffs, None, None, degree)
    out = []
    for n in range(2, count + 1):
        power = binomial_pow(base.truncate(hi=n - 1), -n, order=n - 1, at="zero")
        out.append(power.coeff(n - 1).scale(Fraction(1, n)))
    if all(isinstance(v, (int, Fraction)) for v in b):
        return [v.constant() for v in out]
    return out


def fuss_catalan(m: int, k: int) -> Fraction:
    """``C(mk, k) / ((m-1)k + 1)``; ``m = 2`` gives the Catalan numbers."""
    return Fraction(comb(m * k, k), (m - 1) * k + 1)


@dataclass(frozen=True)
class BurgersSolution:
    """Formal solution of ``u_t = u u_x``: ``u_series`` is exact through ``t**order``.

    Polynomials use slot 0 for ``x`` and slot 1 for ``t``.
    """

    u_series: MPoly
    initial: MPoly
    order: int

    def t_coefficient(self, n: int) -> MPoly:
        return MPoly({k: c for k, c in self.u_series.items() if (k[2] if len(k) > 2 else 0) == n})


def _t_degree(k: tuple) -> int:
    return k[2] if len(k) > 2 else 0


def _trunc_t(p: MPoly, order: int) -> MPoly:
    return p.filter(lambda k: _t_degree(k) <= order)


def burgers_solve(u0: MPoly, order: int, method: str = "auto") -> BurgersSolution:
    """Solve ``u_t = d/dx (u^2/2)``, ``u(x,0) = u0(x)`` through ``t**order``.

    ``method="lagrange"`` inverts ``y = x - t u0(x)`` (needs ``u0(0) = 0``);
    ``method="picard"`` integrates order by order in ``t``.
    """
    if u0.max_var() > X:
        raise ValueError("initial datum must be a polynomial in x alone")
    if method == "auto":
        method = "lagrange" if u0.constant() == 0 else "picard"
    if method == "lagrange":
        u = _burgers_lagrange(u0, order)
    elif method == "picard":
        u = _burgers_picard(u0, order)
    else:
        raise ValueError(f"unknown method {method!r}")
    return BurgersSolution(u, u0, order)


def _burgers_lagrange(u0: MPoly, order: int) -> MPoly:
    if u0.constant():
        raise ValueError("Lagrange route needs u0(0) = 0")
    # y = x (1 - t q(x)) with q = u0/x, so A(y) = sum_k a_k y^k where
    # a_k = (1/k) [x^(k-1)] (1 - t q)^(-k); a_1 differs from 1 when q(0) != 0
    q = MPoly({(k[0], k[1] - 1, *k[2:]): c for k, c in u0.items()})
    tq = q * MPoly.var(T)
    need = order + 1  # one power of t is lost in (A - x)/t
    qdeg = max(q.degree(), 0)
    x = MPoly.var(X)
    A = MPoly.zero()
    powers = [MPoly.const(1)]
    for _ in range(need):
        powers.append(_trunc_t(powers[-1] * tq, need))
    for k in range(1, need * qdeg + 2):
        ak = MPoly.zero()
        for j in range(1, need + 1):
            cj = Fraction(comb(k + j - 1, j))  # C(-k, j) (-1)^j
            coeff = MPoly({(kk[0], 0, *kk[2:]): c for kk, c in powers[j].items()
                           if (kk[1] if len(kk) > 1 else 0) == k - 1})
            ak = ak + coeff.scale(cj)
        if ak:
            A = A + ak.scale(Fraction(1, k)) * x ** k
    # u = (A - x)/t; the j = 0 terms, which make up x itself, were skipped above
    return MPoly({(k[0], k[1] if len(k) > 1 else 0, _t_degree(k) - 1, *k[3:]): c
                  for k, c in A.items()}).filter(lambda k: _t_degree(k) <= order)


def _burgers_picard(u0: MPoly, order: int) -> MPoly:
    # u = sum t^n c_n(x), (n+1) c_{n+1} = sum_{i+j=n} c_i c_j'
    cs = [u0]
    for n in range(order):
        acc = MPoly.zero()
        for i in range(n + 1):
            acc = acc + cs[i] * cs[n - i].diff(X)
        cs.append(acc.scale(Fraction(1, n + 1)))
    t = MPoly.var(T)
    return sum((c * t ** n for n, c in enumerate(cs)), MPoly.zero())


def burgers_residual(sol: BurgersSolution) -> MPoly:
    """``u_t - u u_x`` on the exact range ``t**0 .. t**(order-1)``."""
    u = sol.u_series
    res = u.diff(T) - u * u.diff(X)
    return _trunc_t(res, sol.order - 1)


@dataclass(frozen=True)
class DispersionlessF0:
    """Genus-zero data in t-coordinates, exact through ordinary degree ``degree``."""

    f0: MPoly
    u0_series: MPoly
    nvars: int
    degree: int


def dispersionless_chain(N: int, D: int, chain: Sequence[int] | None = None) -> DispersionlessF0:
    """Build ``u = d^2 F0/dt0^2`` by switching on ``t_1..t_N`` one at a time.

    Each step solves ``u(x, .., t_n) = u(x + t_n u^n / n!, ..)`` by fixed-point
    iteration; ``chain`` reorders the steps (the flows commute).  ``F0`` is
    the double ``t_0``-antiderivative of ``u``: weighted homogeneity forbids
    terms of ``t_0``-degree below two, so no integration constants survive.
    """
    chain = list(range(1, N + 1)) if chain is None else list(chain)
    if sorted(chain) != list(range(1, N + 1)):
        raise ValueError("chain must be a permutation of 1..N")
    udeg = max(D - 2, 0)
    t0 = MPoly.var(0)
    u = t0.truncate(udeg)
    for n in chain:
        shift_coeff = MPoly.var(n, Fraction(1, factorial(n)))
        prev = u
        U = prev
        for _ in range(udeg + 1):
            arg = t0 + shift_coeff.mul(U.pow(n, udeg), udeg)
            nxt = prev.substitute({0: arg}, udeg)
            if nxt == U:
                break
            U = nxt
        u = U
    f0 = u.integrate(0).integrate(0).truncate(D) if D >= 2 else MPoly.zero()
    return DispersionlessF0(f0, u, N + 1, D)


def nth_root_identity_check(n: int, order: int) -> bool:
    """Check the n-th root identity between two Fuss-Catalan generating series."""
    if n < 2:
        raise ValueError("n must be at least 2")
    lhs = HalfLaurent({k - 1: fuss_catalan(n, k) for k in range(1, order + 2)}, None, order)
    root = binomial_pow(lhs, Fraction(1, n), order=order, at="zero")
    rhs = HalfLaurent({0: 1, **{k: fuss_catalan(n, k) for k in range(1, order + 1)}}, None, order)
    return root.agrees_with(rhs)

