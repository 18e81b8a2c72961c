"""The special deformation of the Airy curve and its superpotential.

The deformed curve is the Laurent series

    x = f - sum_n (2n+1) u_n f^(2n-1) - sum_n dF0/du_n f^(-2n-3)

and the genus-zero Virasoro constraints are equivalent to ``(x^2)_- = 0``.
Everything here works at ``u_k = 0`` for ``k > N`` with a cap ``D`` on the
ordinary u-degree, so all series are finite and exact below the cap.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

from .gravity import CorrelatorSolver, compute_correlators, free_energy
from .lagrange import lagrange_dual
from .series import (HalfLaurent, MPoly, Window, mpoly_binomial,
                     mpoly_inverse, project, reversion, series_mul)

__all__ = [
    "genus0_energy",
    "SpecialDeformation",
    "build_special_x",
    "x2_closed_form",
    "check_x2_minus",
    "bump_coefficient",
    "UniqueSolution",
    "unique_w",
    "SuperpotentialCoeffs",
    "a_coefficients",
    "a_coefficients_reference",
    "superpotential_coeffs",
    "compose_back",
    "example_u0_u2",
]


def _extended_vars(window: Window) -> int:
    # dF0/du_n stays nonzero at u_{>N} = 0 for every n <= D - 2
    return max(window.N, window.D - 2)


def genus0_energy(window: Window, solver: CorrelatorSolver | None = None) -> MPoly:
    """``F_0`` in u-coordinates, exact enough for every ``dF0/du_n`` through degree ``D``."""
    inner = Window(window.D + 1, _extended_vars(window), 0)
    return free_energy(compute_correlators(inner, solver=solver), "u")[0]


@dataclass(frozen=True)
class SpecialDeformation:
    x_series: HalfLaurent
    window: Window
    dF0: tuple[MPoly, ...]  # dF0/du_n at u_{>N} = 0, n = 0, 1, ...

    def is_weighted_homogeneous(self) -> bool:
        # deg f = 1, so the coefficient of f^k must have weighted degree 1 - k
        return all(c.is_weighted_homogeneous(1 - k) for k, c in self.x_series.coeffs.items())


def build_special_x(f0: MPoly, window: Window) -> SpecialDeformation:
    D, N = window.D, window.N
    keep = range(N + 1)
    dF0 = tuple(f0.diff(n).truncate(D).restrict(keep) for n in range(_extended_vars(window) + 1))
    coeffs: dict[int, MPoly] = {1: MPoly.const(1)}
    for n in range(N + 1):
        k = 2 * n - 1
        coeffs[k] = coeffs.get(k, MPoly.zero()) - MPoly.var(n, 2 * n + 1)
    for n, d in enumerate(dF0):
        if d:
            coeffs[-2 * n - 3] = -d
    return SpecialDeformation(HalfLaurent(coeffs, None, None, D), window, dF0)


def x2_closed_form(d: SpecialDeformation) -> HalfLaurent:
    """``x^2`` assembled directly as a polynomial in ``2y = f^2``."""
    N, D = d.window.N, d.window.D
    # B = 1 - sum_{n>=1} (2n+1) u_n s^(n-1) with s = f^2
    B = HalfLaurent({0: 1}, None, None, D) - HalfLaurent(
        {2 * (n - 1): MPoly.var(n, 2 * n + 1) for n in range(1, N + 1)}, None, None, D)
    out = series_mul(B, B).shift(2) - B.scale(MPoly.var(0, 2))
    extra: dict[int, MPoly] = {}
    for n, dn in enumerate(d.dF0):
        for k in range(n + 2, N + 1):
            e = 2 * (k - n - 2)
            extra[e] = extra.get(e, MPoly.zero()) + MPoly.var(k, 2 * (2 * k + 1)).mul(dn, D)
    return out + HalfLaurent(extra, None, None, D)


def check_x2_minus(d: SpecialDeformation) -> dict:
    """Report on ``(x^2)_-`` (expected zero) and ``(x^2)_+`` against the closed forms."""
    x2 = d.x_series * d.x_series
    minus = project(x2, "minus")
    plus = project(x2, "plus")
    residual = {k: c for k, c in sorted(minus.coeffs.items())}
    a = a_coefficients(d)
    from_a = HalfLaurent({2 * m: am for m, am in enumerate(a) if am}, None, None, d.window.D)
    return {
        "window": d.window,
        "residual": residual,
        "minus_zero": not residual,
        "plus_matches_closed_form": plus.agrees_with(x2_closed_form(d)),
        "plus_matches_a": plus.agrees_with(from_a),
        "ok": not residual and plus.agrees_with(from_a) and plus.agrees_with(x2_closed_form(d)),
    }


def bump_coefficient(poly: MPoly, exps, delta=1) -> MPoly:
    """Fault injection: add ``delta`` to one coefficient."""
    return poly + MPoly.monomial(exps, delta)


# ---------------------------------------------------------------------------
# uniqueness recursion


@dataclass(frozen=True)
class UniqueSolution:
    """``w[m]`` is ``w_m`` in ``v_0, v_1, ...`` through ordinary degree ``degree``;
    ``strata[m][n]`` is its homogeneous part of degree ``n``."""

    w: tuple[MPoly, ...]
    strata: tuple[tuple[MPoly, ...], ...]
    degree: int

    def in_u(self) -> tuple[MPoly, ...]:
        """Substitute ``v_n = (2n+1) u_n``."""
        return tuple(p.scale_vars({j: 2 * j + 1 for j in range(p.max_var() + 1)}) for p in self.w)


def unique_w(D: int, M: int) -> UniqueSolution:
    """``w_0..w_M`` from ``w_0^(2) = v_0^2/2`` and the degree-by-degree recursion."""
    if D < 2:
        raise ValueError("D must be at least 2")
    top = max(M, D - 2)
    # w[m][n]; only n >= m + 2 can be nonzero
    w = [[MPoly.zero() for _ in range(D + 1)] for _ in range(top + 1)]
    w[0][2] = MPoly.monomial({0: 2}, Fraction(1, 2))
    for n in range(3, D + 1):
        for m in range(0, min(top, n - 2) + 1):
            acc = MPoly.zero()
            if m == 0:
                for j in range(1, top + 2):
                    if j - 1 <= top and w[j - 1][n - 1]:
                        acc = acc + MPoly.var(j) * w[j - 1][n - 1]
            else:
                for j in range(0, top + 1):
                    i = j + m - 1
                    if i <= top and w[i][n - 1]:
                        acc = acc + MPoly.var(j) * w[i][n - 1]
                for j in range(0, m - 1):
                    for k in range(n + 1):
                        left, right = w[j][k], w[m - 2 - j][n - k]
                        if left and right:
                            acc = acc + (left * right).scale(Fraction(1, 2))
            w[m][n] = acc
    strata = tuple(tuple(row) for row in w[: M + 1])
    total = tuple(sum(row, MPoly.zero()) for row in strata)
    return UniqueSolution(total, strata, D)


# ---------------------------------------------------------------------------
# superpotential


def a_coefficients(d: SpecialDeformation) -> list[MPoly]:
    """``x^2 = sum_m a_m (2y)^m`` read off from the expansion in ``2y``.

    For ``m >= 2`` the quadratic sum runs over indices ``>= 2`` (the ``u_1``
    cross terms already sit inside ``-2 (1 - 3u_1)(2m+1) u_m``) and the
    ``dF0/du_n`` tail carries ``2k + 1 = 2n + 2m + 5`` with ``k = n + 2 + m``.
    """
    return _a_coefficients(d, reference=False)


def a_coefficients_reference(d: SpecialDeformation) -> list[MPoly]:
    """Variant with quadratic indices from 1 and tail factor ``2n + 2m + 1`` for ``m >= 2``.

    Kept only so tests can show it disagrees with the direct square of ``x``.
    """
    return _a_coefficients(d, reference=True)


def _a_coefficients(d: SpecialDeformation, reference: bool) -> list[MPoly]:
    N, D = d.window.N, d.window.D
    u = [MPoly.var(n) for n in range(N + 1)] + [MPoly.zero()] * (2 * N + 4)
    one3 = MPoly.const(1) - u[1].scale(3) if N >= 1 else MPoly.const(1)

    def tail(m: int, shift: int) -> MPoly:
        # 2 sum_n (2n+2m+shift) u_{n+2+m} dF0/du_n
        acc = MPoly.zero()
        for n, dn in enumerate(d.dF0):
            if n + 2 + m <= N:
                acc = acc + u[n + 2 + m].scale(2 * (2 * n + 2 * m + shift)).mul(dn, D)
        return acc

    a = [(-u[0].scale(2)).mul(one3, D) + tail(0, 5)]
    a.append(one3.mul(one3, D) + u[0].mul(u[2], D).scale(10) + tail(1, 5))
    low, shift = (1, 1) if reference else (2, 5)
    for m in range(2, 2 * N):
        am = -(one3 * u[m]).scale(2 * (2 * m + 1)) + (u[0] * u[m + 1]).scale(2 * (2 * m + 3))
        for m1 in range(low, m + 2 - low):
            m2 = m + 1 - m1
            am = am + (u[m1] * u[m2]).scale((2 * m1 + 1) * (2 * m2 + 1))
        a.append(am.truncate(D) + tail(m, shift))
    while len(a) > 2 and not a[-1]:
        a.pop()
    return a


@dataclass(frozen=True)
class SuperpotentialCoeffs:
    """``x^2 = sum a_m (2y)^m`` and ``2y = sum c_m x^(2m)``.

    ``b`` is the Lagrange dual of ``(a_2/a_1, a_3/a_1, ...)`` (starting at ``b_2``).
    """

    a: tuple[MPoly, ...]
    b: tuple[MPoly, ...]
    c: tuple[MPoly, ...]
    window: Window


def superpotential_coeffs(f0: MPoly, window: Window, count: int | None = None) -> SuperpotentialCoeffs:
    """``c_0..c_count`` (default ``D + 2``) exact through ordinary degree ``D``."""
    D = window.D
    d = build_special_x(f0, window)
    a = a_coefficients(d)
    M = D + 2 if count is None else count
    K = M + D  # a_0 has no constant term, so c_m only needs b_n with n - m <= D
    inv_a1 = mpoly_inverse(a[1], D)
    beta = [a[k].mul(inv_a1, D) if k < len(a) else MPoly.zero() for k in range(2, K + 1)]
    b = lagrange_dual(beta, K, D) if K >= 2 else []
    bs = [MPoly.zero(), MPoly.const(1)] + list(b)  # bs[n] = b_n with b_1 = 1
    a0 = -a[0]  # -a_0 enters as (x^2 - a_0)/a_1
    a0_pows = [MPoly.const(1)]
    for _ in range(D + 1):
        a0_pows.append(a0_pows[-1].mul(a0, D))
    inv_pows = [MPoly.const(1)]
    for _ in range(K + 1):
        inv_pows.append(inv_pows[-1].mul(inv_a1, D))
    c = []
    for m in range(M + 1):
        acc = MPoly.zero()
        for n in range(max(m, 1), min(K, m + D) + 1):
            # s = sum_n b_n ((x^2 - a_0)/a_1)^n, expand (x^2 + a0)^n
            if not bs[n] or n - m >= len(a0_pows):
                continue
            term = bs[n].mul(a0_pows[n - m], D).mul(inv_pows[n], D)
            acc = acc + term.scale(comb(n, m))
        c.append(acc)
    return SuperpotentialCoeffs(tuple(a), tuple(b), tuple(c), window)


def compose_back(sp: SuperpotentialCoeffs, order: int) -> HalfLaurent:
    """``sum_m c_m (sum_k a_k s^k)^m`` as a power series in ``s = f^2`` through ``s^order``.

    Exact (and expected to equal ``s``) when ``len(c) > order + D``.
    """
    D = sp.window.D
    x2 = HalfLaurent(dict(enumerate(sp.a)), None, order, D)
    out = HalfLaurent({}, None, order, D)
    power = HalfLaurent({0: 1}, None, order, D)
    for cm in sp.c:
        out = out + power.scale(cm)
        power = series_mul(power, x2).truncate(hi=order)
    return out


# ---------------------------------------------------------------------------
# the (u_0, u_2) example


def example_u0_u2(order: int, degree: int | None = None) -> dict:
    """Series solution of the ``(u_0, u_2)`` deformation.

    Returns the Fuss-Catalan stream of ``Y/U`` in ``X/U^3`` (obtained by
    reverting ``s - 2s^2 + s^3``), and the coefficients of ``2y`` in powers of
    ``x^2`` twice: from the closed form and from the superpotential route.
    """
    degree = 2 * order if degree is None else degree
    cubic = HalfLaurent({1: 1, 2: -2, 3: 1}, None, None)
    stream = reversion(cubic, order)
    catalan = [stream.coeff(k).constant() for k in range(1, order + 1)]
    predicted = [Fraction(comb(3 * n + 1, n), n + 1) for n in range(order)]

    # closed form; w = u_0 u_2 and both variables kept explicit
    u0, u2 = MPoly.var(0), MPoly.var(2)
    w = u0 * u2
    deg = degree

    def one_minus_30w(r) -> MPoly:
        return mpoly_binomial(w.scale(-30), r, deg)

    root = one_minus_30w(Fraction(1, 2))
    # (1 - sqrt(1-30w)) / u_2: every term of 1 - sqrt has a factor w, so divide formally
    numer = MPoly.const(1) - root
    c0 = MPoly({(k[0], k[1], *k[2:3], k[3] - 1, *k[4:]): v for k, v in numer.items()}).scale(Fraction(2, 15))
    closed = [c0.truncate(deg)]
    for n in range(order):
        coef = (u2.scale(5).pow(n, deg)).mul(one_minus_30w(-Fraction(3 * n + 2, 2)), deg)
        closed.append(coef.scale(Fraction(comb(3 * n + 1, n), n + 1)).truncate(deg))

    # superpotential route restricted to u_0, u_2
    win = Window(deg, 2, 0)
    solver = CorrelatorSolver()
    f0 = free_energy(compute_correlators(Window(deg + 1, 2, 0), solver=solver), "u")[0].restrict([0, 2])
    sp = superpotential_coeffs(f0, win, count=order)
    route = [c.restrict([0, 2]) for c in sp.c[: order + 1]]
    return {
        "catalan": catalan,
        "catalan_expected": predicted,
        "closed_form": closed,
        "superpotential": route,
        "agree": closed == route,
        "degree": deg,
    }
