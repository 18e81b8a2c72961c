"""Landau-Ginzburg fields on the deformed Airy curve.

Small phase space (``W = x^2/2 + u_0``): descendants ``sigma_n`` are
polynomials stored as ``MPoly`` with slot 0 for ``u_0`` and slot 1 for
``X = x^2``.  Big phase space: fields are ``HalfLaurent`` series in ``x``
whose coefficients are polynomials in ``u_0..u_N``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial

from .deformation import (SpecialDeformation, SuperpotentialCoeffs, build_special_x,
                          genus0_energy, superpotential_coeffs)
from .gravity import CorrelatorSolver
from .series import (HalfLaurent, MPoly, Window, binomial_pow, dfact, mpoly_binomial,
                     nilpotent_pow, project, residue, series_mul)

__all__ = [
    "U0",
    "XX",
    "DescendantField",
    "sigma",
    "sigma_closed",
    "sigma_projection",
    "sigma_explicit2",
    "generating_identity_check",
    "f_basis",
    "structure_expand",
    "structure_formula",
    "structure_associative",
    "lg_correlator",
    "small_phase_identification",
    "BigPhase",
    "big_phase",
    "BigPhaseField",
    "phi_n",
    "phi_n_direct",
    "sigma_big",
    "phi0_u0u2_closed",
    "flat_connection_check",
    "big_phase_correlator",
]

U0, XX = 0, 1  # slots in small-phase polynomials: u_0 and X = x^2


# ---------------------------------------------------------------------------
# small phase space


@dataclass(frozen=True)
class DescendantField:
    n: int
    poly: MPoly  # in u_0 (slot 0) and X = x^2 (slot 1)

    def as_series(self) -> HalfLaurent:
        """The same polynomial as a series in ``x`` with ``u_0`` coefficients."""
        out: dict[int, MPoly] = {}
        for k, c in self.poly.items():
            e = k[2] if len(k) > 2 else 0
            mono = MPoly.monomial([k[1] if len(k) > 1 else 0], c)
            out[2 * e] = out.get(2 * e, MPoly.zero()) + mono
        return HalfLaurent(out)


def _from_series(s: HalfLaurent) -> MPoly:
    out = MPoly.zero()
    for k, c in s.coeffs.items():
        if k % 2:
            raise ValueError("odd power of x in an even field")
        for key, v in c.items():
            if len(key) > 2:
                raise ValueError("small-phase coefficient depends on u_k with k > 0")
            e0 = key[1] if len(key) > 1 else 0
            out = out + MPoly.monomial([e0, k // 2], v)
    return out


def sigma_closed(n: int) -> MPoly:
    """``sum_j x^(2j) u_0^(n-j) / ((2j-1)!! (n-j)!)``."""
    return MPoly({(0, n - j, j): Fraction(1, dfact(2 * j - 1) * factorial(n - j)) for j in range(n + 1)})


def _small_L(order: int) -> HalfLaurent:
    # L = (x^2 + 2u_0)^(1/2) expanded at x = infinity down to x^order
    return binomial_pow(HalfLaurent({2: 1, 0: MPoly.var(0, 2)}), Fraction(1, 2), order=order)


def sigma_projection(n: int) -> MPoly:
    """``(L^(2n) d_x L)_+ / (2n-1)!!``."""
    L = _small_L(-2 * n - 1)
    L2n = HalfLaurent({2: 1, 0: MPoly.var(0, 2)})
    power = HalfLaurent({0: 1})
    for _ in range(n):
        power = power * L2n
    plus = project(series_mul(power, L.derivative()), "plus")
    return _from_series(plus).scale(Fraction(1, dfact(2 * n - 1)))


def sigma_explicit2(n: int, sign: int = -1) -> MPoly:
    """``sign * sum_j (2j-3)!!/j! u_0^j (x^2 + 2u_0)^(n-j)`` divided by ``(2n-1)!!``.

    With ``(-3)!! = -1`` the bare sum is ``-(2n-1)!! sigma_n`` (at ``n = 0``
    it equals ``-1``), hence the default ``sign = -1``.
    """
    base = MPoly.var(XX) + MPoly.var(U0, 2)
    acc = MPoly.zero()
    for j in range(n + 1):
        acc = acc + (MPoly.var(U0).pow(j) * base.pow(n - j)).scale(Fraction(dfact(2 * j - 3), factorial(j)))
    return acc.scale(Fraction(sign, dfact(2 * n - 1)))


def sigma(n: int) -> DescendantField:
    """Descendant ``sigma_n(phi_0)``; raises if the two constructions disagree."""
    if n < 0:
        raise ValueError("n must be non-negative")
    closed = sigma_closed(n)
    if sigma_projection(n) != closed:  # pragma: no cover - guarded by tests
        raise ArithmeticError(f"sigma_{n}: projection and closed form disagree")
    return DescendantField(n, closed)


def generating_identity_check(order: int) -> bool:
    """``sum (2n-1)!! sigma_n t^n = sqrt(1 - 2u_0 t) / (1 - t (x^2 + 2u_0))`` through ``t^order``."""
    sqrt = binomial_pow(HalfLaurent({0: 1, 1: MPoly.var(U0, -2)}, None, order), Fraction(1, 2),
                        order=order, at="zero")
    geo = binomial_pow(HalfLaurent({0: 1, 1: -(MPoly.var(XX) + MPoly.var(U0, 2))}, None, order), -1,
                       order=order, at="zero")
    rhs = series_mul(sqrt, geo)
    lhs = HalfLaurent({n: sigma_closed(n).scale(dfact(2 * n - 1)) for n in range(order + 1)}, None, order)
    return lhs.agrees_with(rhs)


def f_basis(n: int) -> MPoly:
    """``f_n = (2n-1)!! sigma_n`` at ``u_0 = 1``, a polynomial in ``X``."""
    return sigma_closed(n).scale(dfact(2 * n - 1)).substitute({U0: MPoly.const(1)})


def structure_expand(j: int, k: int) -> dict[int, Fraction]:
    """Coefficients of ``f_j f_k`` in the basis ``f_0, f_1, ...``."""
    prod = f_basis(j) * f_basis(k)
    out: dict[int, Fraction] = {}
    # f_l is monic of degree l in X: peel off the top term repeatedly
    while prod:
        top = max(k[2] if len(k) > 2 else 0 for k, _ in prod.items())
        c = prod.coeff({XX: top})
        out[top] = c
        prod = prod - f_basis(top).scale(c)
    return dict(sorted(out.items(), reverse=True))


def structure_formula(j: int, k: int) -> dict[int, Fraction]:
    """Closed form of the structure constants for ``k >= j >= 1``."""
    if k < j:
        j, k = k, j
    if j == 0:
        return {k: Fraction(1)}
    out: dict[int, Fraction] = {j + k: Fraction(1)}
    for l in range(1, j + 1):
        out[j + k - l] = out.get(j + k - l, 0) - Fraction(dfact(2 * l - 3), factorial(l))
        out[j - l] = out.get(j - l, 0) + Fraction(dfact(2 * (k + l) - 3), factorial(k + l))
    return {l: c for l, c in sorted(out.items(), reverse=True) if c}


def structure_associative(top: int) -> bool:
    """``(f_a f_b) f_c = f_a (f_b f_c)`` using structure constants only, ``a, b, c <= top``."""
    cache: dict[tuple[int, int], dict[int, Fraction]] = {}

    def expand(a, b):
        key = (min(a, b), max(a, b))
        if key not in cache:
            cache[key] = structure_expand(*key)
        return cache[key]

    def times(vec, c, left):
        out: dict[int, Fraction] = {}
        for l, v in vec.items():
            for m, w in expand(l, c).items():
                out[m] = out.get(m, 0) + v * w
        return {m: v for m, v in out.items() if v}

    for a in range(top + 1):
        for b in range(top + 1):
            for c in range(top + 1):
                if times(expand(a, b), c, True) != times(expand(b, c), a, False):
                    return False
    return True


def _one_point_small(n: int) -> MPoly:
    # <<sigma_n>> = res(L^(2n+3) dx) / (2n+3)!!
    L = _small_L(-2 * n - 5)
    power = HalfLaurent({0: 1})
    for _ in range(2 * n + 3):
        power = series_mul(power, L)
    return residue(power).scale(Fraction(1, dfact(2 * n + 3)))


def lg_correlator(ns: list[int] | tuple[int, ...], m: int = 0) -> MPoly:
    """Small-phase correlator of descendants ``ns`` (at most three) and ``m`` extra ``phi_0``.

    * no descendants: ``<<phi_0^m>>`` from the one-point function by ``d/du_0``;
    * one: ``res(L^(2n+3))/(2n+3)!!`` differentiated ``m`` times;
    * two: ``<<s_a s_b s_0 phi_0^(m-1)>>``; for ``m = 0`` the value comes from
      integrating the three-point function in ``u_0`` from 0;
    * three: ``res(s_a s_b s_c / d_x W)``, then ``m`` derivatives.
    """
    ns = sorted(ns)
    if len(ns) > 3:
        raise ValueError("at most three descendant insertions; add phi_0 through m")
    if len(ns) == 0:
        if m == 0:
            raise ValueError("need at least one insertion")
        return _one_point_small(0).diff(U0, m - 1)
    if len(ns) == 1:
        return _one_point_small(ns[0]).diff(U0, m)
    if len(ns) == 2:
        if m == 0:
            return lg_correlator(ns + [0], 0).integrate(U0)
        return lg_correlator(ns + [0], m - 1)
    prod = sigma(ns[0]).poly * sigma(ns[1]).poly * sigma(ns[2]).poly
    # d_x W = x, so res(P/x) is the X^0 coefficient of P
    value = prod.filter(lambda k: len(k) <= 2)
    return value.diff(U0, m)


def small_phase_identification(ns: tuple[int, int, int], m: int = 0,
                               solver: CorrelatorSolver | None = None) -> tuple[MPoly, MPoly]:
    """``(LG value, d^(m+3) F_0 / dt_n1 dt_n2 dt_n3 dt_0^m at t = (u_0, 0, ...))``."""
    solver = solver or CorrelatorSolver()
    k = sum(ns)
    if k < m:
        grav = MPoly.zero()
    else:
        value = solver(0, list(ns) + [0] * k)
        grav = MPoly.monomial([k - m], value / factorial(k - m))
    return lg_correlator(list(ns), m), grav


# ---------------------------------------------------------------------------
# big phase space


@dataclass(frozen=True)
class BigPhase:
    """Superpotential data on a window: ``2W = sum c_m x^(2m)`` exact for ``x^(<= x_top)``."""

    window: Window
    deformation: SpecialDeformation
    coeffs: SuperpotentialCoeffs
    x_top: int | None  # None: exact for every power of x

    def two_w(self) -> HalfLaurent:
        return HalfLaurent({2 * m: c for m, c in enumerate(self.coeffs.c)}, None, self.x_top, self.window.D)

    def L(self) -> HalfLaurent:
        """``(2W)^(1/2)`` expanded around ``x sqrt(c_1)``, two-sided in ``x``."""
        D = self.window.D
        c = self.coeffs.c
        c1 = c[1]
        inv_c1 = mpoly_binomial(c1 - 1, -1, D)
        hi = None if self.x_top is None else self.x_top - 2
        w = HalfLaurent({2 * m - 2: cm.mul(inv_c1, D) for m, cm in enumerate(c) if m != 1}, None, hi, D)
        return nilpotent_pow(w, Fraction(1, 2)).scale(mpoly_binomial(c1 - 1, Fraction(1, 2), D)).shift(1)


def big_phase(window: Window, f0: MPoly | None = None, count: int | None = None,
              solver: CorrelatorSolver | None = None) -> BigPhase:
    """Superpotential on ``window``.

    ``c_m`` has weighted degree ``2 - 2m`` and each ``u_i`` (``i <= N``) weighs
    at least ``2 - 2N``, so ``c_m`` vanishes through degree ``D`` once
    ``m > 1 + D (N - 1)``.  The default ``count`` reaches that bound and the
    series in ``x`` is then exact on both sides.
    """
    f0 = genus0_energy(window, solver) if f0 is None else f0
    bound = 1 + window.D * max(window.N - 1, 0)
    count = bound if count is None else count
    sp = superpotential_coeffs(f0, window, count=count)
    return BigPhase(window, build_special_x(f0, window), sp, None if count >= bound else 2 * count)


@dataclass(frozen=True)
class BigPhaseField:
    n: int
    series: HalfLaurent  # power series in x

    def restrict(self, keep_vars) -> HalfLaurent:
        return self.series.map_coeffs(lambda c: c.restrict(keep_vars))

    def is_weighted_homogeneous(self) -> bool:
        # deg x = 1 and phi_n has degree 2n
        return all(c.is_weighted_homogeneous(2 * self.n - k) for k, c in self.series.coeffs.items())


def phi_n(n: int, bp: BigPhase) -> BigPhaseField:
    """``phi_n = -(sum_m 2^m d_{u_n} a_m W^m) / (2x) * d_x W``."""
    D = bp.window.D
    W = bp.two_w().scale(Fraction(1, 2))
    num = HalfLaurent({}, None, None, D)
    power = HalfLaurent({0: 1}, None, None, D)
    for m, am in enumerate(bp.coeffs.a):
        da = am.diff(n)
        if da:
            num = num + power.scale(da.scale(2 ** m))
        power = series_mul(power, W)
    dW = W.derivative()
    if any(k % 2 == 0 for k in dW.coeffs):
        raise ArithmeticError("d_x W should be odd in x")
    dW_over_x = dW.shift(-1)
    out = series_mul(num, dW_over_x).scale(Fraction(-1, 2))
    return BigPhaseField(n, out.with_degree(D - 1))


def phi_n_direct(n: int, bp: BigPhase) -> BigPhaseField:
    """``phi_n = d W / d u_n`` straight from the ``c_m``."""
    return BigPhaseField(n, bp.two_w().scale(Fraction(1, 2)).diff_var(n))


def sigma_big(n: int, bp: BigPhase) -> HalfLaurent:
    """``(L^(2n) d_x L)_+`` on the big phase space (no ``(2n-1)!!`` normalisation)."""
    L = bp.L()
    return project(series_mul(_power(bp.two_w(), n), L.derivative()), "plus")


def _power(s: HalfLaurent, n: int) -> HalfLaurent:
    out = HalfLaurent({0: 1}, None, None, s.degree)
    for _ in range(n):
        out = series_mul(out, s)
    return out


def phi0_u0u2_closed(x_order: int, degree: int) -> HalfLaurent:
    """Closed form of ``phi_0`` when only ``u_0, u_2`` are switched on."""
    w = MPoly.var(0) * MPoly.var(2)
    coeffs = {0: mpoly_binomial(w.scale(-30), Fraction(-1, 2), degree)}
    for n in range(x_order // 2):
        k = 2 * (n + 1)
        pref = Fraction(3, 2) * comb(3 * n + 2, n + 1)
        c = MPoly.var(2, 5).pow(n + 1, degree).mul(
            mpoly_binomial(w.scale(-30), -Fraction(3 * n + 4, 2), degree), degree)
        coeffs[k] = c.scale(pref)
    return HalfLaurent(coeffs, None, x_order, degree)


def flat_connection_check(i: int, j: int, k: int, bp: BigPhase, coords: str = "u") -> dict[int, HalfLaurent]:
    """``[nabla_i, nabla_j] phi_k`` split by powers of the formal parameter.

    ``nabla_i phi = d_i phi + lam phi_i phi``.  ``coords="u"`` uses ``d/du_i``
    with ``phi_i = dW/du_i``; ``"t"`` uses ``d/dt_i`` with ``phi_i = dW/dt_i``;
    ``"mixed"`` pairs ``d/dt_i`` with ``phi_i = dW/du_i`` and is not flat.
    """
    fields = {m: phi_n_direct(m, bp).series for m in {i, j, k}}
    scale_d = {m: Fraction(1) for m in fields}
    if coords in ("t", "mixed"):
        scale_d = {m: Fraction(1, dfact(2 * m + 1)) for m in fields}
    if coords == "t":
        fields = {m: s.scale(scale_d[m]) for m, s in fields.items()}
    elif coords not in ("u", "mixed"):
        raise ValueError("coords must be u, t or mixed")

    def d(a, s):
        return s.diff_var(a).scale(scale_d[a])

    def nabla(a, s_parts):
        # s_parts: lam-power -> series
        out: dict[int, HalfLaurent] = {}
        for p, s in s_parts.items():
            out[p] = out.get(p, HalfLaurent({}, None, None)) + d(a, s)
            out[p + 1] = out.get(p + 1, HalfLaurent({}, None, None)) + series_mul(fields[a], s)
        return out

    left = nabla(i, nabla(j, {0: fields[k]}))
    right = nabla(j, nabla(i, {0: fields[k]}))
    return {p: left[p] - right[p] for p in sorted(left)}


def big_phase_correlator(ns: list[int] | tuple[int, ...], bp: BigPhase) -> MPoly:
    """``res(L^(2j+3) dx)/(2j+3)!!`` for ``j = ns[-1]``, then ``d/dt`` for the rest.

    Exact through degree ``D - (len(ns) - 1)``.
    """
    ns = list(ns)
    if not ns:
        raise ValueError("need at least one insertion")
    j = ns[-1]
    L = bp.L()
    power = _power(L, 2 * j + 3)
    value = residue(power).scale(Fraction(1, dfact(2 * j + 3)))
    for a in ns[:-1]:
        value = value.diff(a).scale(Fraction(1, dfact(2 * a + 1)))
    return value.truncate(bp.window.D - (len(ns) - 1))
