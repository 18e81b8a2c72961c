"""Intersection numbers of psi-classes, free energies and the KdV hierarchy.

Correlators come from the coefficient form of the Virasoro constraints
``dZ/du_{n+1} = L_n Z``.  Extracting the coefficient of a single monomial
turns the constraint with ``n = j - 1`` into

    (2j+1)!! <tau_j tau_A>_g
        = sum_{a in A} (2a+2j-1)!!/(2a-1)!! <tau_{a+j-1} tau_{A-a}>_g
        + 1/2 sum_{r+s=j-2} (2r+1)!! (2s+1)!! ( <tau_r tau_s tau_A>_{g-1}
              + sum_{g1+g2=g, I+J=A} <tau_r tau_I>_{g1} <tau_s tau_J>_{g2} )

whose inhomogeneous terms (``u_0**2/(2 lambda**2)`` and ``1/8``) are exactly
the two seeds.  Every term on the right has smaller ``2g - 2 + n`` or a
smaller largest index, so a memoized recursion terminates and is exact:
nothing it needs is ever outside reach, whatever the requested window.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import comb, factorial, prod
from typing import Iterable, Iterator, Mapping

from .series import MPoly, Window, dfact, t_to_u

__all__ = [
    "DEFAULT_SEEDS",
    "OutsideWindowError",
    "CorrelatorSolver",
    "CorrelatorTable",
    "compute_correlators",
    "string_equation_check",
    "FreeEnergy",
    "free_energy",
    "genus0_one_point_recursion",
    "KdVPolynomial",
    "kdv_R",
    "total_derivative",
    "jet_antiderivative",
    "kdv_flow_check",
]

DEFAULT_SEEDS: dict[tuple[int, tuple[int, ...]], Fraction] = {
    (0, (0, 0, 0)): Fraction(1),
    (1, (1,)): Fraction(1, 24),
}


class OutsideWindowError(KeyError):
    """A correlator was requested outside the table's window."""


def _stable(g: int, n: int) -> bool:
    return 2 * g - 2 + n > 0


def _selection(g: int, alphas: tuple[int, ...]) -> bool:
    return sum(alphas) == 3 * g - 3 + len(alphas)


class CorrelatorSolver:
    """Memoized solver; ``seeds`` replace the two inhomogeneous terms."""

    def __init__(self, seeds: Mapping[tuple[int, tuple[int, ...]], Fraction] | None = None):
        self.seeds = {(g, tuple(sorted(a))): Fraction(v)
                      for (g, a), v in (seeds or DEFAULT_SEEDS).items()}
        self._cache: dict[tuple[int, tuple[int, ...]], Fraction] = {}

    def __call__(self, g: int, alphas: Iterable[int]) -> Fraction:
        key = (g, tuple(sorted(alphas)))
        hit = self._cache.get(key)
        if hit is None:
            hit = self._solve(*key)
            self._cache[key] = hit
        return hit

    def _solve(self, g: int, alphas: tuple[int, ...]) -> Fraction:
        n = len(alphas)
        if g < 0 or not alphas or alphas[0] < 0:
            return Fraction(0)
        if not _stable(g, n) or not _selection(g, alphas):
            return Fraction(0)
        if (g, alphas) in self.seeds:
            return self.seeds[(g, alphas)]
        j, rest = alphas[-1], alphas[:-1]
        total = Fraction(0)
        counts = Counter(rest)
        for a, mult in counts.items():
            lowered = list(rest)
            lowered.remove(a)
            weight = Fraction(dfact(2 * a + 2 * j - 1), dfact(2 * a - 1))
            total += mult * weight * self(g, lowered + [a + j - 1])
        for r in range(j - 1):
            s = j - 2 - r
            w = Fraction(dfact(2 * r + 1) * dfact(2 * s + 1), 2)
            acc = self(g - 1, rest + (r, s))
            for g1 in range(g + 1):
                for left, weight in _sub_multisets(counts):
                    right = list((counts - Counter(left)).elements())
                    acc += weight * self(g1, left + [r]) * self(g - g1, right + [s])
            total += w * acc
        return total / dfact(2 * j + 1)


def _sub_multisets(counts: Counter) -> Iterator[tuple[list[int], int]]:
    """All sub-multisets with the number of labelled subsets they stand for."""
    keys = sorted(counts)
    for picks in product(*(range(counts[k] + 1) for k in keys)):
        left = [k for k, p in zip(keys, picks) for _ in range(p)]
        yield left, prod(comb(counts[k], p) for k, p in zip(keys, picks))


def _multisets(total: int, size: int, top: int, low: int = 0) -> Iterator[tuple[int, ...]]:
    """Sorted tuples of ``size`` integers in ``[low, top]`` summing to ``total``."""
    if size == 0:
        if total == 0:
            yield ()
        return
    for first in range(low, min(top, total) + 1):
        if first * size > total:
            break
        for tail in _multisets(total - first, size - 1, top, first):
            yield (first, *tail)


@dataclass(frozen=True)
class CorrelatorTable:
    """All stable correlators with ``g <= G``, ``n <= D`` and indices ``<= N``."""

    entries: dict[tuple[int, tuple[int, ...]], Fraction]
    window: Window
    seeds: dict = field(default_factory=dict)

    def in_window(self, g: int, alphas: Iterable[int]) -> bool:
        alphas = tuple(alphas)
        w = self.window
        return 0 <= g <= w.G and len(alphas) <= w.D and all(0 <= a <= w.N for a in alphas)

    def lookup(self, g: int, alphas: Iterable[int]) -> Fraction:
        """Order-insensitive access; zero when the selection rule fails."""
        alphas = tuple(sorted(alphas))
        if not self.in_window(g, alphas):
            raise OutsideWindowError(f"<{alphas}>_{g} lies outside window {self.window}")
        return self.entries.get((g, alphas), Fraction(0))

    def __iter__(self):
        return iter(sorted(self.entries.items()))

    def __len__(self) -> int:
        return len(self.entries)


def compute_correlators(window: Window, seeds: Mapping | None = None,
                        solver: CorrelatorSolver | None = None) -> CorrelatorTable:
    solver = solver or CorrelatorSolver(seeds)
    entries = {}
    for g in range(window.G + 1):
        for n in range(1, window.D + 1):
            if not _stable(g, n):
                continue
            for alphas in _multisets(3 * g - 3 + n, n, window.N):
                v = solver(g, alphas)
                if v:
                    entries[(g, alphas)] = v
    return CorrelatorTable(entries, window, dict(solver.seeds))


def string_equation_check(table: CorrelatorTable) -> list[dict]:
    """Violations of ``<tau_0 tau_A>_g = sum_i <.. tau_{a_i - 1} ..>_g``."""
    violations = []
    for (g, alphas), value in table:
        if alphas[0] != 0:
            continue
        rest = alphas[1:]
        if not _stable(g, len(rest)):
            continue
        expected = Fraction(0)
        for i, a in enumerate(rest):
            if a:
                expected += table.lookup(g, rest[:i] + (a - 1,) + rest[i + 1:])
        if expected != value:
            violations.append({"g": g, "alphas": list(alphas), "value": value, "expected": expected})
    # entries with a tau_0 that the recursion returned as zero are absent;
    # their right-hand sides must vanish too
    w = table.window
    for g in range(w.G + 1):
        for n in range(2, w.D + 1):
            if not _stable(g, n - 1):
                continue
            for rest in _multisets(3 * g - 3 + n, n - 1, w.N):
                alphas = tuple(sorted((0, *rest)))
                if (g, alphas) in table.entries:
                    continue
                expected = sum((table.lookup(g, rest[:i] + (a - 1,) + rest[i + 1:])
                                for i, a in enumerate(rest) if a), Fraction(0))
                if expected:
                    violations.append({"g": g, "alphas": list(alphas), "value": Fraction(0),
                                       "expected": expected})
    return violations


@dataclass(frozen=True)
class FreeEnergy:
    """``F_g`` per genus as polynomials in ``u`` or ``t`` coordinates."""

    per_genus: dict[int, MPoly]
    coordinates: str
    window: Window

    def __getitem__(self, g: int) -> MPoly:
        return self.per_genus[g]

    def total(self) -> MPoly:
        """``sum_g lambda**(2g-2) F_g``."""
        out = MPoly.zero()
        for g, fg in self.per_genus.items():
            out = out + fg * MPoly.lam(2 * g - 2)
        return out


def free_energy(table: CorrelatorTable, coords: str = "u") -> FreeEnergy:
    if coords not in ("u", "t"):
        raise ValueError("coords must be 'u' or 't'")
    per: dict[int, dict] = {g: {} for g in range(table.window.G + 1)}
    for (g, alphas), value in table:
        mult = Counter(alphas)
        exps = [0] * (max(alphas) + 1)
        c = Fraction(value)
        for a, e in mult.items():
            exps[a] = e
            c /= factorial(e)
        per[g][(0, *exps)] = c
    out = {g: MPoly(terms) for g, terms in per.items()}
    if coords == "u":
        out = {g: t_to_u(p) for g, p in out.items()}
    return FreeEnergy(out, coords, table.window)


def genus0_one_point_recursion(n_max: int) -> list[MPoly]:
    """``f_n(u_0)`` from ``f_n = u_0 f_{n-1} + 1/2 sum_k f_k f_{n-k-2}``, ``f_0 = u_0**2/2``."""
    u0 = MPoly.var(0)
    fs = [u0 * u0 * Fraction(1, 2)]
    for n in range(1, n_max + 1):
        acc = u0 * fs[n - 1]
        for k in range(n - 1):
            acc = acc + (fs[k] * fs[n - k - 2]).scale(Fraction(1, 2))
        fs.append(acc)
    return fs


# ---------------------------------------------------------------------------
# KdV.  A differential polynomial is an MPoly whose slot i holds d^i u / dx^i;
# the lambda slot carries the dispersion parameter.


@dataclass(frozen=True)
class KdVPolynomial:
    index: int
    expression: MPoly

    def pretty(self) -> str:
        return self.expression.pretty("u")


def total_derivative(p: MPoly) -> MPoly:
    """``d/dx`` acting on a jet polynomial."""
    out = MPoly.zero()
    for i in range(p.max_var() + 1):
        d = p.diff(i)
        if d:
            out = out + d * MPoly.var(i + 1)
    return out


def jet_antiderivative(s: MPoly) -> MPoly:
    """``R`` with ``d/dx R = s`` and no constant term; raises if ``s`` is not exact.

    Peels off the highest jet: if ``s = P u^(m) + (order < m)`` then
    ``Q = int P du^(m-1)`` has ``d/dx Q = P u^(m) + (order < m)``.
    """
    out = MPoly.zero()
    while s:
        m = s.max_var()
        if m <= 0:
            raise ValueError("not a total derivative")
        top = s.diff(m)
        if top.max_var() >= m:
            raise ValueError("not a total derivative")
        q = top.integrate(m - 1)
        out = out + q
        s = s - total_derivative(q)
    return out


_R_CACHE: dict[int, MPoly] = {1: MPoly.var(0)}


def kdv_R(n: int) -> KdVPolynomial:
    """``R_n`` from ``R_1 = u`` and
    ``d R_{n+1} = (u' R_n + 2u R_n' + (lambda^2/4) R_n''') / (2n+1)``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    for k in range(max(_R_CACHE), n):
        rk = _R_CACHE[k]
        drk = total_derivative(rk)
        d3 = total_derivative(total_derivative(drk))
        u = MPoly.var(0)
        rhs = MPoly.var(1) * rk + (u * drk).scale(2) + (d3 * MPoly.lam(2)).scale(Fraction(1, 4))
        _R_CACHE[k + 1] = jet_antiderivative(rhs.scale(Fraction(1, 2 * k + 1)))
    return KdVPolynomial(n, _R_CACHE[n])


def kdv_flow_check(n: int, window: Window, energy: FreeEnergy | None = None,
                   solver: CorrelatorSolver | None = None) -> dict:
    """Residual of ``d u/d t_n = d/dt_0 R_{n+1}`` for ``u = lambda^2 d^2F/dt_0^2``.

    The residual is exact through ordinary degree ``D`` and genus ``G``.  The
    free energy is computed to degree ``D + 2n + 3`` because the ``2n + 1``
    t_0-derivatives in ``d/dt_0 R_{n+1}`` each cost one degree.
    """
    D, G = window.D, window.G
    nvars = max(window.N, n) + 1
    if energy is None:
        inner = Window(D + 2 * n + 3, nvars - 1, G)
        energy = free_energy(compute_correlators(inner, solver=solver), "t")
    if energy.coordinates != "t":
        raise ValueError("flow check works in t coordinates")
    F = energy.total().truncate(nvars=nvars)
    u = (F.diff(0, 2) * MPoly.lam(2)).filter(lambda k: k[0] <= 2 * G)
    rhs_jet = total_derivative(kdv_R(n + 1).expression)
    jets = {k: u.diff(0, k).truncate(D) for k in range(rhs_jet.max_var() + 1)}
    rhs = rhs_jet.substitute(jets, D)
    lhs = u.diff(n).truncate(D)
    residual = (lhs - rhs).filter(lambda k: k[0] <= 2 * G)
    return {"n": n, "degree": D, "genus": G, "residual": residual, "ok": not residual}
