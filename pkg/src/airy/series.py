"""Exact rational series algebra.

Three layers live here:

* ``MPoly``: sparse polynomials in ``u_0, u_1, ...`` over ``Fraction`` with one
  extra even exponent slot for the genus-counting parameter ``lambda``.
* ``HalfLaurent``: Laurent series in ``f`` (``z = f**2``) whose coefficients are
  ``MPoly``.  Each series carries an exponent window: coefficients outside the
  window are *unknown*, never implicitly zero.
* ``Window``: the truncation bounds (degree, variable index, genus) used by all
  higher modules.

Everything is immutable after construction.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial, prod
from typing import Callable, Iterable, Iterator, Mapping

Rat = Fraction

__all__ = [
    "Rat",
    "rat",
    "rat_str",
    "dfact",
    "binom",
    "Window",
    "MPoly",
    "HalfLaurent",
    "binomial_pow",
    "reversion",
    "nilpotent_pow",
    "compose",
    "project",
    "residue",
    "series_mul",
    "mpoly_arith",
    "mpoly_inverse",
    "mpoly_binomial",
    "t_to_u",
    "u_to_t",
    "shift_var",
    "mpoly_from_json",
    "series_from_json",
]


# ---------------------------------------------------------------------------
# scalars


def rat(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a reduced Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def rat_str(q: Fraction | int) -> str:
    """Serialize as ``"p/q"``; integers keep an explicit ``/1``."""
    q = rat(q)
    return f"{q.numerator}/{q.denominator}"


def dfact(n: int) -> int:
    """Double factorial with ``(-1)!! = 1``, ``(-3)!! = -1`` and zero below that."""
    if n >= 0:
        return prod(range(n, 0, -2))
    if n == -1:
        return 1
    if n == -3:
        return -1
    return 0


def binom(r: Fraction | int, k: int) -> Fraction:
    """Generalized binomial coefficient ``C(r, k)`` for rational ``r``."""
    if k < 0:
        return Fraction(0)
    r = rat(r)
    out = Fraction(1)
    for i in range(k):
        out *= r - i
    return out / factorial(k)


# ---------------------------------------------------------------------------
# truncation control


@dataclass(frozen=True)
class Window:
    """Truncation bounds: ordinary degree ``D``, top variable index ``N``, genus ``G``."""

    max_total_degree: int = 6
    max_var_index: int = 6
    max_genus: int = 2

    def __post_init__(self):
        for name in ("max_total_degree", "max_var_index", "max_genus"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def D(self) -> int:
        return self.max_total_degree

    @property
    def N(self) -> int:
        return self.max_var_index

    @property
    def G(self) -> int:
        return self.max_genus


# ---------------------------------------------------------------------------
# sparse polynomials
#
# A monomial key is ``(lam, e0, e1, ..., ek)`` with trailing zero u-exponents
# stripped, so polynomials in different numbers of variables compare equal.


def _key(exps: Iterable[int], lam: int = 0) -> tuple:
    exps = list(exps)
    while exps and exps[-1] == 0:
        exps.pop()
    return (lam, *exps)


def _kmul(a: tuple, b: tuple) -> tuple:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    out[0] += b[0]
    for i in range(1, len(b)):
        out[i] += b[i]
    return tuple(out)


def _kdeg(k: tuple) -> int:
    return sum(k) - k[0]


class MPoly:
    """Sparse polynomial over ``Fraction`` in ``u_0..u_N`` and ``lambda``.

    ``lambda`` only appears through even powers (``lambda**(2g-2)``).  The
    ordinary degree counts u-exponents only; the weighted degree uses
    ``deg u_i = 2 - 2i`` and ``deg lambda = 3``.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[tuple, Fraction] | None = None, _trusted: bool = False):
        if _trusted:
            self._terms = terms
        else:
            clean: dict[tuple, Fraction] = {}
            for k, c in (terms or {}).items():
                c = rat(c)
                if c == 0:
                    continue
                k = _key(k[1:], k[0])
                if k[0] % 2:
                    raise ValueError("lambda exponent must be even")
                if any(e < 0 for e in k[1:]):
                    raise ValueError("negative u-exponent")
                clean[k] = clean.get(k, 0) + c
                if clean[k] == 0:
                    del clean[k]
            self._terms = clean
        self._hash = None

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls) -> "MPoly":
        return cls({}, _trusted=True)

    @classmethod
    def const(cls, c) -> "MPoly":
        c = rat(c)
        return cls({(0,): c} if c else {}, _trusted=True)

    @classmethod
    def var(cls, i: int, coeff=1) -> "MPoly":
        return cls.monomial({i: 1}, coeff)

    @classmethod
    def monomial(cls, exps: Mapping[int, int] | Iterable[int], coeff=1, lam: int = 0) -> "MPoly":
        if isinstance(exps, Mapping):
            vec = [0] * (max(exps, default=-1) + 1)
            for i, e in exps.items():
                vec[i] += e
        else:
            vec = list(exps)
        return cls({(lam, *vec): rat(coeff)})

    @classmethod
    def lam(cls, power: int, coeff=1) -> "MPoly":
        return cls({(power,): rat(coeff)})

    # -- basic protocol ----------------------------------------------------
    def items(self) -> Iterator[tuple[tuple, Fraction]]:
        return iter(self._terms.items())

    def terms(self) -> dict[tuple, Fraction]:
        return dict(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = MPoly.const(other)
        if not isinstance(other, MPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self) -> str:
        return f"MPoly({self.pretty()})"

    def pretty(self, name: str = "u") -> str:
        if not self._terms:
            return "0"
        parts = []
        for k in sorted(self._terms, key=lambda k: (_kdeg(k), k)):
            c = self._terms[k]
            mono = [f"{name}{i}^{e}" if e > 1 else f"{name}{i}" for i, e in enumerate(k[1:]) if e]
            if k[0]:
                mono.append(f"lam^{k[0]}")
            body = "*".join(mono)
            parts.append(f"{c}*{body}" if body else str(c))
        return " + ".join(parts)

    # -- arithmetic ----------------------------------------------------------
    @staticmethod
    def _coerce(other) -> "MPoly":
        if isinstance(other, MPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return MPoly.const(other)
        raise TypeError(f"cannot combine MPoly with {type(other).__name__}")

    def __add__(self, other) -> "MPoly":
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        out = dict(self._terms)
        for k, c in other._terms.items():
            v = out.get(k, 0) + c
            if v:
                out[k] = v
            else:
                out.pop(k, None)
        return MPoly(out, _trusted=True)

    __radd__ = __add__

    def __neg__(self) -> "MPoly":
        return MPoly({k: -c for k, c in self._terms.items()}, _trusted=True)

    def __sub__(self, other) -> "MPoly":
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "MPoly":
        return self._coerce(other) - self

    def scale(self, c) -> "MPoly":
        c = rat(c)
        if not c:
            return MPoly.zero()
        return MPoly({k: v * c for k, v in self._terms.items()}, _trusted=True)

    def __mul__(self, other) -> "MPoly":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, MPoly):
            return NotImplemented
        return self.mul(other)

    __rmul__ = __mul__

    def __truediv__(self, c) -> "MPoly":
        if isinstance(c, (int, Fraction)):
            return self.scale(Fraction(1) / rat(c))
        return NotImplemented

    def mul(self, other: "MPoly", degree: int | None = None, keep: Callable[[tuple], bool] | None = None) -> "MPoly":
        """Product, dropping monomials of ordinary degree above ``degree``."""
        out: dict[tuple, Fraction] = {}
        a, b = self._terms, other._terms
        if len(a) < len(b):
            a, b = b, a
        bitems = [(k, c, _kdeg(k)) for k, c in b.items()]
        for ka, ca in a.items():
            da = _kdeg(ka)
            for kb, cb, db in bitems:
                if degree is not None and da + db > degree:
                    continue
                k = _kmul(ka, kb)
                if keep is not None and not keep(k):
                    continue
                v = out.get(k, 0) + ca * cb
                if v:
                    out[k] = v
                else:
                    del out[k]
        return MPoly(out, _trusted=True)

    def pow(self, n: int, degree: int | None = None) -> "MPoly":
        if n < 0:
            raise ValueError("negative powers need mpoly_inverse")
        out = MPoly.const(1)
        base = self
        while n:
            if n & 1:
                out = out.mul(base, degree)
            n >>= 1
            if n:
                base = base.mul(base, degree)
        return out

    def __pow__(self, n: int) -> "MPoly":
        return self.pow(n)

    # -- calculus -------------------------------------------------------------
    def diff(self, i: int, times: int = 1) -> "MPoly":
        """Partial derivative in ``u_i``."""
        if times == 0:
            return self
        out: dict[tuple, Fraction] = {}
        j = i + 1
        for k, c in self._terms.items():
            if len(k) <= j or k[j] < times:
                continue
            e = k[j]
            factor = prod(range(e, e - times, -1))
            nk = list(k)
            nk[j] -= times
            nk = _key(nk[1:], nk[0])
            out[nk] = out.get(nk, 0) + c * factor
        return MPoly(out, _trusted=True)

    def integrate(self, i: int) -> "MPoly":
        """Antiderivative in ``u_i`` with zero constant of integration."""
        out = {}
        j = i + 1
        for k, c in self._terms.items():
            nk = list(k) + [0] * max(0, j + 1 - len(k))
            nk[j] += 1
            out[_key(nk[1:], nk[0])] = c / nk[j]
        return MPoly(out, _trusted=True)

    # -- inspection -------------------------------------------------------------
    def coeff(self, exps: Mapping[int, int] | Iterable[int] = (), lam: int = 0) -> Fraction:
        if isinstance(exps, Mapping):
            vec = [0] * (max(exps, default=-1) + 1)
            for i, e in exps.items():
                vec[i] = e
        else:
            vec = list(exps)
        return self._terms.get(_key(vec, lam), Fraction(0))

    def constant(self) -> Fraction:
        return self._terms.get((0,), Fraction(0))

    def degree(self) -> int:
        return max((_kdeg(k) for k in self._terms), default=-1)

    def min_degree(self) -> int | None:
        return min((_kdeg(k) for k in self._terms), default=None)

    def max_var(self) -> int:
        return max((len(k) - 2 for k in self._terms), default=-1)

    def lam_powers(self) -> list[int]:
        return sorted({k[0] for k in self._terms})

    def lam_part(self, power: int) -> "MPoly":
        """Coefficient of ``lambda**power`` (a lambda-free polynomial)."""
        return MPoly({(0, *k[1:]): c for k, c in self._terms.items() if k[0] == power}, _trusted=True)

    def weighted_degrees(self) -> set[int]:
        return {sum((2 - 2 * i) * e for i, e in enumerate(k[1:])) + 3 * k[0] for k in self._terms}

    def is_weighted_homogeneous(self, deg: int) -> bool:
        return self.weighted_degrees() <= {deg}

    # -- truncation and substitution --------------------------------------------
    def filter(self, keep: Callable[[tuple], bool]) -> "MPoly":
        return MPoly({k: c for k, c in self._terms.items() if keep(k)}, _trusted=True)

    def truncate(self, degree: int | None = None, nvars: int | None = None) -> "MPoly":
        """Keep ordinary degree ``<= degree`` and variables ``u_0..u_{nvars-1}``."""

        def keep(k):
            if degree is not None and _kdeg(k) > degree:
                return False
            if nvars is not None and len(k) - 1 > nvars:
                return False
            return True

        return self.filter(keep)

    def homogeneous_part(self, d: int) -> "MPoly":
        return self.filter(lambda k: _kdeg(k) == d)

    def restrict(self, keep_vars: Iterable[int]) -> "MPoly":
        """Set every variable not in ``keep_vars`` to zero."""
        keep_vars = set(keep_vars)
        return self.filter(lambda k: all(e == 0 or i in keep_vars for i, e in enumerate(k[1:])))

    def scale_vars(self, factors: Mapping[int, Fraction]) -> "MPoly":
        """Substitute ``u_i -> factors[i] * u_i``."""
        out = {}
        for k, c in self._terms.items():
            for i, e in enumerate(k[1:]):
                if e and i in factors:
                    c = c * rat(factors[i]) ** e
            if c:
                out[k] = c
        return MPoly(out, _trusted=True)

    def substitute(self, mapping: Mapping[int, "MPoly"], degree: int | None = None) -> "MPoly":
        """Replace ``u_i`` by ``mapping[i]``; other variables are kept."""
        cache: dict[tuple[int, int], MPoly] = {}

        def power(i, e):
            if (i, e) not in cache:
                cache[(i, e)] = mapping[i].pow(e, degree)
            return cache[(i, e)]

        out = MPoly.zero()
        for k, c in self._terms.items():
            rest = list(k)
            term = MPoly.const(c)
            for i, e in enumerate(k[1:]):
                if e and i in mapping:
                    rest[i + 1] = 0
                    term = term.mul(power(i, e), degree)
            term = term.mul(MPoly({_key(rest[1:], rest[0]): Fraction(1)}, _trusted=True), degree)
            out = out + term
        return out

    def evaluate(self, values: Mapping[int, Fraction], lam=1) -> Fraction:
        total = Fraction(0)
        for k, c in self._terms.items():
            v = c * rat(lam) ** k[0] if k[0] else c
            for i, e in enumerate(k[1:]):
                if e:
                    v *= rat(values.get(i, 0)) ** e
            total += v
        return total

    # -- serialization ----------------------------------------------------------
    def to_json(self) -> dict:
        rows = []
        for k in sorted(self._terms, key=lambda k: (_kdeg(k), k)):
            rows.append({"u": list(k[1:]), "lam": k[0], "c": rat_str(self._terms[k])})
        return {"terms": rows}


def mpoly_from_json(data: Mapping) -> MPoly:
    return MPoly({(row.get("lam", 0), *row["u"]): rat(row["c"]) for row in data["terms"]})


def mpoly_arith(a: MPoly, b: MPoly | int | None = None, op: str = "add") -> MPoly:
    """``op`` is ``add``, ``mul`` or ``diff`` (then ``b`` is the variable index)."""
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "diff":
        return a.diff(int(b))
    raise ValueError(f"unknown op {op!r}")


def mpoly_inverse(p: MPoly, degree: int) -> MPoly:
    """``1/p`` as a power series in the u-variables, truncated at ``degree``."""
    c0 = p.constant()
    if c0 == 0:
        raise ZeroDivisionError("constant term must be nonzero")
    rest = (p - c0).scale(1 / c0)
    return mpoly_binomial(rest, -1, degree).scale(1 / c0)


def mpoly_binomial(w: MPoly, r, degree: int) -> MPoly:
    """``(1 + w)**r`` for ``w`` without constant term, truncated at ``degree``."""
    if w.constant():
        raise ValueError("w must have zero constant term")
    r = rat(r)
    out = MPoly.const(1)
    term = MPoly.const(1)
    for j in range(1, degree + 1):
        term = term.mul(w, degree)
        if not term:
            break
        out = out + term.scale(binom(r, j))
    return out


def t_to_u(poly: MPoly) -> MPoly:
    """Rewrite a polynomial in ``t_k`` through ``t_k = (2k+1)!! u_k``."""
    n = poly.max_var() + 1
    return poly.scale_vars({k: dfact(2 * k + 1) for k in range(n)})


def u_to_t(poly: MPoly) -> MPoly:
    """Inverse of :func:`t_to_u`."""
    n = poly.max_var() + 1
    return poly.scale_vars({k: Fraction(1, dfact(2 * k + 1)) for k in range(n)})


def shift_var(poly: MPoly, i: int, c, degree: int | None = None) -> MPoly:
    """``P(u_i + c)``; with ``c = -1/3, i = 1`` this is the dilaton shift."""
    return poly.substitute({i: MPoly.var(i) + rat(c)}, degree)


# ---------------------------------------------------------------------------
# Laurent series in f with an exactness window


def _lt(a, b):  # None means unbounded
    return a is not None and (b is None or a < b)


class HalfLaurent:
    """Laurent series ``sum_k c_k f**k`` with ``MPoly`` coefficients.

    ``lo``/``hi`` bound the window of exactly known exponents; ``None`` means
    the series is known all the way out on that side (and is zero beyond its
    stored support).  ``degree`` caps the ordinary u-degree of coefficients:
    terms above it are unknown.
    """

    __slots__ = ("coeffs", "lo", "hi", "degree")

    def __init__(self, coeffs: Mapping[int, MPoly | Fraction | int] | None = None,
                 lo: int | None = None, hi: int | None = None, degree: int | None = None):
        clean = {}
        for k, c in (coeffs or {}).items():
            c = MPoly._coerce(c)
            if degree is not None:
                c = c.truncate(degree)
            if not c:
                continue
            if (lo is not None and k < lo) or (hi is not None and k > hi):
                continue
            clean[int(k)] = c
        self.coeffs = clean
        self.lo, self.hi, self.degree = lo, hi, degree

    # -- constructors ---------------------------------------------------------
    @classmethod
    def monomial(cls, k: int, coeff=1, **kw) -> "HalfLaurent":
        return cls({k: MPoly._coerce(coeff)}, **kw)

    # -- inspection -------------------------------------------------------------
    def in_window(self, k: int) -> bool:
        return (self.lo is None or k >= self.lo) and (self.hi is None or k <= self.hi)

    def coeff(self, k: int) -> MPoly:
        if not self.in_window(k):
            raise KeyError(f"exponent {k} lies outside the exact window [{self.lo}, {self.hi}]")
        return self.coeffs.get(k, MPoly.zero())

    def support(self) -> list[int]:
        return sorted(self.coeffs)

    def top(self) -> int | None:
        if self.coeffs:
            return max(self.coeffs)
        return None if self.lo is None else self.lo - 1

    def bottom(self) -> int | None:
        if self.coeffs:
            return min(self.coeffs)
        return None if self.hi is None else self.hi + 1

    def __repr__(self) -> str:
        body = " + ".join(f"({c.pretty()})*f^{k}" for k, c in sorted(self.coeffs.items(), reverse=True)) or "0"
        return f"HalfLaurent({body}; window=[{self.lo}, {self.hi}], degree={self.degree})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, HalfLaurent):
            return NotImplemented
        return (self.coeffs, self.lo, self.hi, self.degree) == (other.coeffs, other.lo, other.hi, other.degree)

    def agrees_with(self, other: "HalfLaurent") -> bool:
        """Compare coefficients on the common window (and common degree cap)."""
        lo = _maxopt(self.lo, other.lo)
        hi = _minopt(self.hi, other.hi)
        deg = _minopt(self.degree, other.degree)
        keys = set(self.coeffs) | set(other.coeffs)
        for k in keys:
            if (lo is not None and k < lo) or (hi is not None and k > hi):
                continue
            a = self.coeffs.get(k, MPoly.zero())
            b = other.coeffs.get(k, MPoly.zero())
            if deg is not None:
                a, b = a.truncate(deg), b.truncate(deg)
            if a != b:
                return False
        return True

    # -- arithmetic -----------------------------------------------------------
    def _with(self, coeffs, lo, hi, degree) -> "HalfLaurent":
        return HalfLaurent(coeffs, lo, hi, degree)

    def __add__(self, other) -> "HalfLaurent":
        if not isinstance(other, HalfLaurent):
            other = HalfLaurent({0: MPoly._coerce(other)})
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, MPoly.zero()) + c
        return self._with(out, _maxopt(self.lo, other.lo), _minopt(self.hi, other.hi),
                          _minopt(self.degree, other.degree))

    __radd__ = __add__

    def __neg__(self) -> "HalfLaurent":
        return self._with({k: -c for k, c in self.coeffs.items()}, self.lo, self.hi, self.degree)

    def __sub__(self, other) -> "HalfLaurent":
        if not isinstance(other, HalfLaurent):
            other = HalfLaurent({0: MPoly._coerce(other)})
        return self + (-other)

    def __rsub__(self, other) -> "HalfLaurent":
        return (-self) + other

    def scale(self, c) -> "HalfLaurent":
        c = MPoly._coerce(c)
        return self._with({k: v.mul(c, self.degree) for k, v in self.coeffs.items()}, self.lo, self.hi, self.degree)

    def shift(self, k: int) -> "HalfLaurent":
        """Multiply by ``f**k``."""
        return self._with({e + k: c for e, c in self.coeffs.items()},
                          None if self.lo is None else self.lo + k,
                          None if self.hi is None else self.hi + k, self.degree)

    def __mul__(self, other) -> "HalfLaurent":
        if isinstance(other, (int, Fraction, MPoly)):
            return self.scale(other)
        if not isinstance(other, HalfLaurent):
            return NotImplemented
        return series_mul(self, other)

    __rmul__ = __mul__

    def truncate(self, lo: int | None = None, hi: int | None = None) -> "HalfLaurent":
        """Narrow the window (never widens it)."""
        return self._with(self.coeffs, _maxopt(self.lo, lo), _minopt(self.hi, hi), self.degree)

    def with_degree(self, degree: int | None) -> "HalfLaurent":
        return self._with(self.coeffs, self.lo, self.hi, _minopt(self.degree, degree))

    def map_coeffs(self, fn: Callable[[MPoly], MPoly]) -> "HalfLaurent":
        return self._with({k: fn(c) for k, c in self.coeffs.items()}, self.lo, self.hi, self.degree)

    def derivative(self) -> "HalfLaurent":
        """``d/df`` term by term."""
        return self._with({k - 1: c.scale(k) for k, c in self.coeffs.items() if k},
                          None if self.lo is None else self.lo - 1,
                          None if self.hi is None else self.hi - 1, self.degree)

    def diff_var(self, i: int) -> "HalfLaurent":
        """Partial derivative of every coefficient in ``u_i``.

        The degree cap drops by one: the cap-level terms of the result would
        need coefficients one degree beyond the cap.
        """
        deg = None if self.degree is None else self.degree - 1
        return self._with({k: c.diff(i) for k, c in self.coeffs.items()}, self.lo, self.hi, deg)

    def to_json(self) -> dict:
        return {
            "window": [self.lo, self.hi],
            "degree": self.degree,
            "coeffs": [[k, self.coeffs[k].to_json()] for k in sorted(self.coeffs)],
        }


def series_from_json(data: Mapping) -> HalfLaurent:
    lo, hi = data["window"]
    return HalfLaurent({k: mpoly_from_json(c) for k, c in data["coeffs"]}, lo, hi, data.get("degree"))


def _maxopt(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return max(a, b)


def _minopt(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


_EMPTY = (1, 0)


def _product_window(a: HalfLaurent, b: HalfLaurent) -> tuple[int | None, int | None]:
    """Tightest window on which the product is determined by known data."""
    lo = hi = None
    if not a.coeffs and a.lo is None and a.hi is None:
        return None, None
    if not b.coeffs and b.lo is None and b.hi is None:
        return None, None
    for x, y in ((a, b), (b, a)):
        if x.lo is not None:
            if y.hi is not None:
                return _EMPTY
            ytop = y.top()
            if ytop is None:
                return None, None
            lo = _maxopt(lo, x.lo + ytop)
        if x.hi is not None:
            if y.lo is not None:
                return _EMPTY
            ybot = y.bottom()
            if ybot is None:
                return None, None
            hi = _minopt(hi, x.hi + ybot)
    return lo, hi


def series_mul(a: HalfLaurent, b: HalfLaurent) -> HalfLaurent:
    """Exponentwise convolution with the window rule described on the class."""
    lo, hi = _product_window(a, b)
    deg = _minopt(a.degree, b.degree)
    out: dict[int, MPoly] = {}
    for ka, ca in a.coeffs.items():
        for kb, cb in b.coeffs.items():
            k = ka + kb
            if (lo is not None and k < lo) or (hi is not None and k > hi):
                continue
            term = ca.mul(cb, deg)
            if term:
                out[k] = out[k] + term if k in out else term
    return HalfLaurent(out, lo, hi, deg)


def project(s: HalfLaurent, part: str) -> HalfLaurent:
    """``plus`` keeps exponents ``>= 0``; ``minus`` keeps exponents ``< 0``.

    The discarded side becomes exactly zero, so the result's window is
    unbounded there.
    """
    if part == "plus":
        if not s.in_window(0):
            raise ValueError("window does not contain the cut point f^0")
        return HalfLaurent({k: c for k, c in s.coeffs.items() if k >= 0}, None, s.hi, s.degree)
    if part == "minus":
        if not s.in_window(-1):
            raise ValueError("window does not contain the cut point f^-1")
        return HalfLaurent({k: c for k, c in s.coeffs.items() if k < 0}, s.lo, None, s.degree)
    raise ValueError("part must be 'plus' or 'minus'")


def residue(s: HalfLaurent) -> MPoly:
    """Coefficient of the exponent ``-1`` (positive orientation)."""
    if not s.in_window(-1):
        raise ValueError(f"exponent -1 lies outside the exact window [{s.lo}, {s.hi}]")
    return s.coeffs.get(-1, MPoly.zero())


def binomial_pow(s: HalfLaurent, r, order: int | None = None, at: str = "inf") -> HalfLaurent:
    """``s**r`` by the generalized binomial series.

    With ``at="inf"`` the series is read in descending powers and must look
    like ``f**k (1 + lower terms)``; ``order`` is the lowest exponent wanted
    when ``s`` is exactly known below.  With ``at="zero"`` it is read in
    ascending powers (a power series) and ``order`` is the highest exponent.
    In both cases ``r*k`` must be an integer.
    """
    r = rat(r)
    if at == "zero":
        mirrored = _mirror(s)
        out = binomial_pow(mirrored, r, None if order is None else -order, at="inf")
        return _mirror(out)
    if at != "inf":
        raise ValueError("at must be 'inf' or 'zero'")
    if not s.coeffs:
        raise ValueError("cannot raise a zero series to a power")
    k = max(s.coeffs)
    if s.hi is not None and s.hi < k + 1:
        raise ValueError("leading exponent not certified: window must extend above it")
    if s.coeffs[k] != MPoly.const(1):
        raise ValueError("leading coefficient must be exactly 1")
    rk = r * k
    if rk.denominator != 1:
        raise ValueError("fractional overall power of f")
    w = s.shift(-k) - HalfLaurent({0: MPoly.const(1)})
    target = order - int(rk) if order is not None else None
    lo = _maxopt(w.lo, target)
    if lo is None and w.degree is None:
        raise ValueError("need an order or a degree cap to truncate the expansion")
    w = w.truncate(lo=lo)
    result = HalfLaurent({0: MPoly.const(1)}, lo, None, w.degree)
    term = HalfLaurent({0: MPoly.const(1)}, lo, None, w.degree)
    j = 0
    while True:
        j += 1
        term = series_mul(term, w).truncate(lo=lo)
        if not term.coeffs:
            break
        result = result + term.scale(binom(r, j))
        if j > 10_000:  # pragma: no cover - guards against non-nilpotent input
            raise RuntimeError("binomial expansion failed to terminate")
    return result.shift(int(rk))


def nilpotent_pow(w: HalfLaurent, r) -> HalfLaurent:
    """``(1 + w)**r`` when every coefficient of ``w`` has zero constant term.

    ``w`` may run in both directions; the degree cap makes the binomial
    series finite.  Windows shrink as the product rule dictates.
    """
    if w.degree is None:
        raise ValueError("nilpotent_pow needs a degree cap")
    if any(c.constant() for c in w.coeffs.values()):
        raise ValueError("coefficients of w must have zero constant term")
    r = rat(r)
    result = HalfLaurent({0: MPoly.const(1)}, None, None, w.degree)
    term = result
    j = 0
    while True:
        j += 1
        term = series_mul(term, w)
        if not term.coeffs:
            break
        result = result + term.scale(binom(r, j))
    # the loop stops once all products exceed the cap; keep the narrowest window
    return HalfLaurent(result.coeffs, _maxopt(result.lo, term.lo), _minopt(result.hi, term.hi), w.degree)


def _mirror(s: HalfLaurent) -> HalfLaurent:
    return HalfLaurent({-k: c for k, c in s.coeffs.items()},
                       None if s.hi is None else -s.hi,
                       None if s.lo is None else -s.lo, s.degree)


def compose(outer: HalfLaurent, inner: HalfLaurent, order: int) -> HalfLaurent:
    """``outer(inner(y))`` for power series with ``inner = O(y)``, through ``y**order``."""
    if any(k < 0 for k in outer.coeffs) or any(k < 1 for k in inner.coeffs):
        raise ValueError("compose expects power series with inner(0) = 0")
    deg = _minopt(outer.degree, inner.degree)
    inner = HalfLaurent(inner.coeffs, None, order, deg)
    result = HalfLaurent({}, None, order, deg)
    power = HalfLaurent({0: MPoly.const(1)}, None, order, deg)
    for k in range(0, order + 1):
        if k:
            power = series_mul(power, inner).truncate(hi=order)
        c = outer.coeffs.get(k)
        if c is not None:
            result = result + power.scale(c)
    return result.truncate(hi=_minopt(order, outer.hi))


def reversion(s: HalfLaurent, order: int) -> HalfLaurent:
    """Compositional inverse of ``s = x + s_2 x**2 + ...`` through ``order``."""
    if s.coeffs.get(0) or any(k < 0 for k in s.coeffs):
        raise ValueError("series must have zero constant term and no negative powers")
    if s.coeffs.get(1, MPoly.zero()) != MPoly.const(1):
        raise ValueError("linear coefficient must be 1")
    if s.hi is not None and s.hi < order:
        raise ValueError("series not known to the requested order")
    deg = s.degree
    higher = HalfLaurent({k: c for k, c in s.coeffs.items() if k >= 2}, None, order, deg)
    y = HalfLaurent({1: MPoly.const(1)}, None, order, deg)
    t = y
    # fixed point t = y - higher(t); each pass fixes one more order
    for _ in range(order):
        t = y - compose(higher, t, order)
    return t.truncate(hi=order)
