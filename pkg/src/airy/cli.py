"""Command-line front end.

    airy gravity correlators --genus 1 --degree 4
    airy deform check-x2 --vars 0 --degree 4
    airy verify --level quick

Rationals are always written as ``"p/q"``.  Exit status: 0 success,
1 a check failed, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Sequence

from . import deformation, fock, gravity, lagrange, lg
from .series import MPoly, Window, rat_str

__all__ = ["RunConfig", "ConfigError", "load_config", "build_parser", "dispatch", "main", "verify_suite"]

DEFAULTS = {"vars": 6, "degree": 6, "genus": 2, "format": "json", "out": None}
LEVELS = {"quick": Window(4, 4, 1), "full": Window(6, 6, 2)}


class ConfigError(ValueError):
    pass


class CheckFailed(Exception):
    """Raised by a handler whose report says a check failed; carries the report."""

    def __init__(self, report):
        super().__init__("check failed")
        self.report = report


@dataclass(frozen=True)
class RunConfig:
    vars: int
    degree: int
    genus: int
    format: str
    out: str | None
    params: dict[str, Any]

    @property
    def window(self) -> Window:
        return Window(self.degree, self.vars, self.genus)


def load_config(path: str) -> dict[str, str]:
    """Read ``key=value`` lines; ``#`` starts a comment.  Raises :class:`ConfigError`."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        out[key.replace("-", "_")] = value
    return out


# ---------------------------------------------------------------------------
# serialization


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return rat_str(obj)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, MPoly):
        return obj.to_json()
    if isinstance(obj, Window):
        return {"vars": obj.N, "degree": obj.D, "genus": obj.G}
    if hasattr(obj, "to_json"):
        return _jsonable(obj.to_json())
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _emit(result, fmt: str) -> str:
    """``result`` is a dict, or a list of flat records (one JSON line each)."""
    data = _jsonable(result)
    if fmt == "json":
        if isinstance(data, list):
            return "".join(json.dumps(row, sort_keys=True) + "\n" for row in data)
        return json.dumps(data, indent=2, sort_keys=True) + "\n"
    rows = data if isinstance(data, list) else [{"key": k, "value": v} for k, v in sorted(data.items())]
    fields = sorted({k for row in rows for k in row})
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: v if isinstance(v, str) else json.dumps(v, sort_keys=True) for k, v in row.items()})
    return buf.getvalue()


def _poly_rows(p: MPoly) -> list[dict]:
    return p.to_json()["terms"]


# ---------------------------------------------------------------------------
# handlers


def _gravity_correlators(cfg: RunConfig):
    table = gravity.compute_correlators(cfg.window)
    return [{"g": g, "alphas": list(a), "value": v} for (g, a), v in table]


def _gravity_free_energy(cfg: RunConfig):
    coords = cfg.params.get("coords") or "t"
    if coords not in ("t", "u"):
        raise ConfigError("coords must be t or u")
    genus = cfg.params.get("g")
    g = cfg.genus if genus is None else int(genus)
    window = Window(cfg.degree, cfg.vars, max(cfg.genus, g))
    energy = gravity.free_energy(gravity.compute_correlators(window), coords)
    return {"genus": g, "coords": coords, "terms": _poly_rows(energy[g])}


def _gravity_kdv(cfg: RunConfig):
    n = int(cfg.params.get("n") or 1)
    report = gravity.kdv_flow_check(n, cfg.window)
    out = {"n": n, "R": gravity.kdv_R(n).pretty(), "ok": report["ok"],
           "residual": _poly_rows(report["residual"])}
    if not report["ok"]:
        raise CheckFailed(out)
    return out


def _burgers_f0(cfg: RunConfig):
    chain = lagrange.dispersionless_chain(cfg.vars, cfg.degree)
    return {"vars": cfg.vars, "degree": cfg.degree, "coords": "t", "terms": _poly_rows(chain.f0)}


def _burgers_solve(cfg: RunConfig):
    raw = cfg.params.get("initial") or "0,1"
    try:
        coeffs = [Fraction(s.strip()) for s in raw.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad --initial {raw!r}") from exc
    order = int(cfg.params.get("order") or 4)
    u0 = MPoly({(0, k): c for k, c in enumerate(coeffs)})
    sol = lagrange.burgers_solve(u0, order, cfg.params.get("method") or "auto")
    residual = lagrange.burgers_residual(sol)
    out = {"order": order, "u": [{"x": r["u"][0] if r["u"] else 0, "t": r["u"][1] if len(r["u"]) > 1 else 0,
                                  "c": r["c"]} for r in _poly_rows(sol.u_series)],
           "residual_zero": not residual}
    if residual:
        raise CheckFailed(out)
    return out


def _burgers_catalan(cfg: RunConfig):
    m = int(cfg.params.get("m") or 2)
    order = int(cfg.params.get("order") or 6)
    return {"m": m, "values": [lagrange.fuss_catalan(m, k) for k in range(order + 1)],
            "root_identity": lagrange.nth_root_identity_check(m, order) if m >= 2 else None}


def _deform_check_x2(cfg: RunConfig):
    window = Window(cfg.degree, cfg.vars, 0)
    f0 = deformation.genus0_energy(window)
    report = deformation.check_x2_minus(deformation.build_special_x(f0, window))
    out = {"window": window, "status": "pass" if report["ok"] else "fail",
           "minus_zero": report["minus_zero"],
           "plus_matches_closed_form": report["plus_matches_closed_form"],
           "plus_matches_a": report["plus_matches_a"],
           "residual": [{"f": k, "terms": _poly_rows(c)} for k, c in report["residual"].items()]}
    if not report["ok"]:
        raise CheckFailed(out)
    return out


def _deform_coeffs(cfg: RunConfig):
    which = cfg.params.get("which") or "a"
    if which not in ("a", "b", "c"):
        raise ConfigError("which must be a, b or c")
    window = Window(cfg.degree, cfg.vars, 0)
    sp = deformation.superpotential_coeffs(deformation.genus0_energy(window), window)
    seq = getattr(sp, which)
    start = 2 if which == "b" else 0
    return {"which": which, "window": window,
            "coeffs": [{"index": i + start, "terms": _poly_rows(c)} for i, c in enumerate(seq)]}


def _deform_example(cfg: RunConfig):
    order = int(cfg.params.get("order") or 4)
    ex = deformation.example_u0_u2(order)
    return {"order": order, "catalan": ex["catalan"], "agree": ex["agree"],
            "coeffs": [{"power": 2 * i, "terms": _poly_rows(c)} for i, c in enumerate(ex["closed_form"])]}


def _lg_sigma(cfg: RunConfig):
    n = int(cfg.params.get("n") or 0)
    s = lg.sigma(n)
    return {"n": n, "slots": ["u0", "x^2"], "terms": _poly_rows(s.poly)}


def _lg_correlator(cfg: RunConfig):
    raw = cfg.params.get("indices") or ""
    try:
        ns = [int(s) for s in raw.split(",") if s.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --indices {raw!r}") from exc
    m = int(cfg.params.get("m") or 0)
    value = lg.lg_correlator(ns, m)
    return {"indices": ns, "phi0": m, "terms": _poly_rows(value)}


def _lg_structure(cfg: RunConfig):
    j, k = int(cfg.params.get("j") or 0), int(cfg.params.get("k") or 0)
    direct = lg.structure_expand(j, k)
    out = {"j": j, "k": k, "coeffs": [{"f": l, "c": c} for l, c in direct.items()]}
    if min(j, k) >= 1:
        out["formula_agrees"] = direct == lg.structure_formula(j, k)
    return out


def _fock_commutator(cfg: RunConfig):
    m, n = int(cfg.params.get("m") or 0), int(cfg.params.get("n") or 0)
    report = fock.commutator_check(m, n)
    if not report["matches_reference"]:
        raise CheckFailed(report)
    return report


def _fock_residual(cfg: RunConfig):
    power = int(cfg.params.get("power") or 2)
    Z = fock.tau_function(cfg.window)
    if power == 2:
        report = fock.constraint_residual(Z)
    else:
        report = fock.w_constraint_residual(Z, power)
    out = report.to_json()
    if power == 2 and not report.ok:
        raise CheckFailed(out)
    return out


def _fock_bessel(cfg: RunConfig):
    n = int(cfg.params.get("n") or 4)
    return {"n": n, "T": [fock.bessel_T(n, j) for j in range(n // 2 + 1)],
            "expansion": [{"j": j, "c": c} for j, c in fock.regularized_power(n).items()],
            "inverse": [{"j": j, "c": c} for j, c in fock.regularized_power_inverse(n).items()]}


def _verify(cfg: RunConfig):
    level = cfg.params.get("level") or "quick"
    if level not in LEVELS:
        raise ConfigError("level must be quick or full")
    checks = verify_suite(LEVELS[level])
    out = {"level": level, "checks": checks, "ok": all(c["ok"] for c in checks)}
    if not out["ok"]:
        raise CheckFailed(out)
    return out


def verify_suite(window: Window) -> list[dict]:
    """Cross-oracle checks that must all hold; each entry is ``{"name", "ok"}``."""
    N, D, G = window.N, window.D, window.G
    solver = gravity.CorrelatorSolver()
    table = gravity.compute_correlators(window, solver=solver)
    energy = gravity.free_energy(table, "t")
    checks: list[tuple[str, Callable[[], bool]]] = [
        ("seeds", lambda: table.lookup(0, (0, 0, 0)) == 1 and (G < 1 or table.lookup(1, (1,)) == Fraction(1, 24))),
        ("string equation", lambda: not gravity.string_equation_check(table)),
        ("kdv flow n=1", lambda: gravity.kdv_flow_check(1, Window(min(D, 5), min(N, 3), min(G, 1)), solver=solver)["ok"]),
        ("F0 virasoro = burgers", lambda: energy[0] == lagrange.dispersionless_chain(N, D).f0),
        ("F0 virasoro = uniqueness recursion", lambda: _unique_matches(window, solver)),
        ("(x^2)_- = 0", lambda: deformation.check_x2_minus(
            deformation.build_special_x(deformation.genus0_energy(Window(D, N, 0), solver), Window(D, N, 0)))["ok"]),
        ("(u0,u2) example", lambda: deformation.example_u0_u2(4)["agree"]),
        ("sigma routes", lambda: all(lg.sigma_projection(n) == lg.sigma_closed(n) for n in range(8))),
        ("descendant structure constants", lambda: all(lg.structure_expand(j, k) == lg.structure_formula(j, k)
                                                       for j in range(1, 5) for k in range(j, 5))),
        ("small phase identification", lambda: all(
            a == b for ns in [(1, 1, 1), (0, 1, 2), (2, 2, 0)] for m in range(3)
            for a, b in [lg.small_phase_identification(ns, m, solver)])),
        ("big phase one-point", lambda: _big_phase_ok(Window(min(D, 5), min(N, 4), 0), solver)),
        ("bessel expansion", lambda: all(fock.regularized_power_recursive(n) ==
                                         {n - 2 * j: c for j, c in fock.regularized_power(n).items()}
                                         for n in range(7))),
        ("virasoro from x^2", lambda: all(fock.virasoro_matches_field(n, N) for n in range(-1, 4))),
        ("constraint residual", lambda: fock.constraint_residual(fock.TauFunction(
            dict(gravity.free_energy(table, "u").per_genus), window)).ok),
        ("fault detected", lambda: not fock.constraint_residual(fock.tau_function(
            window, seeds={(0, (0, 0, 0)): Fraction(1), (1, (1,)): Fraction(1, 23)})).ok),
    ]
    return [{"name": name, "ok": bool(fn())} for name, fn in checks]


def _unique_matches(window: Window, solver) -> bool:
    if window.D < 3:
        return True
    f0 = deformation.genus0_energy(window, solver)
    sol = deformation.unique_w(window.D, window.N).in_u()
    keep = range(window.N + 1)
    return all(sol[n].truncate(window.D).restrict(keep) == f0.diff(n).truncate(window.D).restrict(keep)
               for n in range(window.N + 1))


def _big_phase_ok(window: Window, solver) -> bool:
    from .series import dfact

    f0 = deformation.genus0_energy(window, solver)
    bp = lg.big_phase(window, f0)
    return all(lg.big_phase_correlator([j], bp) ==
               f0.diff(j).scale(Fraction(1, dfact(2 * j + 1))).truncate(window.D, window.N + 1)
               for j in range(window.N + 1))


# ---------------------------------------------------------------------------
# parser


COMMANDS: dict[tuple[str, str | None], tuple[Callable[[RunConfig], Any], list[tuple[str, dict]]]] = {
    ("gravity", "correlators"): (_gravity_correlators, []),
    ("gravity", "free-energy"): (_gravity_free_energy, [("--g", {"type": int, "help": "genus to print"}),
                                                       ("--coords", {"choices": ["t", "u"]})]),
    ("gravity", "kdv"): (_gravity_kdv, [("--n", {"type": int})]),
    ("burgers", "f0"): (_burgers_f0, []),
    ("burgers", "solve"): (_burgers_solve, [("--initial", {"help": "coefficients of u(x,0), lowest first"}),
                                            ("--order", {"type": int}),
                                            ("--method", {"choices": ["auto", "lagrange", "picard"]})]),
    ("burgers", "catalan"): (_burgers_catalan, [("--m", {"type": int}), ("--order", {"type": int})]),
    ("deform", "check-x2"): (_deform_check_x2, []),
    ("deform", "coeffs"): (_deform_coeffs, [("--which", {"choices": ["a", "b", "c"]})]),
    ("deform", "example"): (_deform_example, [("--order", {"type": int})]),
    ("lg", "sigma"): (_lg_sigma, [("--n", {"type": int})]),
    ("lg", "correlator"): (_lg_correlator, [("--indices", {}), ("--m", {"type": int})]),
    ("lg", "structure"): (_lg_structure, [("--j", {"type": int}), ("--k", {"type": int})]),
    ("fock", "commutator"): (_fock_commutator, [("--m", {"type": int}), ("--n", {"type": int})]),
    ("fock", "residual"): (_fock_residual, [("--power", {"type": int, "choices": [2, 4, 6]})]),
    ("fock", "bessel"): (_fock_bessel, [("--n", {"type": int})]),
    ("verify", None): (_verify, [("--level", {"choices": ["quick", "full"]})]),
}


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--vars", type=int, help="largest variable index N (default 6)")
    p.add_argument("--degree", type=int, help="largest total degree D (default 6)")
    p.add_argument("--genus", type=int, help="largest genus G (default 2)")
    p.add_argument("--format", choices=["json", "csv"], help="output format (default json)")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--config", help="key=value file; flags override it")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="airy", description="Exact computations on the Airy curve.")
    groups = parser.add_subparsers(dest="group", required=True)
    common = _common()
    sub: dict[str, argparse._SubParsersAction] = {}
    for (group, action), (_, options) in COMMANDS.items():
        if action is None:
            target = groups.add_parser(group, parents=[common])
        else:
            if group not in sub:
                sub[group] = groups.add_parser(group).add_subparsers(dest="action", required=True)
            target = sub[group].add_parser(action, parents=[common])
        for flag, kw in options:
            target.add_argument(flag, **kw)
    return parser


def _resolve(ns: argparse.Namespace, warn) -> RunConfig:
    file_values = load_config(ns.config) if ns.config else {}
    flags = {k: v for k, v in vars(ns).items() if k not in ("group", "action", "config")}
    for key in sorted(file_values):
        if key not in flags:
            warn(f"warning: unknown config key {key!r} ignored")
    merged: dict[str, Any] = {}
    for key in flags:
        if flags[key] is not None:
            merged[key] = flags[key]
        elif key in file_values:
            merged[key] = file_values[key]
        else:
            merged[key] = DEFAULTS.get(key)
    try:
        bounds = {k: int(merged.pop(k)) for k in ("vars", "degree", "genus")}
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bounds must be integers: {exc}") from exc
    if min(bounds.values()) < 0:
        raise ConfigError("bounds must be non-negative")
    fmt = merged.pop("format")
    if fmt not in ("json", "csv"):
        raise ConfigError("format must be json or csv")
    out = merged.pop("out")
    return RunConfig(bounds["vars"], bounds["degree"], bounds["genus"], fmt, out, merged)


def dispatch(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed usage
        return int(exc.code or 0)
    handler = COMMANDS[(ns.group, getattr(ns, "action", None))][0]
    status = 0
    try:
        cfg = _resolve(ns, lambda msg: print(msg, file=stderr))
        result = handler(cfg)
    except ConfigError as exc:
        print(f"airy: error: {exc}", file=stderr)
        return 2
    except CheckFailed as exc:
        result, status = exc.report, 1
    except (ValueError, KeyError) as exc:
        print(f"airy: error: {exc}", file=stderr)
        return 2
    text = _emit(result, cfg.format)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return status


def main() -> None:
    sys.exit(dispatch())
