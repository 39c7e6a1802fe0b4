"""Job configuration: TOML tables, expression parsing and Hamiltonian resolution.

A config file holds either one flat job or one table per job; top-level
scalar keys act as defaults for every job table::

    hbar = [0.5, 0.25]

    [quartic]
    builtin = "perturbed_quartic"
    params = { eps = "1/10" }
    levels = "0..10"

Exactly one of ``builtin``, ``symbol`` (a polynomial in ``x``, ``p``,
``hbar`` and ``I``) or ``potential`` (an expression in ``x``, used with
``mass``) names the Hamiltonian.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

import sympy
import tomli
from sympy.parsing.sympy_parser import (convert_xor, parse_expr, rationalize,
                                        standard_transformations)

from .catalog import Builtin, get_builtin
from .dynamics import SmoothHamiltonian
from .polysym import PolySymbol

__all__ = ["ConfigError", "JobConfig", "load_config", "parse_config", "parse_levels",
           "parse_hbar", "parse_symbol", "resolve_hamiltonian"]

_X, _P, _HBAR = sympy.symbols("x p hbar")
_LOCALS = {"x": _X, "p": _P, "hbar": _HBAR, "I": (_X ** 2 + _P ** 2) / 2,
           "exp": sympy.exp, "cosh": sympy.cosh, "sinh": sympy.sinh, "cos": sympy.cos,
           "sin": sympy.sin, "log": sympy.log, "sqrt": sympy.sqrt, "pi": sympy.pi}
_TRANSFORMS = standard_transformations + (convert_xor, rationalize)

KNOWN_KEYS = {"builtin", "params", "symbol", "potential", "mass", "hbar", "levels", "ceiling",
              "order", "oracle", "out", "format", "tol", "seed", "count", "action",
              "nf_order", "guess"}


class ConfigError(ValueError):
    """Invalid configuration; the message names the job and field."""


@dataclass(frozen=True)
class JobConfig:
    name: str = "job"
    builtin: Optional[str] = None
    params: Dict[str, Any] = field(default_factory=dict)
    symbol: Optional[str] = None
    potential: Optional[str] = None
    mass: str = "1"
    hbar: Tuple[float, ...] = (1.0,)
    levels: Optional[Tuple[int, ...]] = None
    ceiling: Optional[float] = None
    order: int = 2
    oracle: str = "auto"
    out: Optional[str] = None
    formats: Tuple[str, ...] = ("csv", "json")
    tol: float = 1e-10
    seed: int = 0
    count: int = 100
    action: Optional[float] = None
    nf_order: Optional[int] = None
    guess: Optional[Tuple[float, float]] = None

    @property
    def level_list(self) -> Tuple[int, ...]:
        return self.levels if self.levels is not None else tuple(range(10))


def _fail(job: str, key: str, msg: str):
    raise ConfigError(f"job {job!r}, field {key!r}: {msg}")


def parse_levels(value, job: str = "job") -> Tuple[int, ...]:
    """``"0..9"`` (inclusive), ``"0,2,5"``, an int or a list of ints."""
    if isinstance(value, bool):
        _fail(job, "levels", "expected a range")
    if isinstance(value, int):
        out = (value,)
    elif isinstance(value, list):
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
            _fail(job, "levels", "list entries must be integers")
        out = tuple(value)
    elif isinstance(value, str):
        m = re.fullmatch(r"\s*(\d+)\s*(?:\.\.|-)\s*(\d+)\s*", value)
        if m:
            lo, hi = int(m.group(1)), int(m.group(2))
            if hi < lo:
                _fail(job, "levels", f"empty range {value!r}")
            out = tuple(range(lo, hi + 1))
        else:
            try:
                out = tuple(int(v) for v in value.split(",") if v.strip())
            except ValueError:
                _fail(job, "levels", f"cannot read {value!r}; use '0..9' or '0,1,4'")
    else:
        _fail(job, "levels", f"unsupported type {type(value).__name__}")
    if any(v < 0 for v in out):
        _fail(job, "levels", "quantum numbers are non-negative")
    return tuple(sorted(set(out)))


def parse_hbar(value, job: str = "job") -> Tuple[float, ...]:
    """A positive number, a list of them, or a comma-separated string."""
    if isinstance(value, str):
        try:
            items = [float(Fraction(v.strip())) for v in value.split(",") if v.strip()]
        except ValueError:
            _fail(job, "hbar", f"cannot read {value!r}")
    elif isinstance(value, (int, float)) and not isinstance(value, bool):
        items = [float(value)]
    elif isinstance(value, list):
        items = []
        for v in value:
            if isinstance(v, bool) or not isinstance(v, (int, float, str)):
                _fail(job, "hbar", f"bad entry {v!r}")
            items.append(float(Fraction(v)) if isinstance(v, str) else float(v))
    else:
        _fail(job, "hbar", f"unsupported type {type(value).__name__}")
    if not items:
        _fail(job, "hbar", "list must not be empty")
    if any(not (math.isfinite(v) and v > 0) for v in items):
        _fail(job, "hbar", "values must be positive")
    return tuple(items)


def _as_float(job, key, value) -> float:
    if isinstance(value, bool):
        _fail(job, key, "expected a number")
    try:
        return float(Fraction(value)) if isinstance(value, str) else float(value)
    except (TypeError, ValueError):
        _fail(job, key, f"expected a number, got {value!r}")


def _as_int(job, key, value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(job, key, f"expected an integer, got {value!r}")
    return value


def build_job(name: str, table: Dict[str, Any]) -> JobConfig:
    unknown = sorted(set(table) - KNOWN_KEYS)
    if unknown:
        _fail(name, unknown[0], f"unknown key (allowed: {', '.join(sorted(KNOWN_KEYS))})")
    forms = [k for k in ("builtin", "symbol", "potential") if k in table]
    if len(forms) > 1:
        _fail(name, forms[1], f"give exactly one of builtin/symbol/potential, found {forms}")
    kw: Dict[str, Any] = {"name": name}
    for key in ("builtin", "symbol", "potential", "out"):
        if key in table:
            if not isinstance(table[key], str):
                _fail(name, key, "expected a string")
            kw[key] = table[key]
    if "params" in table:
        if not isinstance(table["params"], dict):
            _fail(name, "params", "expected a table")
        kw["params"] = dict(table["params"])
    if "mass" in table:
        m = table["mass"]
        try:
            mv = Fraction(m) if isinstance(m, (str, int)) else Fraction(float(m))
        except (TypeError, ValueError):
            _fail(name, "mass", f"cannot read {m!r}")
        if mv <= 0:
            _fail(name, "mass", "must be positive")
        kw["mass"] = str(m)
    if "hbar" in table:
        kw["hbar"] = parse_hbar(table["hbar"], name)
    if "levels" in table:
        kw["levels"] = parse_levels(table["levels"], name)
    if "ceiling" in table:
        kw["ceiling"] = _as_float(name, "ceiling", table["ceiling"])
    if "order" in table:
        order = _as_int(name, "order", table["order"])
        if order not in (0, 2):
            _fail(name, "order", "must be 0 or 2")
        kw["order"] = order
    if "oracle" in table:
        if table["oracle"] not in ("auto", "grid", "fock"):
            _fail(name, "oracle", "must be 'auto', 'grid' or 'fock'")
        kw["oracle"] = table["oracle"]
    if "format" in table:
        f = table["format"]
        f = [f] if isinstance(f, str) else f
        if not isinstance(f, list) or not f or any(v not in ("csv", "json") for v in f):
            _fail(name, "format", "must be 'csv', 'json' or a list of them")
        kw["formats"] = tuple(dict.fromkeys(f))
    if "tol" in table:
        kw["tol"] = _as_float(name, "tol", table["tol"])
        if not kw["tol"] > 0:
            _fail(name, "tol", "must be positive")
    if "seed" in table:
        kw["seed"] = _as_int(name, "seed", table["seed"])
    if "count" in table:
        kw["count"] = _as_int(name, "count", table["count"])
        if kw["count"] < 0:
            _fail(name, "count", "must be non-negative")
    if "action" in table:
        kw["action"] = _as_float(name, "action", table["action"])
        if not kw["action"] > 0:
            _fail(name, "action", "must be positive")
    if "nf_order" in table:
        kw["nf_order"] = _as_int(name, "nf_order", table["nf_order"])
        if kw["nf_order"] < 1:
            _fail(name, "nf_order", "must be at least 1")
    if "guess" in table:
        g = table["guess"]
        if not isinstance(g, list) or len(g) != 2:
            _fail(name, "guess", "expected [x, p]")
        kw["guess"] = (_as_float(name, "guess", g[0]), _as_float(name, "guess", g[1]))
    return JobConfig(**kw)


def parse_config(text: str) -> List[JobConfig]:
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from None
    defaults = {k: v for k, v in doc.items() if not isinstance(v, dict) or k == "params"}
    tables = {k: v for k, v in doc.items() if isinstance(v, dict) and k != "params"}
    if not tables:
        return [build_job("job", defaults)]
    return [build_job(name, {**defaults, **table}) for name, table in tables.items()]


def load_config(path: str) -> List[JobConfig]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from None
    return parse_config(text)


def _sympy_expr(text: str, what: str):
    try:
        return parse_expr(text, local_dict=dict(_LOCALS), transformations=_TRANSFORMS)
    except Exception as exc:  # sympy raises a zoo of types
        raise ConfigError(f"cannot parse {what} {text!r}: {exc}") from None


def _to_fraction(c) -> Fraction:
    c = sympy.nsimplify(c)
    if not c.is_Rational:
        raise ConfigError(f"coefficient {c} is not rational")
    return Fraction(int(c.p), int(c.q))


def parse_symbol(text: str) -> PolySymbol:
    """Polynomial symbol in ``x``, ``p``, ``hbar`` (``I`` stands for ``(x**2 + p**2)/2``)."""
    expr = sympy.expand(_sympy_expr(text, "symbol"))
    extra = expr.free_symbols - {_X, _P, _HBAR}
    if extra:
        raise ConfigError(f"symbol {text!r} uses unknown names {sorted(map(str, extra))}")
    try:
        poly = sympy.Poly(expr, _X, _P, _HBAR)
    except sympy.PolynomialError:
        raise ConfigError(f"symbol {text!r} is not a polynomial") from None
    terms = {}
    for (i, j, k), c in poly.terms():
        if not c.is_real:
            raise ConfigError(f"symbol {text!r} has a non-real coefficient {c}")
        terms[(int(i), int(j), int(k))] = _to_fraction(c)
    return PolySymbol(terms)


def _potential(text: str, mass: Fraction, name: str) -> Builtin:
    expr = _sympy_expr(text, "potential")
    extra = expr.free_symbols - {_X}
    if extra:
        raise ConfigError(f"potential {text!r} may only use x, found {sorted(map(str, extra))}")
    V = sympy.lambdify(_X, expr, "numpy")
    cache: Dict[int, Any] = {}

    def dnV(n, x):
        if n not in cache:
            cache[n] = sympy.lambdify(_X, sympy.diff(expr, _X, n), "numpy")
        return cache[n](x) + 0.0 * x

    def Vf(x):
        return V(x) + 0.0 * x

    symbol = None
    try:
        poly = sympy.Poly(sympy.expand(expr), _X)
        terms = {(int(i), 0, 0): _to_fraction(c) for (i,), c in poly.terms()}
        symbol = PolySymbol({(0, 2, 0): Fraction(1, 2) / mass}) + PolySymbol(terms)
    except (sympy.PolynomialError, ConfigError):
        symbol = None
    if symbol is not None:
        H = SmoothHamiltonian.from_polysymbol(symbol, name=name)
    else:
        H = SmoothHamiltonian.kinetic_potential(Vf, dnV=dnV, mass=float(mass), name=name)
    return Builtin(name, H, symbol, Vf, float(mass), description=f"p**2/(2*{mass}) + {text}")


def resolve_hamiltonian(job: JobConfig) -> Builtin:
    """Turn the job's Hamiltonian entry into a :class:`~bohrsommerfeld.catalog.Builtin`."""
    if job.builtin is not None:
        try:
            b = get_builtin(job.builtin, **job.params)
        except KeyError as exc:
            raise ConfigError(f"job {job.name!r}, field 'builtin': {exc.args[0]}") from None
        except TypeError as exc:
            raise ConfigError(f"job {job.name!r}, field 'params': {exc}") from None
    elif job.symbol is not None:
        sym = parse_symbol(job.symbol)
        if not sym.is_real:
            raise ConfigError(f"job {job.name!r}: symbol must be real")
        b = Builtin(job.name, SmoothHamiltonian.from_polysymbol(sym, name=job.name), sym,
                    description=job.symbol)
    elif job.potential is not None:
        b = _potential(job.potential, Fraction(job.mass), job.name)
    else:
        raise ConfigError(f"job {job.name!r}: no Hamiltonian given (builtin, symbol or potential)")
    if job.ceiling is not None:
        b = replace(b, energy_ceiling=job.ceiling)
    if job.guess is not None:
        b = replace(b, guess=job.guess)
    return b
