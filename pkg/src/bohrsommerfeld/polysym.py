"""Exact sparse polynomial phase-space symbols.

A :class:`PolySymbol` is a polynomial in ``(x, p)`` whose coefficients may in
turn carry powers of ``hbar``.  Terms are stored as a map from exponent
triples ``(i, j, k)`` (powers of ``x``, ``p`` and ``hbar``) to exact rational
coefficients.  Coefficients with a nonzero imaginary part are stored as
:class:`GaussianRational`; real coefficients stay plain
:class:`fractions.Fraction`.
"""

from __future__ import annotations

import math
import numbers
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping, Optional, Tuple, Union

import numpy as np

Exponent = Tuple[int, int, int]


class GaussianRational:
    """Complex number with exact rational real and imaginary parts.

    Never constructed with a zero imaginary part through :func:`make_coeff`;
    arithmetic collapses back to :class:`Fraction` whenever the imaginary
    part cancels.
    """

    __slots__ = ("real", "imag")

    def __init__(self, real, imag):
        self.real = Fraction(real)
        self.imag = Fraction(imag)

    @staticmethod
    def _parts(other):
        if isinstance(other, GaussianRational):
            return other.real, other.imag
        if isinstance(other, (int, Fraction)):
            return Fraction(other), Fraction(0)
        return None

    def __add__(self, other):
        o = self._parts(other)
        if o is None:
            return NotImplemented
        return make_coeff(self.real + o[0], self.imag + o[1])

    __radd__ = __add__

    def __sub__(self, other):
        o = self._parts(other)
        if o is None:
            return NotImplemented
        return make_coeff(self.real - o[0], self.imag - o[1])

    def __rsub__(self, other):
        o = self._parts(other)
        if o is None:
            return NotImplemented
        return make_coeff(o[0] - self.real, o[1] - self.imag)

    def __mul__(self, other):
        o = self._parts(other)
        if o is None:
            return NotImplemented
        a, b = self.real, self.imag
        c, d = o
        return make_coeff(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._parts(other)
        if o is None:
            return NotImplemented
        c, d = o
        den = c * c + d * d
        if den == 0:
            raise ZeroDivisionError("division by zero coefficient")
        a, b = self.real, self.imag
        return make_coeff((a * c + b * d) / den, (b * c - a * d) / den)

    def __rtruediv__(self, other):
        o = self._parts(other)
        if o is None:
            return NotImplemented
        return GaussianRational(*o) / self

    def __neg__(self):
        return GaussianRational(-self.real, -self.imag)

    def __eq__(self, other):
        o = self._parts(other)
        if o is None:
            return NotImplemented
        return self.real == o[0] and self.imag == o[1]

    def __hash__(self):
        return hash((self.real, self.imag))

    def __complex__(self):
        return complex(float(self.real), float(self.imag))

    def conjugate(self):
        return make_coeff(self.real, -self.imag)

    def __repr__(self):
        return f"GaussianRational({self.real}, {self.imag})"


Coeff = Union[Fraction, GaussianRational]

I_UNIT = GaussianRational(0, 1)


def make_coeff(real, imag=0) -> Coeff:
    if imag == 0:
        return Fraction(real)
    return GaussianRational(real, imag)


def coerce_coeff(value) -> Coeff:
    """Convert ``value`` to an exact coefficient.

    Floats are converted exactly (their binary value), so ``0.1`` becomes
    ``3602879701896397/36028797018963968``; pass ``"0.1"`` or
    ``Fraction(1, 10)`` for the decimal.
    """
    if isinstance(value, (Fraction, GaussianRational)):
        if isinstance(value, GaussianRational) and value.imag == 0:
            return value.real
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a valid coefficient")
    if isinstance(value, numbers.Integral):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, numbers.Real):
        v = float(value)
        if not math.isfinite(v):
            raise ValueError(f"non-finite coefficient {value!r}")
        return Fraction(v)
    if isinstance(value, numbers.Complex):
        v = complex(value)
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            raise ValueError(f"non-finite coefficient {value!r}")
        return make_coeff(Fraction(v.real), Fraction(v.imag))
    raise TypeError(f"cannot use {type(value).__name__} as a coefficient")


def _falling(n: int, r: int) -> int:
    out = 1
    for t in range(n - r + 1, n + 1):
        out *= t
    return out


class PolySymbol:
    """Immutable sparse polynomial in ``x``, ``p`` and ``hbar``.

    Parameters
    ----------
    terms : mapping, optional
        ``{(i, j, k): coefficient}`` for the monomial ``x**i p**j hbar**k``.
        Coefficients are converted with :func:`coerce_coeff`; zeros are
        dropped.

    Examples
    --------
    >>> I = PolySymbol.action()
    >>> I.derive("p") == PolySymbol.var("p")
    True
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Exponent, object] | None = None):
        clean = {}
        for key, value in (terms or {}).items():
            if len(key) == 2:
                key = (key[0], key[1], 0)
            i, j, k = (int(e) for e in key)
            if i < 0 or j < 0 or k < 0:
                raise ValueError(f"negative exponent in {key}")
            c = coerce_coeff(value)
            if c != 0:
                clean[(i, j, k)] = clean.get((i, j, k), 0) + c
        self._terms = {e: clean[e] for e in sorted(clean) if clean[e] != 0}
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict) -> "PolySymbol":
        # trusted constructor: coefficients already exact, zeros may remain
        obj = cls.__new__(cls)
        obj._terms = {e: terms[e] for e in sorted(terms) if terms[e] != 0}
        obj._hash = None
        return obj

    # constructors

    @classmethod
    def zero(cls) -> "PolySymbol":
        return cls._raw({})

    @classmethod
    def constant(cls, c) -> "PolySymbol":
        return cls({(0, 0, 0): c})

    @classmethod
    def var(cls, name: str) -> "PolySymbol":
        key = {"x": (1, 0, 0), "p": (0, 1, 0), "hbar": (0, 0, 1)}.get(name)
        if key is None:
            raise ValueError(f"unknown variable {name!r}")
        return cls({key: 1})

    @classmethod
    def action(cls) -> "PolySymbol":
        """The harmonic-oscillator action ``(x**2 + p**2) / 2``."""
        half = Fraction(1, 2)
        return cls({(2, 0, 0): half, (0, 2, 0): half})

    @classmethod
    def monomial(cls, i: int, j: int, k: int = 0, c=1) -> "PolySymbol":
        return cls({(i, j, k): c})

    # inspection

    @property
    def terms(self) -> Mapping[Exponent, Coeff]:
        return dict(self._terms)

    def items(self) -> Iterator[Tuple[Exponent, Coeff]]:
        return iter(self._terms.items())

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    @property
    def degree(self) -> int:
        """Total degree in ``(x, p)``; ``-1`` for the zero symbol."""
        return max((i + j for i, j, _ in self._terms), default=-1)

    @property
    def hbar_order(self) -> int:
        """Largest power of ``hbar``; ``-1`` for the zero symbol."""
        return max((k for _, _, k in self._terms), default=-1)

    @property
    def is_real(self) -> bool:
        return all(isinstance(c, Fraction) for c in self._terms.values())

    def coeff(self, i: int, j: int, k: int = 0) -> Coeff:
        return self._terms.get((i, j, k), Fraction(0))

    def hbar_part(self, k: int) -> "PolySymbol":
        """Coefficient of ``hbar**k`` as an hbar-free symbol."""
        return PolySymbol._raw({(i, j, 0): c for (i, j, kk), c in self._terms.items() if kk == k})

    def principal(self) -> "PolySymbol":
        return self.hbar_part(0)

    def action_polynomial(self) -> Optional[Tuple[Coeff, ...]]:
        """``(c0, c1, ...)`` if the principal part equals ``sum c_k I**k`` exactly, else None."""
        P = self.principal()
        if not P:
            return (Fraction(0),)
        if P.degree % 2:
            return None
        coeffs = tuple(P.coeff(2 * k, 0) * 2 ** k for k in range(P.degree // 2 + 1))
        rebuilt = PolySymbol.zero()
        power = PolySymbol.constant(1)
        I = PolySymbol.action()
        for c in coeffs:
            rebuilt = rebuilt + power.scale(c) if c != 0 else rebuilt
            power = power * I
        return coeffs if rebuilt == P else None

    def truncate(self, max_hbar_order: int) -> "PolySymbol":
        return PolySymbol._raw({e: c for e, c in self._terms.items() if e[2] <= max_hbar_order})

    def homogeneous_part(self, degree: int) -> "PolySymbol":
        return PolySymbol._raw({e: c for e, c in self._terms.items() if e[0] + e[1] == degree})

    def truncate_degree(self, max_degree: int) -> "PolySymbol":
        return PolySymbol._raw({e: c for e, c in self._terms.items() if e[0] + e[1] <= max_degree})

    def real_part(self) -> "PolySymbol":
        return PolySymbol._raw({e: (c.real if isinstance(c, GaussianRational) else c)
                                for e, c in self._terms.items()})

    def imag_part(self) -> "PolySymbol":
        return PolySymbol._raw({e: c.imag for e, c in self._terms.items()
                                if isinstance(c, GaussianRational)})

    def conjugate(self) -> "PolySymbol":
        return PolySymbol._raw({e: (c.conjugate() if isinstance(c, GaussianRational) else c)
                                for e, c in self._terms.items()})

    # ring operations

    def _coerce_other(self, other):
        if isinstance(other, PolySymbol):
            return other
        try:
            return PolySymbol.constant(other)
        except TypeError:
            return None

    def __add__(self, other):
        other = self._coerce_other(other)
        if other is None:
            return NotImplemented
        out = dict(self._terms)
        for e, c in other._terms.items():
            out[e] = out[e] + c if e in out else c
        return PolySymbol._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return PolySymbol._raw({e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce_other(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce_other(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if not isinstance(other, PolySymbol):
            try:
                c = coerce_coeff(other)
            except TypeError:
                return NotImplemented
            return self.scale(c)
        return PolySymbol._raw(_mul_terms(self._terms, other._terms))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, PolySymbol):
            return NotImplemented
        c = coerce_coeff(other)
        if c == 0:
            raise ZeroDivisionError("division of a symbol by zero")
        return self.scale(1 / c if isinstance(c, Fraction) else Fraction(1) / c)

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers are supported")
        result = PolySymbol.constant(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def scale(self, c) -> "PolySymbol":
        c = coerce_coeff(c)
        if c == 0:
            return PolySymbol.zero()
        return PolySymbol._raw({e: v * c for e, v in self._terms.items()})

    def shift_hbar(self, n: int) -> "PolySymbol":
        """Multiply by ``hbar**n``."""
        return PolySymbol._raw({(i, j, k + n): c for (i, j, k), c in self._terms.items()})

    def __eq__(self, other):
        if isinstance(other, PolySymbol):
            return self._terms == other._terms
        try:
            return self._terms == PolySymbol.constant(other)._terms
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple(self._terms.items()))
        return self._hash

    # calculus

    def derive(self, var: str, times: int = 1) -> "PolySymbol":
        if var == "x":
            return self.partial(times, 0)
        if var == "p":
            return self.partial(0, times)
        raise ValueError(f"can only differentiate by 'x' or 'p', not {var!r}")

    def partial(self, nx: int, np_: int) -> "PolySymbol":
        """Exact mixed partial derivative ``d^nx/dx^nx d^np/dp^np``."""
        return PolySymbol._raw(_partial_terms(self._terms, nx, np_))

    # evaluation

    def __call__(self, x, p, hbar=0.0):
        return self.eval(x, p, hbar)

    def eval(self, x, p, hbar=0.0):
        """Evaluate at a phase-space point; returns ``complex`` (or an array).

        The polynomial is evaluated by Horner's rule in ``x`` with inner
        Horner polynomials in ``p`` and ``hbar``.  For real coefficients the
        imaginary part is exactly zero.
        """
        scalar = np.isscalar(x) and np.isscalar(p) and np.isscalar(hbar)
        re, im = _horner(self._terms, x, p, hbar)
        if scalar:
            return complex(float(re), float(im))
        return np.asarray(re, dtype=float) + 1j * np.asarray(im, dtype=float)

    def eval_real(self, x, p, hbar=0.0):
        re, _ = _horner(self._terms, x, p, hbar)
        return re

    # substitution

    def substitute(self, x: "PolySymbol", p: "PolySymbol") -> "PolySymbol":
        """Compose with ``x -> x_expr``, ``p -> p_expr`` (hbar left alone)."""
        out = PolySymbol.zero()
        xpow = [PolySymbol.constant(1)]
        ppow = [PolySymbol.constant(1)]
        for (i, j, k), c in self._terms.items():
            while len(xpow) <= i:
                xpow.append(xpow[-1] * x)
            while len(ppow) <= j:
                ppow.append(ppow[-1] * p)
            out = out + (xpow[i] * ppow[j]).shift_hbar(k).scale(c)
        return out

    def compose_linear(self, matrix) -> "PolySymbol":
        """Return ``P o S`` for the 2x2 matrix ``S`` acting on ``(x, p)``."""
        m = [[coerce_coeff(v) for v in row] for row in np.asarray(matrix, dtype=object).tolist()]
        x = PolySymbol({(1, 0, 0): m[0][0], (0, 1, 0): m[0][1]})
        p = PolySymbol({(1, 0, 0): m[1][0], (0, 1, 0): m[1][1]})
        return self.substitute(x, p)

    def shift(self, x0, p0) -> "PolySymbol":
        """Return the symbol re-expanded about ``(x0, p0)``."""
        x = PolySymbol({(1, 0, 0): 1, (0, 0, 0): x0})
        p = PolySymbol({(0, 1, 0): 1, (0, 0, 0): p0})
        return self.substitute(x, p)

    # serialization

    def to_text(self) -> str:
        lines = []
        for (i, j, k), c in self._terms.items():
            if isinstance(c, GaussianRational):
                lines.append(f"{i} {j} {k} {_frac_text(c.real)} {_frac_text(c.imag)}")
            else:
                lines.append(f"{i} {j} {k} {_frac_text(c)}")
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_text(cls, text: str) -> "PolySymbol":
        terms = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            fields = line.split()
            if len(fields) not in (4, 5):
                raise ValueError(f"line {lineno}: expected 'i j k num/den [num/den]', got {line!r}")
            i, j, k = (int(f) for f in fields[:3])
            re = Fraction(fields[3])
            im = Fraction(fields[4]) if len(fields) == 5 else Fraction(0)
            key = (i, j, k)
            if key in terms:
                raise ValueError(f"line {lineno}: duplicate exponent {key}")
            terms[key] = make_coeff(re, im)
        return cls(terms)

    def __repr__(self):
        if not self._terms:
            return "PolySymbol(0)"
        parts = []
        for (i, j, k), c in self._terms.items():
            mono = "*".join(f"{v}^{e}" if e > 1 else v
                            for v, e in (("x", i), ("p", j), ("hbar", k)) if e)
            cs = (f"({c.real}{'+' if c.imag > 0 else '-'}{abs(c.imag)}i)"
                  if isinstance(c, GaussianRational) else str(c))
            parts.append(f"{cs}*{mono}" if mono else cs)
        return "PolySymbol(" + " + ".join(parts) + ")"


def _frac_text(c: Fraction) -> str:
    return f"{c.numerator}/{c.denominator}"


def _mul_terms(a: Mapping, b: Mapping) -> dict:
    out: dict = {}
    for (i1, j1, k1), c1 in a.items():
        for (i2, j2, k2), c2 in b.items():
            e = (i1 + i2, j1 + j2, k1 + k2)
            v = c1 * c2
            out[e] = out[e] + v if e in out else v
    return out


def _partial_terms(terms: Mapping, nx: int, np_: int) -> dict:
    out = {}
    for (i, j, k), c in terms.items():
        if i >= nx and j >= np_:
            out[(i - nx, j - np_, k)] = c * (_falling(i, nx) * _falling(j, np_))
    return out


def _horner(terms: Mapping, x, p, hbar):
    # group by x power, then Horner in x over p/hbar inner polynomials
    if not terms:
        return 0.0 * x, 0.0 * x
    by_i: dict = {}
    for (i, j, k), c in terms.items():
        by_i.setdefault(i, []).append((j, k, c))
    top = max(by_i)
    re = 0.0
    im = 0.0
    for i in range(top, -1, -1):
        inner_re = 0.0
        inner_im = 0.0
        for j, k, c in by_i.get(i, ()):
            w = (p ** j) * (hbar ** k)
            if isinstance(c, GaussianRational):
                inner_re = inner_re + float(c.real) * w
                inner_im = inner_im + float(c.imag) * w
            else:
                inner_re = inner_re + float(c) * w
        re = re * x + inner_re
        im = im * x + inner_im
    return re, im


def derive(P: PolySymbol, var: str) -> PolySymbol:
    """Exact partial derivative of ``P`` by ``'x'`` or ``'p'``."""
    return P.derive(var)


def evaluate(P: PolySymbol, x, p, hbar=0.0):
    return P.eval(x, p, hbar)


def _fd_partial(f: Callable, x0: float, p0: float, nx: int, np_: int, h: float) -> float:
    # tensor product of central stencils: points at (n/2 - l) * h
    total = 0.0
    for lx in range(nx + 1):
        wx = math.comb(nx, lx) * (-1) ** lx
        dx = (nx / 2 - lx) * h
        for lp in range(np_ + 1):
            wp = math.comb(np_, lp) * (-1) ** lp
            dp = (np_ / 2 - lp) * h
            total += wx * wp * f(x0 + dx, p0 + dp)
    return total / h ** (nx + np_)


def fd_partial(f: Callable, x0: float, p0: float, nx: int, np_: int, scale: float = 1.0) -> float:
    """Mixed partial derivative of ``f`` by central differences.

    Uses a tensor-product central stencil extrapolated twice (Richardson,
    steps ``h, h/2, h/4``), which removes the ``h**2`` and ``h**4`` error
    terms.  The base step is ``eps**(1/(n+6))`` times ``scale`` for a
    derivative of total order ``n``.
    """
    n = nx + np_
    if n == 0:
        return float(f(x0, p0))
    h = np.finfo(float).eps ** (1.0 / (n + 6)) * scale
    d1 = _fd_partial(f, x0, p0, nx, np_, h)
    d2 = _fd_partial(f, x0, p0, nx, np_, h / 2)
    d4 = _fd_partial(f, x0, p0, nx, np_, h / 4)
    r1 = (4 * d2 - d1) / 3
    r2 = (4 * d4 - d2) / 3
    return (16 * r2 - r1) / 15


def taylor_from_callable(H, center: Iterable[float], degree: int,
                         drop_constant: bool = False) -> PolySymbol:
    """Taylor polynomial of a smooth phase-space function about ``center``.

    ``H`` is anything with a ``value(x, p)`` callable and, optionally, an
    exact ``partials(nx, np, x, p)`` callback (such as
    :class:`~bohrsommerfeld.dynamics.SmoothHamiltonian`); a plain callable
    ``H(x, p)`` also works.  Without ``partials`` the derivatives are taken
    by :func:`fd_partial`.  The result is expressed in the shifted variables
    ``(x - x0, p - p0)``.
    """
    if degree < 2:
        raise ValueError("degree must be at least 2 (the quadratic part is required)")
    x0, p0 = (float(c) for c in center)
    value = getattr(H, "value", H)
    partials = getattr(H, "partials", None)
    terms = {}
    for n in range(0 if not drop_constant else 1, degree + 1):
        for nx in range(n + 1):
            np_ = n - nx
            if partials is not None:
                d = partials(nx, np_, x0, p0)
            else:
                d = fd_partial(value, x0, p0, nx, np_)
            d = coerce_coeff(d)
            if d != 0:
                terms[(nx, np_, 0)] = d / (math.factorial(nx) * math.factorial(np_))
    return PolySymbol(terms)


def compile_real(P: PolySymbol, hbar: float = 0.0) -> Callable:
    """Fast float evaluator ``f(x, p)`` for a real symbol at fixed ``hbar``.

    Works on scalars and on numpy arrays.
    """
    by_ij: dict = {}
    for (i, j, k), c in P.real_part().items():
        by_ij[(i, j)] = by_ij.get((i, j), 0.0) + float(c) * hbar ** k
    items = [(i, j, c) for (i, j), c in by_ij.items() if c != 0.0]
    if not items:
        return lambda x, p: 0.0 * x
    max_i = max(i for i, _, _ in items)
    max_j = max(j for _, j, _ in items)

    def f(x, p):
        xs = [1.0]
        for _ in range(max_i):
            xs.append(xs[-1] * x)
        ps = [1.0]
        for _ in range(max_j):
            ps.append(ps[-1] * p)
        total = 0.0
        for i, j, c in items:
            total = total + c * xs[i] * ps[j]
        return total

    return f
