"""Classical Birkhoff normal form about an elliptic fixed point.

The quadratic part is first brought to ``a1 (x**2 + p**2) / 2`` by a linear
symplectic map; the higher-degree terms are then removed order by order with
Lie transforms in the complex coordinates ``xi = x + i p``,
``eta = x - i p``, leaving a polynomial in the action
``I = (x**2 + p**2) / 2 = xi * eta / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Tuple

import numpy as np

from .exceptions import DegreeTooLow, NonElliptic, NotSymplectic
from .polysym import GaussianRational, PolySymbol, coerce_coeff

__all__ = [
    "LinearSymplectic",
    "ActionSeries",
    "normalize_quadratic",
    "birkhoff_series",
]

_DET_TOL = 1e-12


@dataclass(frozen=True)
class LinearSymplectic:
    """A 2x2 matrix ``S`` with ``det S = 1``, acting as ``z -> S z``.

    Entries may be exact (``int``/``Fraction``) or floats.
    """

    matrix: Tuple[Tuple[object, object], Tuple[object, object]]

    def __post_init__(self):
        m = tuple(tuple(row) for row in np.asarray(self.matrix, dtype=object).tolist())
        if len(m) != 2 or any(len(r) != 2 for r in m):
            raise ValueError("a 2x2 matrix is required")
        object.__setattr__(self, "matrix", m)
        if abs(float(self.det) - 1.0) > _DET_TOL:
            raise NotSymplectic(f"det S = {float(self.det)!r}, expected 1")

    @property
    def det(self):
        (a, b), (c, d) = self.matrix
        return a * d - b * c

    @property
    def array(self) -> np.ndarray:
        return np.array(self.matrix, dtype=float)

    @property
    def is_exact(self) -> bool:
        return all(isinstance(v, (int, Fraction)) for row in self.matrix for v in row)

    def inverse(self) -> "LinearSymplectic":
        (a, b), (c, d) = self.matrix
        return LinearSymplectic(((d, -b), (-c, a)))

    def __matmul__(self, other: "LinearSymplectic") -> "LinearSymplectic":
        (a, b), (c, d) = self.matrix
        (e, f), (g, h) = other.matrix
        return LinearSymplectic(((a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h)))

    def __call__(self, x, p):
        (a, b), (c, d) = self.array
        return a * x + b * p, c * x + d * p

    @classmethod
    def identity(cls) -> "LinearSymplectic":
        return cls(((1, 0), (0, 1)))

    @classmethod
    def rotation(cls, theta: float) -> "LinearSymplectic":
        c, s = math.cos(theta), math.sin(theta)
        return cls(((c, -s), (s, c)))

    @classmethod
    def squeeze(cls, s: float) -> "LinearSymplectic":
        return cls(((s, 0.0), (0.0, 1.0 / s)))

    @classmethod
    def canonical_scaling(cls, mass: float, omega: float) -> "LinearSymplectic":
        """Map from scaled coordinates ``x' = sqrt(m w) x``, ``p' = p / sqrt(m w)`` back to ``(x, p)``.

        Composing ``p**2/2m + m w**2 x**2/2`` with this map gives ``w (x'**2 + p'**2) / 2``.
        """
        r = math.sqrt(mass * omega)
        return cls(((1.0 / r, 0.0), (0.0, r)))

    @classmethod
    def random(cls, rng: np.random.Generator, max_squeeze: float = 2.0) -> "LinearSymplectic":
        """Rotation, squeeze, rotation, plus a shear; always det 1 to rounding."""
        t1, t2 = rng.uniform(0, 2 * np.pi, size=2)
        s = float(np.exp(rng.uniform(-np.log(max_squeeze), np.log(max_squeeze))))
        shear = float(rng.uniform(-0.5, 0.5))
        m = (cls.rotation(t1).array @ np.diag([s, 1 / s]) @ cls.rotation(t2).array
             @ np.array([[1.0, shear], [0.0, 1.0]]))
        # remove the rounding residue from the determinant
        m = m / math.sqrt(np.linalg.det(m))
        return cls(m)


@dataclass(frozen=True)
class ActionSeries:
    """Energy as a power series in the action, ``f0(A) = a1 A + a2 A**2 + ...``."""

    coefficients: Tuple[Fraction, ...]

    @property
    def order(self) -> int:
        return len(self.coefficients)

    def __getitem__(self, k: int) -> Fraction:
        """``a_k`` (one-based, matching ``a1, a2, ...``)."""
        if k < 1 or k > self.order:
            raise IndexError(k)
        return self.coefficients[k - 1]

    def __call__(self, A, derivative: int = 0):
        A = np.asarray(A, dtype=float)
        total = np.zeros_like(A)
        for k, a in enumerate(self.coefficients, start=1):
            if k < derivative:
                continue
            total = total + float(a) * math.perm(k, derivative) * A ** (k - derivative)
        return float(total) if total.ndim == 0 else total

    def as_floats(self) -> Tuple[float, ...]:
        return tuple(float(a) for a in self.coefficients)


def _exact_root(q: Fraction, n: int) -> Fraction | None:
    if q < 0:
        return None
    num = _int_root(q.numerator, n)
    den = _int_root(q.denominator, n)
    if num is None or den is None:
        return None
    return Fraction(num, den)


def _int_root(v: int, n: int) -> int | None:
    r = round(v ** (1.0 / n)) if v else 0
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand ** n == v:
            return cand
    return None


def _quadratic_form(P: PolySymbol):
    q11 = 2 * P.coeff(2, 0)
    q12 = P.coeff(1, 1)
    q22 = 2 * P.coeff(0, 2)
    return q11, q12, q22


def normalize_quadratic(P: PolySymbol) -> Tuple[LinearSymplectic, PolySymbol]:
    """Find ``S`` with ``det S = 1`` so that ``P o S`` has quadratic part ``a1 (x**2 + p**2) / 2``.

    Only the principal (hbar-free) part of ``P`` is used and its constant
    term is dropped.  The returned symbol has its quadratic part set to
    exactly ``a1 I`` with ``a1 = sqrt(det Q)``, ``Q`` the Hessian at the
    origin.

    Raises
    ------
    NonElliptic
        If ``Q`` is indefinite, singular or negative definite.
    ValueError
        If ``P`` has a linear part (the origin is not a fixed point).
    """
    P = P.principal()
    if P.coeff(1, 0) != 0 or P.coeff(0, 1) != 0:
        raise ValueError("symbol has a linear part; expand about a fixed point first")
    P = P - P.coeff(0, 0)
    q11, q12, q22 = _quadratic_form(P)
    if not any(isinstance(c, GaussianRational) for c in (q11, q12, q22)):
        det = q11 * q22 - q12 * q12
    else:
        raise NonElliptic("quadratic part has complex coefficients")
    if det <= 0 or q11 <= 0:
        kind = "singular" if det == 0 else ("indefinite" if det < 0 else "negative definite")
        raise NonElliptic(f"quadratic part is {kind} (det Q = {float(det):.6g})")

    a1 = _exact_root(det, 2)
    S = None
    if q12 == 0 and a1 is not None:
        if q11 == q22:
            S = LinearSymplectic.identity()
        else:
            r = _exact_root(q22 / q11, 4)
            if r is not None:
                S = LinearSymplectic(((r, 0), (0, 1 / r)))
    if S is None:
        f11, f12, f22 = float(q11), float(q12), float(q22)
        a1f = math.sqrt(f11 * f22 - f12 * f12)
        theta = 0.5 * math.atan2(2 * f12, f11 - f22) if f12 != 0.0 else 0.0
        c, s = math.cos(theta), math.sin(theta)
        d1 = c * c * f11 + 2 * c * s * f12 + s * s * f22
        d2 = s * s * f11 - 2 * c * s * f12 + c * c * f22
        V = np.array([[c, -s], [s, c]])
        m = V @ np.diag([math.sqrt(a1f / d1), math.sqrt(a1f / d2)])
        m = m / math.sqrt(np.linalg.det(m))
        S = LinearSymplectic(m)
        if a1 is None:
            a1 = Fraction(a1f)

    Pn = P.compose_linear(S.matrix)
    Pn = Pn - Pn.homogeneous_part(2) + PolySymbol.action().scale(a1)
    return S, Pn


def _complex_bracket(F: PolySymbol, G: PolySymbol) -> PolySymbol:
    # {F, G} in (xi, eta) stored as (x, p) slots; {xi, eta} = -2i
    return (F.partial(1, 0) * G.partial(0, 1) - F.partial(0, 1) * G.partial(1, 0)).scale(
        GaussianRational(0, -2))


def _lie_transform(H: PolySymbol, W: PolySymbol, max_degree: int) -> PolySymbol:
    out = H
    term = H
    m = 1
    while True:
        term = _complex_bracket(term, W).truncate_degree(max_degree).scale(Fraction(1, m))
        if not term:
            return out
        out = out + term
        m += 1


def birkhoff_series(P: PolySymbol, order: int, known_degree: int | None = None) -> ActionSeries:
    """Coefficients ``a1..a_order`` of the classical Birkhoff normal form of ``P``.

    Parameters
    ----------
    P : PolySymbol
        Expansion about the fixed point (at the origin); hbar terms ignored.
    order : int
        Number of action coefficients wanted; uses terms of ``P`` through
        degree ``2 * order``.
    known_degree : int, optional
        Degree through which ``P`` is valid when it is a truncated Taylor
        expansion.  A polynomial symbol is exact to all degrees and needs
        no value here.
    """
    if order < 1:
        raise ValueError("order must be at least 1")
    max_degree = 2 * order
    if known_degree is not None and known_degree < max_degree:
        raise DegreeTooLow(f"order {order} needs terms through degree {max_degree}, "
                           f"symbol known only through degree {known_degree}")
    _, Pn = normalize_quadratic(P)
    a1 = Pn.coeff(2, 0) * 2
    half = Fraction(1, 2)
    # x = (xi + eta)/2, p = -i (xi - eta)/2, with xi and eta in the x and p slots
    x_of = PolySymbol({(1, 0, 0): half, (0, 1, 0): half})
    p_of = PolySymbol({(1, 0, 0): GaussianRational(0, -half), (0, 1, 0): GaussianRational(0, half)})
    H = Pn.truncate_degree(max_degree).substitute(x_of, p_of)
    for d in range(3, max_degree + 1):
        w = {}
        for (a, b, _), h in H.homogeneous_part(d).items():
            if a != b:
                w[(a, b, 0)] = GaussianRational(0, 1) * h / (a1 * (a - b))
        if w:
            H = _lie_transform(H, PolySymbol(w), max_degree)
    coeffs = []
    for k in range(1, order + 1):
        c = H.coeff(k, k) * 2 ** k
        if isinstance(c, GaussianRational):
            raise ArithmeticError(f"normal form coefficient a{k} is not real: {c!r}")
        coeffs.append(Fraction(c))
    return ActionSeries(tuple(coeffs))
