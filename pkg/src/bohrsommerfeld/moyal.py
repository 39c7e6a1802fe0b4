"""Moyal star-product algebra on polynomial symbols.

Sign convention: the Poisson tensor is fixed so that ``{x, p} = +1`` and
``x * p = x p + i hbar / 2``, which is the Weyl symbol of the operator
product ``x^ p^``.  Even-order brackets do not depend on this choice.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Sequence, Tuple

import numpy as np

from .polysym import GaussianRational, PolySymbol, _mul_terms, _partial_terms, coerce_coeff

__all__ = [
    "moyal_bracket",
    "poisson_bracket",
    "star",
    "star_series",
    "star_power",
    "star_commutator",
    "hessian_bracket",
    "chain_diagram",
    "symbol_of_function",
]


def moyal_bracket(A: PolySymbol, B: PolySymbol, n: int) -> PolySymbol:
    """n-th order Moyal bracket ``{A, B}_n``.

    Full contraction of the n-th derivatives of ``A`` and ``B`` through n
    copies of the Poisson tensor.  With ``{x, p} = 1`` this is::

        sum_k  C(n, k) (-1)**k  d_x^(n-k) d_p^k A  *  d_x^k d_p^(n-k) B

    ``n = 0`` is the pointwise product and ``n = 1`` the Poisson bracket.
    """
    if n < 0:
        raise ValueError("bracket order must be non-negative")
    return PolySymbol._raw(_bracket_terms(A._terms, B._terms, n))


def _bracket_terms(a: dict, b: dict, n: int) -> dict:
    if n == 0:
        return _mul_terms(a, b)
    out: dict = {}
    for k in range(n + 1):
        da = _partial_terms(a, n - k, k)
        if not da:
            continue
        db = _partial_terms(b, k, n - k)
        if not db:
            continue
        w = math.comb(n, k) * (-1 if k % 2 else 1)
        for e, c in _mul_terms(da, db).items():
            v = c * w
            out[e] = out[e] + v if e in out else v
    return out


def poisson_bracket(A: PolySymbol, B: PolySymbol) -> PolySymbol:
    return moyal_bracket(A, B, 1)


def _series_factor(n: int):
    # (i/2)**n / n!
    mag = Fraction(1, 2 ** n * math.factorial(n))
    r = n % 4
    if r == 0:
        return mag
    if r == 1:
        return GaussianRational(0, mag)
    if r == 2:
        return -mag
    return GaussianRational(0, -mag)


def _degree(terms: dict) -> int:
    return max((i + j for i, j, _ in terms), default=-1)


def _split_hbar(terms: dict) -> dict:
    parts: dict = {}
    for e, c in terms.items():
        parts.setdefault(e[2], {})[e] = c
    return parts


def _star_terms(A: PolySymbol, B: PolySymbol, max_hbar_order: int | None) -> dict:
    a, b = A._terms, B._terms
    if not a or not b:
        return {}
    nmax = min(_degree(a), _degree(b))
    a_parts = _split_hbar(a)
    b_parts = _split_hbar(b)
    out: dict = {}
    for n in range(nmax + 1):
        factor = _series_factor(n)
        for ka, pa in a_parts.items():
            for kb, pb in b_parts.items():
                if max_hbar_order is not None and ka + kb + n > max_hbar_order:
                    continue
                for (i, j, k), c in _bracket_terms(pa, pb, n).items():
                    e = (i, j, k + n)
                    v = c * factor
                    out[e] = out[e] + v if e in out else v
    return out


def star(A: PolySymbol, B: PolySymbol, max_hbar_order: int | None = None) -> PolySymbol:
    """Moyal star product ``A * B`` with hbar-orders above ``max_hbar_order`` dropped.

    ``max_hbar_order=None`` keeps every term; the series always terminates for
    polynomial symbols once the bracket order exceeds ``min(deg A, deg B)``.
    """
    if max_hbar_order is not None and max_hbar_order < 0:
        raise ValueError("max_hbar_order must be >= 0")
    return PolySymbol._raw(_star_terms(A, B, max_hbar_order))


def star_series(A: PolySymbol, B: PolySymbol, max_hbar_order: int) -> Tuple[PolySymbol, bool]:
    """Truncated star product plus a flag telling whether the dropped tail is zero."""
    full = star(A, B)
    truncated = full.truncate(max_hbar_order)
    return truncated, truncated == full


def star_power(A: PolySymbol, k: int, max_hbar_order: int | None = None) -> PolySymbol:
    """``A * A * ... * A`` (``k`` factors)."""
    if k < 0:
        raise ValueError("power must be non-negative")
    result = PolySymbol.constant(1)
    for _ in range(k):
        result = star(result, A, max_hbar_order)
    return result


def star_commutator(A: PolySymbol, B: PolySymbol, max_hbar_order: int | None = None) -> PolySymbol:
    """Symbol of the commutator, ``2 sum_{n odd} (1/n!) (i hbar/2)**n {A, B}_n``."""
    a, b = A._terms, B._terms
    if not a or not b:
        return PolySymbol.zero()
    nmax = min(_degree(a), _degree(b))
    a_parts, b_parts = _split_hbar(a), _split_hbar(b)
    out: dict = {}
    for n in range(1, nmax + 1, 2):
        factor = 2 * _series_factor(n)
        for ka, pa in a_parts.items():
            for kb, pb in b_parts.items():
                if max_hbar_order is not None and ka + kb + n > max_hbar_order:
                    continue
                for (i, j, k), c in _bracket_terms(pa, pb, n).items():
                    e = (i, j, k + n)
                    v = c * factor
                    out[e] = out[e] + v if e in out else v
    return PolySymbol._raw(out)


def hessian_bracket(H, at: Sequence[float] | None = None):
    """``{H, H}_2 = 2 (H_xx H_pp - H_xp**2)``.

    Symbolic for a :class:`PolySymbol` (unless ``at`` is given); for anything
    exposing ``hess(x, p)`` the value at ``at`` is returned as a float.
    """
    if isinstance(H, PolySymbol):
        sym = 2 * (H.partial(2, 0) * H.partial(0, 2) - H.partial(1, 1) ** 2)
        if at is None:
            return sym
        return sym.eval(at[0], at[1]).real
    if at is None:
        raise ValueError("a phase point is required for a callable Hamiltonian")
    h = np.asarray(H.hess(at[0], at[1]), dtype=float)
    return 2.0 * (h[0, 0] * h[1, 1] - h[0, 1] * h[1, 0])


def chain_diagram(A: PolySymbol) -> PolySymbol:
    """Linear three-vertex diagram ``A,_mn J^ma J^nb A,_a A,_b``.

    Equals ``A_xx A_p**2 - 2 A_xp A_x A_p + A_pp A_x**2``; independent of
    the sign convention of the Poisson tensor.
    """
    ax, ap = A.partial(1, 0), A.partial(0, 1)
    return (A.partial(2, 0) * ap * ap
            - 2 * A.partial(1, 1) * ax * ap
            + A.partial(0, 2) * ax * ax)


def _poly_apply(coeffs: Sequence, A: PolySymbol) -> PolySymbol:
    # Horner with pointwise products
    result = PolySymbol.zero()
    for c in reversed(coeffs):
        result = result * A + PolySymbol.constant(c)
    return result


def _derivative_coeffs(coeffs: Sequence, order: int) -> list:
    out = list(coeffs)
    for _ in range(order):
        out = [k * out[k] for k in range(1, len(out))]
    return out


def symbol_of_function(A: PolySymbol, f: Sequence, hbar_order: int = 2) -> PolySymbol:
    """Weyl symbol of ``f(A^)`` for a polynomial ``f`` given by Taylor coefficients.

    ``f`` lists ``f(t) = f[0] + f[1] t + f[2] t**2 + ...``.  Through
    ``hbar**2``::

        f(A) - hbar**2 [ f''(A)/16 {A, A}_2 + f'''(A)/24 chain(A) ]

    with ``chain`` from :func:`chain_diagram`.
    """
    if hbar_order not in (0, 2):
        raise ValueError("hbar_order must be 0 or 2; the hbar**4 term is not implemented")
    coeffs = [coerce_coeff(c) for c in f]
    result = _poly_apply(coeffs, A)
    if hbar_order == 0:
        return result
    f2 = _derivative_coeffs(coeffs, 2)
    f3 = _derivative_coeffs(coeffs, 3)
    corr = PolySymbol.zero()
    if f2:
        corr = corr + _poly_apply(f2, A) * moyal_bracket(A, A, 2) * Fraction(1, 16)
    if f3:
        corr = corr + _poly_apply(f3, A) * chain_diagram(A) * Fraction(1, 24)
    return result - corr.shift_hbar(2)
