"""Built-in Hamiltonians used by the command line and the test suite."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Optional

import numpy as np

from .dynamics import SmoothHamiltonian
from .polysym import PolySymbol, coerce_coeff

__all__ = ["Builtin", "BUILTINS", "get_builtin", "builtin_names"]

_x = PolySymbol.var("x")
_p = PolySymbol.var("p")
_hbar = PolySymbol.var("hbar")
_I = PolySymbol.action()


@dataclass(frozen=True)
class Builtin:
    """A named Hamiltonian with everything needed to quantize it two ways.

    ``symbol`` is set for polynomial symbols (Fock oracle, normal form);
    ``potential`` and ``mass`` for ``p**2/2m + V`` (grid oracle).
    """

    name: str
    hamiltonian: SmoothHamiltonian
    symbol: Optional[PolySymbol] = None
    potential: Optional[Callable] = None
    mass: float = 1.0
    guess: tuple = (0.0, 0.0)
    energy_ceiling: Optional[float] = None
    description: str = ""
    exact: Optional[Callable] = None

    def exact_levels(self, n, hbar: float) -> Optional[np.ndarray]:
        if self.exact is None:
            return None
        return np.array([self.exact(int(k), hbar) for k in n], dtype=float)


def _kp_symbol(V: PolySymbol, mass=1) -> PolySymbol:
    return _p * _p * Fraction(1, 2) / coerce_coeff(mass) + V


def _poly_potential(V: PolySymbol) -> Callable:
    coeffs = [float(V.coeff(i, 0)) for i in range(V.degree + 1)]

    def f(x):
        total = 0.0
        for c in reversed(coeffs):
            total = total * x + c
        return total

    return f


def _from_kp(name: str, V: PolySymbol, description: str, guess=(0.0, 0.0), exact=None) -> Builtin:
    sym = _kp_symbol(V)
    return Builtin(name, SmoothHamiltonian.from_polysymbol(sym, name=name), sym,
                   _poly_potential(V), 1.0, guess, None, description, exact)


def harmonic() -> Builtin:
    return _from_kp("harmonic", _x * _x * Fraction(1, 2),
                    "p**2/2 + x**2/2; levels (n + 1/2) hbar",
                    guess=(0.3, -0.2), exact=lambda n, h: (n + 0.5) * h)


def shifted_harmonic(x0=1) -> Builtin:
    s = _x - coerce_coeff(x0)
    return _from_kp("shifted_harmonic", s * s * Fraction(1, 2),
                    "p**2/2 + (x - x0)**2/2, minimum away from the origin",
                    exact=lambda n, h: (n + 0.5) * h)


def perturbed_quartic(eps="1/10") -> Builtin:
    e = coerce_coeff(eps)
    return _from_kp("perturbed_quartic", _x * _x * Fraction(1, 2) + e * _x ** 4,
                    f"p**2/2 + x**2/2 + {e} x**4")


def pure_quartic() -> Builtin:
    return _from_kp("pure_quartic", _x ** 4,
                    "p**2/2 + x**4; degenerate minimum, rank-1 Hessian (negative control)",
                    guess=(0.1, 0.0))


def inverted_harmonic() -> Builtin:
    sym = -_I
    return Builtin("inverted_harmonic", SmoothHamiltonian.from_polysymbol(sym, name="inverted_harmonic"),
                   sym, description="-(x**2 + p**2)/2; a generic maximum, quantized through -H",
                   exact=lambda n, h: -(n + 0.5) * h)


def morse(D=1.0, alpha=1.0) -> Builtin:
    D, a = float(D), float(alpha)

    def V(x):
        return D * (1.0 - np.exp(-a * x)) ** 2

    def dnV(n, x):
        # V = D (1 - 2 e^{-a x} + e^{-2 a x})
        return D * (-2.0 * (-a) ** n * np.exp(-a * x) + (-2.0 * a) ** n * np.exp(-2.0 * a * x))

    omega = a * math.sqrt(2.0 * D)

    def exact(n, h):
        w = h * omega * (n + 0.5)
        return w - w * w / (4.0 * D)

    H = SmoothHamiltonian.kinetic_potential(V, dnV=dnV, name="morse")
    return Builtin("morse", H, None, V, 1.0, (0.1, 0.0), 0.8 * D,
                   f"p**2/2 + {D} (1 - exp(-{a} x))**2; ceiling 0.8 D", exact)


def symbol_I2() -> Builtin:
    sym = _I * _I
    return Builtin("symbol_I2", SmoothHamiltonian.from_polysymbol(sym, name="symbol_I2"), sym,
                   description="I**2, the Weyl symbol of (I^)**2 minus hbar**2/4",
                   guess=(0.0, 0.0), exact=lambda n, h: ((n + 0.5) * h) ** 2 + h * h / 4)


def symbol_I3() -> Builtin:
    sym = _I ** 3 - _hbar * _hbar * _I * Fraction(5, 4)
    return Builtin("symbol_I3", SmoothHamiltonian.from_polysymbol(sym, name="symbol_I3"), sym,
                   description="I**3 - (5/4) hbar**2 I, the Weyl symbol of (I^)**3",
                   guess=(0.0, 0.0), exact=lambda n, h: ((n + 0.5) * h) ** 3)


BUILTINS: Dict[str, Callable[..., Builtin]] = {
    "harmonic": harmonic,
    "shifted_harmonic": shifted_harmonic,
    "perturbed_quartic": perturbed_quartic,
    "pure_quartic": pure_quartic,
    "inverted_harmonic": inverted_harmonic,
    "morse": morse,
    "symbol_I2": symbol_I2,
    "symbol_I3": symbol_I3,
}


def builtin_names():
    return sorted(BUILTINS)


def get_builtin(name: str, **params) -> Builtin:
    try:
        factory = BUILTINS[name]
    except KeyError:
        raise KeyError(f"unknown builtin {name!r}; choose from {', '.join(builtin_names())}") from None
    return factory(**params)
