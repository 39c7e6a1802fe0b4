"""Estimator-style wrappers: configure in ``__init__``, ``fit`` a Hamiltonian, ``predict`` levels.

The "training data" of every estimator here is a single Hamiltonian (or
potential), and ``predict`` maps quantum numbers (or actions) to energies.
Hyper-parameters are plain ``__init__`` arguments, so ``get_params`` /
``set_params`` / ``clone`` from scikit-learn work unchanged.
"""

from __future__ import annotations

import numbers
from typing import Callable, Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .dynamics import SmoothHamiltonian, find_fixed_point
from .normalform import birkhoff_series
from .oracle import fock_spectrum, grid_spectrum
from .polysym import PolySymbol
from .spectrum import bs_spectrum, prepare

__all__ = [
    "BohrSommerfeld",
    "BirkhoffNormalForm",
    "GridOracle",
    "FockOracle",
    "check_hbar",
    "check_levels",
    "check_order",
    "check_hamiltonian",
]


def check_hbar(hbar) -> float:
    if isinstance(hbar, bool) or not isinstance(hbar, numbers.Real):
        raise TypeError(f"hbar must be a real number, got {type(hbar).__name__}")
    h = float(hbar)
    if not np.isfinite(h) or h <= 0:
        raise ValueError(f"hbar must be positive and finite, got {hbar!r}")
    return h


def check_levels(n) -> np.ndarray:
    """Non-negative integer quantum numbers as a 1-D array."""
    arr = np.atleast_1d(np.asarray(n))
    if arr.ndim != 1:
        raise ValueError("quantum numbers must form a 1-D sequence")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.equal(np.mod(arr, 1), 0)):
            raise ValueError("quantum numbers must be integers")
        arr = arr.astype(int)
    if np.any(arr < 0):
        raise ValueError("quantum numbers must be non-negative")
    return arr.astype(int)


def check_order(order) -> int:
    if order not in (0, 2):
        raise ValueError(f"order must be 0 or 2, got {order!r}")
    return int(order)


def check_hamiltonian(H) -> SmoothHamiltonian:
    if isinstance(H, PolySymbol):
        return SmoothHamiltonian.from_polysymbol(H)
    if isinstance(H, SmoothHamiltonian):
        return H
    if callable(H):
        return SmoothHamiltonian(value=H)
    raise TypeError(f"cannot interpret {type(H).__name__} as a Hamiltonian")


def _check_fitted(est, attr):
    if not hasattr(est, attr):
        raise NotFittedError(f"{type(est).__name__} is not fitted yet; call fit first")


class BohrSommerfeld(BaseEstimator):
    """Bohr-Sommerfeld eigenvalues, optionally with the ``hbar**2`` correction.

    Parameters
    ----------
    hbar : float
    order : {0, 2}
    energy_ceiling : float, optional
        Levels whose orbit would reach this energy are skipped.
    guess : tuple
        Starting point for the fixed-point search.

    Examples
    --------
    >>> from bohrsommerfeld import PolySymbol
    >>> est = BohrSommerfeld(hbar=1.0).fit(PolySymbol.action())
    >>> [round(float(e), 12) for e in est.predict([0, 1, 2])]
    [0.5, 1.5, 2.5]
    """

    def __init__(self, hbar=1.0, order=2, energy_ceiling=None, guess=(0.0, 0.0)):
        self.hbar = hbar
        self.order = order
        self.energy_ceiling = energy_ceiling
        self.guess = guess

    def fit(self, H, y=None):
        check_hbar(self.hbar)
        check_order(self.order)
        self.hamiltonian_ = check_hamiltonian(H)
        self.fixed_point_ = find_fixed_point(self.hamiltonian_, self.guess)
        prepare(self.hamiltonian_, self.fixed_point_)
        return self

    def spectrum(self, n):
        _check_fitted(self, "fixed_point_")
        return bs_spectrum(self.hamiltonian_, self.fixed_point_, check_levels(n),
                           check_hbar(self.hbar), check_order(self.order), self.energy_ceiling)

    def predict(self, n) -> np.ndarray:
        """Energies for the given quantum numbers; NaN where a level is outside the window."""
        n = check_levels(n)
        res = self.spectrum(n)
        by_n = {lv.n: (lv.E2 if res.order == 2 else lv.E0) for lv in res.levels}
        return np.array([by_n.get(int(k), np.nan) for k in n])


class BirkhoffNormalForm(BaseEstimator):
    """Classical normal form ``f0(A) = a1 A + a2 A**2 + ...`` of a polynomial symbol."""

    def __init__(self, order=2, known_degree=None):
        self.order = order
        self.known_degree = known_degree

    def fit(self, P, y=None):
        if not isinstance(P, PolySymbol):
            raise TypeError("the normal form needs a PolySymbol")
        self.series_ = birkhoff_series(P, int(self.order), self.known_degree)
        self.coefficients_ = self.series_.coefficients
        return self

    def predict(self, A) -> np.ndarray:
        _check_fitted(self, "series_")
        A = np.asarray(A, dtype=float)
        if np.any(A < 0):
            raise ValueError("actions must be non-negative")
        return np.asarray(self.series_(A))


class _OracleBase(BaseEstimator):
    def predict(self, n) -> np.ndarray:
        _check_fitted(self, "spectrum_")
        n = check_levels(n)
        if n.size and n.max() >= len(self.spectrum_.eigenvalues):
            raise ValueError(f"only {len(self.spectrum_.eigenvalues)} levels were converged")
        return self.spectrum_.eigenvalues[n]


class GridOracle(_OracleBase):
    """Fourier-grid reference spectrum of ``p**2/2m + V(x)``; ``fit`` takes ``V``."""

    def __init__(self, hbar=1.0, mass=1.0, k_levels=10, tol=1e-10, domain=None, N=None):
        self.hbar = hbar
        self.mass = mass
        self.k_levels = k_levels
        self.tol = tol
        self.domain = domain
        self.N = N

    def fit(self, V: Callable, y=None):
        if not callable(V):
            raise TypeError("the grid oracle needs a potential V(x)")
        self.spectrum_ = grid_spectrum(V, float(self.mass), check_hbar(self.hbar), self.domain,
                                       self.N, int(self.k_levels), float(self.tol))
        return self


class FockOracle(_OracleBase):
    """Weyl quantization of a polynomial symbol in the oscillator basis; ``fit`` takes the symbol."""

    def __init__(self, hbar=1.0, k_levels=10, tol=1e-10, N=None):
        self.hbar = hbar
        self.k_levels = k_levels
        self.tol = tol
        self.N = N

    def fit(self, P: PolySymbol, y=None):
        if not isinstance(P, PolySymbol):
            raise TypeError("the Fock oracle needs a PolySymbol")
        self.spectrum_ = fock_spectrum(P, check_hbar(self.hbar), self.N, int(self.k_levels),
                                       float(self.tol))
        return self
