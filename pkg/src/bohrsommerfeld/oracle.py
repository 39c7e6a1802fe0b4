"""Reference quantum spectra from two independent matrix quantizations.

``grid_spectrum`` discretizes ``p**2/2m + V(x)`` on a periodic Fourier grid
(exact kinetic operator on band-limited functions, diagonal potential).
``fock_spectrum`` Weyl-quantizes a polynomial symbol in a truncated
harmonic-oscillator basis.  Both refine their resolution by doubling until
the lowest levels stop moving.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import eigen
from .exceptions import OracleDiverged, Unbounded
from .polysym import GaussianRational, PolySymbol

__all__ = ["OracleSpectrum", "grid_spectrum", "fock_spectrum", "auto_domain", "weyl_matrix"]

MAX_DOUBLINGS = 4
AIRY_MARGIN = 12.0


@dataclass(frozen=True)
class OracleSpectrum:
    """Converged eigenvalues with the change seen under the last doubling."""

    eigenvalues: np.ndarray
    method: str
    resolution: Dict[str, object]
    convergence: np.ndarray
    residual: float = 0.0
    history: Tuple[Tuple[int, float], ...] = field(default=())

    def __len__(self):
        return len(self.eigenvalues)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "E", "err_est"])
        for n, (E, err) in enumerate(zip(self.eigenvalues, self.convergence)):
            w.writerow([n, repr(float(E)), repr(float(err))])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "resolution": self.resolution,
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "err_est": [float(v) for v in self.convergence],
            "residual": self.residual,
            "history": [{"size": n, "change": c} for n, c in self.history],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _residual(M: np.ndarray, k: int) -> float:
    # relative eigenpair residual of the lowest k pairs
    w, V = eigen.eigh(M)
    R = M @ V[:, :k] - V[:, :k] * w[:k]
    return float(np.abs(R).max()) / max(float(np.abs(M).max()), 1e-300)


# --- Fourier grid -------------------------------------------------------------

def _kinetic_column(n: int, dx: float, mass: float, hbar: float) -> np.ndarray:
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=dx)
    return np.real(np.fft.ifft(hbar * hbar * k * k / (2.0 * mass)))


def grid_hamiltonian(V: Callable, mass: float, hbar: float, domain: Tuple[float, float],
                     n: int) -> np.ndarray:
    a, b = domain
    dx = (b - a) / n
    x = a + dx * np.arange(n)
    col = _kinetic_column(n, dx, mass, hbar)
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    M = col[idx]
    M[np.diag_indices(n)] += np.asarray([V(v) for v in x], dtype=float)
    return M


def auto_domain(V: Callable, E_max: float, mass: float, hbar: float,
                center: float = 0.0) -> Tuple[Tuple[float, float], int]:
    """Interval covering the classically allowed region at ``E_max`` plus tails.

    The turning points are widened by 12 Airy lengths
    ``(hbar**2 / (2 m |V'|))**(1/3)``, where the wave function has decayed
    by about ``exp(-28)``.  The returned grid size gives about six points
    per local de Broglie wavelength at ``E_max``, rounded up to a power of two.
    """
    def turning(direction):
        step = 0.1
        x0 = center
        for _ in range(200):
            x1 = x0 + direction * step
            if V(x1) >= E_max:
                return brentq(lambda t: V(t) - E_max, min(x0, x1), max(x0, x1), xtol=1e-14)
            x0 = x1
            step *= 1.3
        raise Unbounded(f"potential stays below {E_max} on the {'right' if direction > 0 else 'left'}")

    edges = []
    for direction in (-1.0, 1.0):
        xt = turning(direction)
        h = 1e-5 * max(1.0, abs(xt))
        slope = abs(V(xt + h) - V(xt - h)) / (2 * h)
        airy = (hbar * hbar / (2.0 * mass * max(slope, 1e-12))) ** (1.0 / 3.0)
        edges.append(xt + direction * AIRY_MARGIN * airy)
    vmin = float(V(center))
    pmax = math.sqrt(2.0 * mass * max(E_max - vmin, 1e-12))
    length = edges[1] - edges[0]
    dx = 2.0 * math.pi * hbar / pmax / 6.0
    n = 32
    while n * dx < length:
        n *= 2
    return (edges[0], edges[1]), n


def _potential_minimum(V: Callable, center: float) -> Tuple[float, float]:
    with np.errstate(over="ignore", invalid="ignore"):
        try:
            res = minimize_scalar(V, bracket=(center - 0.5, center + 0.5), tol=1e-12)
        except RuntimeError as exc:
            raise Unbounded(f"no potential minimum found near x = {center}: {exc}") from None
    if not (np.isfinite(res.x) and np.isfinite(res.fun)):
        raise Unbounded(f"potential has no minimum near x = {center}")
    return float(res.x), float(res.fun)


def grid_spectrum(V: Callable, mass: float = 1.0, hbar: float = 1.0,
                  domain: Optional[Tuple[float, float]] = None, N: Optional[int] = None,
                  k_levels: int = 10, tol: float = 1e-10, center: float = 0.0,
                  check_residual: bool = False) -> OracleSpectrum:
    """Lowest ``k_levels`` eigenvalues of ``p**2/2m + V(x)`` on a Fourier grid.

    Without ``domain``/``N`` both are chosen by :func:`auto_domain` from an
    estimate of the top level, refined once from the computed spectrum.
    Each refinement doubles ``N`` and widens the domain by ``sqrt(2)``
    about its midpoint, so the grid spacing also shrinks.

    Raises
    ------
    OracleDiverged
        The levels still move by more than ``tol`` after four doublings.
    """
    if N is not None and (N < 4 or N & (N - 1)):
        raise ValueError("N must be a power of two")
    if domain is None or N is None:
        x0, v0 = _potential_minimum(V, center)
        h = 1e-4
        curv = max((V(x0 + h) - 2 * v0 + V(x0 - h)) / (h * h), 1e-12)
        omega = math.sqrt(curv / mass)
        E_top = v0 + 1.5 * (k_levels + 1) * hbar * omega
        dom, n0 = auto_domain(V, E_top, mass, hbar, x0)
        if domain is None:
            domain = dom
        if N is None:
            N = n0
    if k_levels > N // 2:
        raise ValueError("k_levels too large for the grid size")
    a, b = domain
    prev = None
    history = []
    for level in range(MAX_DOUBLINGS + 1):
        M = grid_hamiltonian(V, mass, hbar, (a, b), N)
        vals = eigen.eigvalsh(M)[:k_levels]
        if prev is not None:
            change = np.abs(vals - prev)
            history.append((N, float(change.max())))
            if change.max() < tol:
                resid = _residual(M, k_levels) if check_residual else 0.0
                return OracleSpectrum(vals, "grid",
                                      {"N": N, "domain": [float(a), float(b)],
                                       "mass": mass, "hbar": hbar},
                                      change, resid, tuple(history))
        prev = vals
        if level == MAX_DOUBLINGS:
            break
        mid, half = 0.5 * (a + b), 0.5 * (b - a) * math.sqrt(2.0)
        a, b = mid - half, mid + half
        N *= 2
    raise OracleDiverged(f"grid levels still changing by {history[-1][1]:.3g} "
                         f"after {MAX_DOUBLINGS} doublings (tol {tol:g})")


# --- Fock basis ---------------------------------------------------------------

def _ladder(size: int, hbar: float) -> Tuple[np.ndarray, np.ndarray]:
    # x = sqrt(hbar/2)(a + a^+), p = i sqrt(hbar/2)(a^+ - a); p stored as p / i
    off = np.sqrt(np.arange(1, size) * hbar / 2.0)
    X = np.diag(off, 1) + np.diag(off, -1)
    Pim = np.diag(off, -1) - np.diag(off, 1)
    return X, Pim


def _check_bounded(P: PolySymbol):
    P0 = P.principal()
    d = P0.degree
    if d <= 0:
        raise Unbounded("a constant symbol has no discrete spectrum")
    if d % 2:
        raise Unbounded(f"top-degree part of degree {d} is odd, so the symbol is unbounded")
    top = P0.homogeneous_part(d)
    th = np.linspace(0.0, 2.0 * np.pi, 721)
    vals = np.array([top.eval_real(math.cos(t), math.sin(t)) for t in th])
    if vals.min() < -1e-12 * max(1.0, np.abs(vals).max()):
        raise Unbounded("top-degree part takes negative values, so the symbol is unbounded below")


def weyl_matrix(P: PolySymbol, hbar: float, N: int) -> np.ndarray:
    """Weyl quantization of ``P`` in the lowest ``N`` oscillator states.

    Returns a real symmetric matrix: the Hermitian operator ``R + i K`` is
    embedded as ``[[R, -K], [K, R]]`` when ``K`` is nonzero, which doubles
    every eigenvalue.  The working basis has ``N + deg P`` states, so the
    kept ``N x N`` block holds exact matrix elements.
    """
    deg = max(P.degree, 0)
    size = N + deg
    X, Pim = _ladder(size, hbar)
    xpow = [np.eye(size)]
    ppow = [np.eye(size)]
    for _ in range(deg):
        xpow.append(xpow[-1] @ X)
        ppow.append(ppow[-1] @ Pim)
    re = np.zeros((size, size))
    im = np.zeros((size, size))
    for (a, b, k), c in P.items():
        if isinstance(c, GaussianRational):
            raise ValueError("symbol must be real for a Hermitian quantization")
        coef = float(c) * hbar ** k
        # McCoy: (1/2**a) sum_j C(a, j) x**j p**b x**(a - j), with p**b = i**b (p/i)**b
        acc = np.zeros((size, size))
        for j in range(a + 1):
            acc += math.comb(a, j) * (xpow[j] @ ppow[b] @ xpow[a - j])
        acc *= coef / 2 ** a
        phase = b % 4
        if phase == 0:
            re += acc
        elif phase == 1:
            im += acc
        elif phase == 2:
            re -= acc
        else:
            im -= acc
    re, im = re[:N, :N], im[:N, :N]
    re = 0.5 * (re + re.T)
    im = 0.5 * (im - im.T)
    if not np.any(im):
        return re
    return np.block([[re, -im], [im, re]])


def _fock_levels(P: PolySymbol, hbar: float, N: int, k: int) -> Tuple[np.ndarray, np.ndarray]:
    M = weyl_matrix(P, hbar, N)
    vals = eigen.eigvalsh(M)
    if M.shape[0] != N:
        vals = vals[::2]
    return vals[:k], M


def fock_spectrum(P: PolySymbol, hbar: float = 1.0, N: Optional[int] = None, k_levels: int = 10,
                  tol: float = 1e-10, check_residual: bool = False) -> OracleSpectrum:
    """Lowest ``k_levels`` eigenvalues of the Weyl quantization of ``P``.

    ``N`` starts at the smallest power of two keeping the reported levels
    in the lower 80% of the basis and doubles until they change by less
    than ``tol``.

    Raises
    ------
    Unbounded
        Odd or negative top-degree part.
    OracleDiverged
        No convergence within four doublings.
    """
    _check_bounded(P)
    if N is None:
        N = 16
        while 0.8 * N < k_levels:
            N *= 2
    elif N < 1 or N & (N - 1):
        raise ValueError("N must be a power of two")
    if k_levels > 0.8 * N:
        raise ValueError("reported levels must stay out of the top 20% of the basis")
    prev = None
    history = []
    for level in range(MAX_DOUBLINGS + 1):
        vals, M = _fock_levels(P, hbar, N, k_levels)
        if prev is not None:
            change = np.abs(vals - prev)
            history.append((N, float(change.max())))
            if change.max() < tol:
                resid = _residual(M, k_levels) if check_residual else 0.0
                return OracleSpectrum(vals, "fock", {"N": N, "hbar": hbar}, change, resid,
                                      tuple(history))
        prev = vals
        if level == MAX_DOUBLINGS:
            break
        N *= 2
    raise OracleDiverged(f"Fock levels still changing by {history[-1][1]:.3g} "
                         f"after {MAX_DOUBLINGS} doublings (tol {tol:g})")
