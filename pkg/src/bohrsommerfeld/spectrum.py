"""Bohr-Sommerfeld eigenvalues with the ``hbar**2`` correction.

For a symbol ``H = H0 + hbar**2 H2 + ...`` with an elliptic minimum::

    E_n = f0(A) + hbar**2 <H2>(A) + hbar**2/48 * d/dA [ <{H0, H0}_2>(A) / omega(A) ]

at ``A = (n + 1/2) hbar``, where ``f0`` inverts the classical action of
``H0``, ``omega = f0'`` and ``<.>`` is the average over the orbit of action
``A``.  The quantity in brackets is the correction profile ``c(A)``; its
derivative is taken by central differences with one Richardson level; a
second level only feeds the error estimate.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .dynamics import (Classification, FixedPointReport, Orbit, SmoothHamiltonian,
                       find_fixed_point, nongeneric_message, solve_action, trace_orbit,
                       window_action)
from .exceptions import NonElliptic, NonGeneric, OutOfWindow
from .polysym import PolySymbol

__all__ = [
    "LevelResult",
    "SpectrumResult",
    "correction_profile",
    "bs_eigenvalue",
    "bs_spectrum",
    "prepare",
]

Hamiltonian = Union[SmoothHamiltonian, PolySymbol]


def _as_smooth(H: Hamiltonian) -> SmoothHamiltonian:
    if isinstance(H, PolySymbol):
        return SmoothHamiltonian.from_polysymbol(H)
    return H


def _quantizable(H: SmoothHamiltonian, fp: FixedPointReport) -> bool:
    # a degenerate minimum is still fine when the symbol is a function of I
    if fp.classification is Classification.GENERIC_MINIMUM:
        return True
    if fp.classification is not Classification.NON_GENERIC or H.symbol is None:
        return False
    if fp.location != (0.0, 0.0) and max(abs(v) for v in fp.location) > 1e-6:
        return False
    coeffs = H.symbol.action_polynomial()
    return coeffs is not None and any(c > 0 for c in coeffs[1:]) and all(
        c >= 0 for c in coeffs[1:])


def prepare(H: Hamiltonian, fp: Optional[FixedPointReport] = None,
            guess: Sequence[float] = (0.0, 0.0)) -> Tuple[SmoothHamiltonian, FixedPointReport, int]:
    """Resolve the fixed point and orient ``H`` so it sits at a minimum.

    Returns ``(H', fp', sign)`` with ``H = sign * H'``.  A maximum is
    handled by quantizing ``-H`` and negating the eigenvalues.

    Raises
    ------
    NonGeneric
        Singular Hessian (unless ``H`` is an exact polynomial in the action
        ``I`` with a minimum at the origin).
    NonElliptic
        Saddle point.
    """
    H = _as_smooth(H)
    if fp is None:
        fp = find_fixed_point(H, guess)
    sign = 1
    if fp.classification is Classification.GENERIC_MAXIMUM:
        H, fp, sign = H.negated(), fp.negated(), -1
    elif fp.classification is Classification.SADDLE:
        raise NonElliptic(f"fixed point at {fp.location} is a saddle; there are no closed "
                          "orbits around it to quantize")
    if not _quantizable(H, fp):
        raise NonGeneric(nongeneric_message(fp))
    return H, fp, sign


def _profile_on(H: SmoothHamiltonian, orbit: Orbit) -> float:
    h = H.hess_on(orbit.x, orbit.p)
    bracket = 2.0 * (h[:, 0, 0] * h[:, 1, 1] - h[:, 0, 1] * h[:, 1, 0])
    return float(np.mean(bracket)) / orbit.frequency


def correction_profile(H: Hamiltonian, fp: FixedPointReport, A: float,
                       energy_ceiling: float | None = None) -> float:
    """``c(A) = <{H, H}_2> / omega`` on the orbit of action ``A`` (principal symbol)."""
    H = _as_smooth(H)
    return _profile_on(H, solve_action(H, fp, A, energy_ceiling))


@dataclass(frozen=True)
class LevelResult:
    n: int
    action: float
    E0: float
    E2: float
    correction: float
    err_est: float
    step: float = 0.0
    action_residual: float = 0.0
    energy_drift: float = 0.0
    period: float = 0.0

    @property
    def energy(self) -> float:
        return self.E2


@dataclass(frozen=True)
class SpectrumResult:
    hbar: float
    order: int
    name: str
    levels: Tuple[LevelResult, ...]
    skipped: Tuple[Tuple[int, str], ...] = ()
    fixed_point_energy: float = 0.0
    energy_ceiling: Optional[float] = None
    classification: str = Classification.GENERIC_MINIMUM.value
    negated: bool = False

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([lv.E2 if self.order == 2 else lv.E0 for lv in self.levels])

    def level(self, n: int) -> LevelResult:
        for lv in self.levels:
            if lv.n == n:
                return lv
        raise KeyError(n)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "A", "E0", "E2", "corr", "err_est"])
        for lv in self.levels:
            w.writerow([lv.n] + [repr(float(v)) for v in
                                 (lv.action, lv.E0, lv.E2, lv.correction, lv.err_est)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "hamiltonian": self.name,
            "hbar": self.hbar,
            "order": self.order,
            "classification": self.classification,
            "negated": self.negated,
            "window": {"fixed_point_energy": self.fixed_point_energy,
                       "energy_ceiling": self.energy_ceiling},
            "levels": [asdict(lv) for lv in self.levels],
            "skipped": [{"n": n, "reason": r} for n, r in self.skipped],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _level(H: SmoothHamiltonian, fp: FixedPointReport, n: int, hbar: float, order: int,
           ceiling: float | None) -> LevelResult:
    A = (n + 0.5) * hbar
    orbit = solve_action(H, fp, A, ceiling)
    E0 = orbit.energy
    if H.corrections:
        E0 += float(np.mean(H.correction_on(orbit.x, orbit.p, hbar)))
    resid = abs(orbit.action - A)
    err = orbit.frequency * resid
    if order == 0:
        return LevelResult(n, A, E0, E0, 0.0, err, 0.0, resid, orbit.energy_drift, orbit.period)

    # c(A) differenced in energy at fixed dA: dc/dA = omega dc/dE
    dA = max(1e-4, 1e-3 * A)
    dA = min(dA, 0.2 * A)
    if ceiling is not None:
        room = window_action(H, fp, ceiling) - A
        dA = min(dA, 0.2 * room)
    omega = orbit.frequency
    dE = omega * dA
    c = {}
    for k in (-4, -2, -1, 1, 2, 4):
        c[k] = _profile_on(H, trace_orbit(H, orbit.energy + k * dE, fp))
    d1 = (c[1] - c[-1]) / (2 * dE)
    d2 = (c[2] - c[-2]) / (4 * dE)
    d4 = (c[4] - c[-4]) / (8 * dE)
    r1 = (4 * d1 - d2) / 3
    r2 = (4 * d2 - d4) / 3
    dcdA = omega * r1
    corr = hbar * hbar / 48.0 * dcdA
    # extrapolation error from the next Richardson level, plus orbit noise
    noise = 1e-12 * max(abs(v) for v in c.values()) / dE
    err += hbar * hbar / 48.0 * omega * (abs(r1 - r2) / 15 + noise)
    return LevelResult(n, A, E0, E0 + corr, corr, err, dA, resid, orbit.energy_drift,
                       orbit.period)


def _check_order(H: SmoothHamiltonian, order: int):
    if order not in (0, 2):
        raise ValueError("order must be 0 or 2")
    if order == 2 and any(k == 1 for k, _ in H.corrections):
        raise ValueError("a symbol with an hbar**1 term needs second-order perturbation "
                         "theory in that term, which is not implemented")


def bs_eigenvalue(H: Hamiltonian, fp: Optional[FixedPointReport], n: int, hbar: float,
                  order: int = 2, energy_ceiling: float | None = None) -> float:
    """Bohr-Sommerfeld eigenvalue of level ``n`` at leading order or with the ``hbar**2`` term."""
    return bs_spectrum(H, fp, [n], hbar, order, energy_ceiling, strict=True).eigenvalues[0]


def bs_spectrum(H: Hamiltonian, fp: Optional[FixedPointReport], n_range: Iterable[int],
                hbar: float, order: int = 2, energy_ceiling: float | None = None,
                strict: bool = False, name: str | None = None) -> SpectrumResult:
    """Levels ``n`` in ``n_range``; those outside the window are listed as skipped.

    ``strict`` re-raises :class:`OutOfWindow` instead of skipping.
    """
    if not hbar > 0:
        raise ValueError("hbar must be positive")
    Hs, fpm, sign = prepare(H, fp)
    _check_order(Hs, order)
    ceiling = None
    if energy_ceiling is not None:
        ceiling = sign * energy_ceiling
    levels: List[LevelResult] = []
    skipped: List[Tuple[int, str]] = []
    for n in sorted(set(int(v) for v in n_range)):
        if n < 0:
            raise ValueError("quantum numbers are non-negative")
        try:
            lv = _level(Hs, fpm, n, hbar, order, ceiling)
        except OutOfWindow as exc:
            if strict:
                raise
            skipped.append((n, str(exc)))
            continue
        if sign < 0:
            lv = LevelResult(lv.n, lv.action, -lv.E0, -lv.E2, -lv.correction, lv.err_est,
                             lv.step, lv.action_residual, lv.energy_drift, lv.period)
        levels.append(lv)
    return SpectrumResult(
        hbar=float(hbar), order=order,
        name=name or (H.name if isinstance(H, SmoothHamiltonian) else "symbol"),
        levels=tuple(levels), skipped=tuple(skipped),
        fixed_point_energy=sign * fpm.energy, energy_ceiling=energy_ceiling,
        classification=(fpm.negated() if sign < 0 else fpm).classification.value,
        negated=sign < 0,
    )
