"""Comparison of Bohr-Sommerfeld levels against oracle spectra."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .oracle import OracleSpectrum
from .spectrum import SpectrumResult

__all__ = ["LevelComparison", "Comparison", "compare", "fit_slope", "levels_around",
           "ScalingStudy", "scaling_study", "comparisons_csv", "comparisons_json"]

NOISE_FLOOR = 1e-9


@dataclass(frozen=True)
class LevelComparison:
    n: int
    action: float
    E0: float
    E2: float
    E_oracle: float
    oracle_err: float
    bs_err: float

    @property
    def residual0(self) -> float:
        return self.E0 - self.E_oracle

    @property
    def residual2(self) -> float:
        return self.E2 - self.E_oracle

    @property
    def floor(self) -> float:
        return NOISE_FLOOR + self.oracle_err + self.bs_err

    @property
    def improved(self) -> bool:
        """``|E2 - E_oracle| < |E0 - E_oracle|``, or both at the noise floor."""
        r0, r2 = abs(self.residual0), abs(self.residual2)
        return r2 < r0 or (r2 <= self.floor and r0 <= self.floor)


@dataclass(frozen=True)
class Comparison:
    hbar: float
    levels: Tuple[LevelComparison, ...]

    @property
    def improved(self) -> bool:
        return all(lv.improved for lv in self.levels)

    def rows(self):
        for lv in self.levels:
            yield (lv.n, lv.action, lv.E0, lv.E2, lv.E_oracle, lv.oracle_err,
                   abs(lv.residual0), abs(lv.residual2), lv.floor)


CSV_HEADER = ["hbar", "n", "A", "E0", "E2", "E_oracle", "oracle_err", "res0", "res2", "res_err"]


def compare(result: SpectrumResult, oracle: OracleSpectrum) -> Comparison:
    """Join levels by quantum number; levels the oracle did not converge are dropped."""
    out = []
    for lv in result.levels:
        if lv.n >= len(oracle.eigenvalues):
            continue
        E, err = float(oracle.eigenvalues[lv.n]), float(oracle.convergence[lv.n])
        out.append(LevelComparison(lv.n, lv.action, lv.E0, lv.E2, E, err, lv.err_est))
    return Comparison(result.hbar, tuple(out))


def fit_slope(hbars: Sequence[float], residuals: Sequence[float]) -> float:
    """Least-squares slope of ``log|r|`` against ``log hbar``."""
    h = np.log(np.asarray(hbars, dtype=float))
    r = np.log(np.abs(np.asarray(residuals, dtype=float)))
    return float(np.polyfit(h, r, 1)[0])


def levels_around(action: float, hbar: float, count: int = 4) -> List[int]:
    """``count`` consecutive quantum numbers whose actions bracket ``action``."""
    centre = action / hbar - 0.5
    lo = int(math.floor(centre)) - (count // 2 - 1)
    lo = max(lo, 0)
    return list(range(lo, lo + count))


def _interpolate(xs: Sequence[float], ys: Sequence[float], x: float) -> float:
    # Lagrange through all points (few, well spaced)
    total = 0.0
    for i, (xi, yi) in enumerate(zip(xs, ys)):
        w = 1.0
        for j, xj in enumerate(xs):
            if j != i:
                w *= (x - xj) / (xi - xj)
        total += w * yi
    return total


@dataclass(frozen=True)
class ScalingStudy:
    """Residuals interpolated to a fixed action, with fitted log-log slopes."""

    action: float
    hbars: Tuple[float, ...]
    residual0: Tuple[float, ...]
    residual2: Tuple[float, ...]
    comparisons: Tuple[Comparison, ...]
    slope0: float = float("nan")
    slope2: float = float("nan")
    slope0_range: Tuple[float, float] = (1.5, 2.5)
    slope2_range: Tuple[float, float] = (3.5, 4.5)
    at_floor: bool = False

    @property
    def improved(self) -> bool:
        return all(c.improved for c in self.comparisons)

    @property
    def slopes_ok(self) -> bool:
        if self.at_floor:
            return True
        lo0, hi0 = self.slope0_range
        lo2, hi2 = self.slope2_range
        return lo0 <= self.slope0 <= hi0 and lo2 <= self.slope2 <= hi2

    @property
    def ok(self) -> bool:
        return self.improved and self.slopes_ok

    def lines(self) -> List[str]:
        out = [f"fixed action A = {self.action}"]
        for h, r0, r2 in zip(self.hbars, self.residual0, self.residual2):
            out.append(f"  hbar = {h:<8g} |E0 - E_oracle| = {abs(r0):.6e}  |E2 - E_oracle| = {abs(r2):.6e}")
        if self.at_floor:
            out.append("  slopes: n/a (residuals at the noise floor)")
        else:
            out.append(f"  slope order 0 = {self.slope0:.4f} (gate {self.slope0_range})")
            out.append(f"  slope order 2 = {self.slope2:.4f} (gate {self.slope2_range})")
        out.append(f"  E2 closer than E0 at every level: {self.improved}")
        return out

    def to_dict(self) -> dict:
        return {
            "action": self.action,
            "hbar": list(self.hbars),
            "residual0": list(self.residual0),
            "residual2": list(self.residual2),
            "slope0": None if math.isnan(self.slope0) else self.slope0,
            "slope2": None if math.isnan(self.slope2) else self.slope2,
            "slope0_gate": list(self.slope0_range),
            "slope2_gate": list(self.slope2_range),
            "at_noise_floor": self.at_floor,
            "improved_every_level": self.improved,
            "ok": self.ok,
        }


def scaling_study(comparisons: Sequence[Comparison], action: float = 1.0) -> ScalingStudy:
    """Interpolate signed residuals of each ``hbar`` to ``action`` and fit slopes."""
    hbars, r0s, r2s = [], [], []
    floor = 0.0
    for c in comparisons:
        A = [lv.action for lv in c.levels]
        if len(A) < 2:
            raise ValueError(f"need at least two levels at hbar = {c.hbar}")
        hbars.append(c.hbar)
        r0s.append(_interpolate(A, [lv.residual0 for lv in c.levels], action))
        r2s.append(_interpolate(A, [lv.residual2 for lv in c.levels], action))
        floor = max(floor, max(lv.floor for lv in c.levels))
    at_floor = max(abs(v) for v in r2s) <= floor and max(abs(v) for v in r0s) <= floor
    s0 = s2 = float("nan")
    if len(hbars) >= 2 and not at_floor:
        s0 = fit_slope(hbars, r0s)
        s2 = fit_slope(hbars, r2s)
    return ScalingStudy(float(action), tuple(hbars), tuple(r0s), tuple(r2s), tuple(comparisons),
                        s0, s2, at_floor=at_floor)


def comparisons_csv(comparisons: Sequence[Comparison]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for c in comparisons:
        for row in c.rows():
            w.writerow([repr(float(c.hbar)), row[0]] + [repr(float(v)) for v in row[1:]])
    return buf.getvalue()


def comparisons_json(comparisons: Sequence[Comparison], study: Optional[ScalingStudy]) -> str:
    doc = {
        "levels": [dict(zip(CSV_HEADER, [c.hbar, *row])) for c in comparisons for row in c.rows()],
        "scaling": None if study is None else study.to_dict(),
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
