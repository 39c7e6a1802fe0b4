"""Exact algebraic identity checks for the Moyal brackets on random symbols.

Every check compares exact rational polynomials, so a pass means equality
with zero tolerance.  The bracket is injectable so the harness itself can
be tested against a deliberately broken implementation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from . import moyal
from .moyal import _series_factor
from .polysym import PolySymbol

__all__ = ["random_symbol", "IdentityFailure", "IdentityReport", "run_identity_suite",
           "IDENTITY_NAMES"]

Bracket = Callable[[PolySymbol, PolySymbol, int], PolySymbol]

IDENTITY_NAMES = (
    "star_associativity_hbar4",
    "bracket_antisymmetry_n5",
    "poisson_jacobi",
    "poisson_leibniz",
    "third_order_jacobi",
)


def random_symbol(rng: np.random.Generator, max_degree: int = 4, max_coeff: int = 5,
                  max_terms: int = 6) -> PolySymbol:
    """Random integer-coefficient polynomial in ``(x, p)`` of degree at most ``max_degree``."""
    monos = [(i, d - i) for d in range(max_degree + 1) for i in range(d + 1)]
    k = int(rng.integers(1, max_terms + 1))
    picks = rng.choice(len(monos), size=k, replace=False)
    terms = {}
    for idx in sorted(int(v) for v in picks):
        c = int(rng.integers(-max_coeff, max_coeff + 1))
        if c:
            terms[monos[idx]] = c
    return PolySymbol(terms)


def _star(A: PolySymbol, B: PolySymbol, bracket: Bracket, max_order: int) -> PolySymbol:
    if bracket is moyal.moyal_bracket:
        return moyal.star(A, B, max_order)
    out = PolySymbol.zero()
    for n in range(max_order + 1):
        # hbar-free inputs only at the inner level; shift the whole bracket
        for ka in range(A.hbar_order + 1):
            for kb in range(B.hbar_order + 1):
                if n + ka + kb > max_order:
                    continue
                term = bracket(A.hbar_part(ka), B.hbar_part(kb), n)
                out = out + term.scale(_series_factor(n)).shift_hbar(n + ka + kb)
    return out


@dataclass(frozen=True)
class IdentityFailure:
    identity: str
    index: int
    symbols: Tuple[str, ...]
    detail: str = ""

    def describe(self) -> str:
        names = "ABC"
        lines = [f"{self.identity} failed on triple #{self.index}" +
                 (f" ({self.detail})" if self.detail else "")]
        for name, s in zip(names, self.symbols):
            lines.append(f"  {name} = {s}")
        return "\n".join(lines)


@dataclass
class IdentityReport:
    seed: int
    count: int
    passed: dict = field(default_factory=lambda: {k: 0 for k in IDENTITY_NAMES})
    failed: dict = field(default_factory=lambda: {k: 0 for k in IDENTITY_NAMES})
    first_failure: Optional[IdentityFailure] = None

    @property
    def ok(self) -> bool:
        return not any(self.failed.values())

    def lines(self) -> List[str]:
        out = [f"identity suite: seed={self.seed} count={self.count}"]
        for name in IDENTITY_NAMES:
            status = "PASS" if self.failed[name] == 0 else "FAIL"
            out.append(f"{status} {name}: {self.passed[name]} passed, {self.failed[name]} failed")
        if self.first_failure is not None:
            out.append(self.first_failure.describe())
        return out

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "count": self.count,
            "passed": dict(self.passed),
            "failed": dict(self.failed),
            "first_failure": None if self.first_failure is None else {
                "identity": self.first_failure.identity,
                "index": self.first_failure.index,
                "symbols": list(self.first_failure.symbols),
                "detail": self.first_failure.detail,
            },
        }


def _checks(A, B, C, bracket: Bracket):
    # yields (identity, ok, detail)
    left = _star(_star(A, B, bracket, 4), C, bracket, 4)
    right = _star(A, _star(B, C, bracket, 4), bracket, 4)
    yield IDENTITY_NAMES[0], left == right, ""

    bad = [n for n in range(6) if bracket(A, B, n) != bracket(B, A, n) * (-1) ** n]
    yield IDENTITY_NAMES[1], not bad, f"n = {bad[0]}" if bad else ""

    def pb(F, G):
        return bracket(F, G, 1)

    jac = pb(A, pb(B, C)) + pb(B, pb(C, A)) + pb(C, pb(A, B))
    yield IDENTITY_NAMES[2], not jac, ""

    leib = pb(A, B * C) - pb(A, B) * C - B * pb(A, C)
    yield IDENTITY_NAMES[3], not leib, ""

    def second(F, G, H):
        return bracket(F, bracket(G, H, 3), 1) + bracket(F, bracket(G, H, 1), 3)

    tot = second(A, B, C) + second(B, C, A) + second(C, A, B)
    yield IDENTITY_NAMES[4], not tot, ""


def run_identity_suite(seed: int = 0, count: int = 100, bracket: Bracket | None = None,
                       max_degree: int = 4) -> IdentityReport:
    """Check every identity on ``count`` seeded random triples ``(A, B, C)``.

    ``count = 0`` is a vacuous pass.  Only the first failing triple is kept
    in the report.
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    bracket = bracket or moyal.moyal_bracket
    rng = np.random.default_rng(seed)
    report = IdentityReport(seed=seed, count=count)
    for index in range(count):
        A, B, C = (random_symbol(rng, max_degree) for _ in range(3))
        for name, ok, detail in _checks(A, B, C, bracket):
            if ok:
                report.passed[name] += 1
            else:
                report.failed[name] += 1
                if report.first_failure is None:
                    report.first_failure = IdentityFailure(
                        name, index, tuple(repr(s) for s in (A, B, C)), detail)
    return report
