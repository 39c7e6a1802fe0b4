"""Command line front end.

Verbs: ``spectrum``, ``compare``, ``identities``, ``normalform``.  Exit codes:
0 success, 1 error (or a failed gate), 2 some levels skipped, 3 oracle
divergence.  Output files are written atomically; the default output
directory comes from ``BOHRSOMMERFELD_OUT`` (else ``./bs_output``).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import replace
from typing import Callable, List, Optional, Sequence

from .analysis import (compare, comparisons_csv, comparisons_json, fit_slope, levels_around,
                       scaling_study)
from .catalog import Builtin, builtin_names
from .config import (ConfigError, JobConfig, load_config, parse_hbar, parse_levels,
                     resolve_hamiltonian)
from .dynamics import FixedPointReport, find_fixed_point, solve_action
from .exceptions import (BohrSommerfeldError, DegreeTooLow, NonElliptic, NonGeneric,
                         OracleDiverged, OutOfWindow)
from .identities import run_identity_suite
from .normalform import birkhoff_series
from .oracle import OracleSpectrum, fock_spectrum, grid_spectrum
from .spectrum import bs_spectrum

__all__ = ["main", "build_parser", "cmd_spectrum", "cmd_compare", "cmd_identities",
           "cmd_normalform", "EXIT_OK", "EXIT_ERROR", "EXIT_PARTIAL", "EXIT_ORACLE"]

EXIT_OK, EXIT_ERROR, EXIT_PARTIAL, EXIT_ORACLE = 0, 1, 2, 3
OUT_ENV = "BOHRSOMMERFELD_OUT"
_SEVERITY = {EXIT_OK: 0, EXIT_PARTIAL: 1, EXIT_ORACLE: 2, EXIT_ERROR: 3}


def _worst(codes) -> int:
    return max(codes, key=lambda c: _SEVERITY[c], default=EXIT_OK)


def write_atomic(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class _Context:
    def __init__(self, job: JobConfig, out_dir: str, stream):
        self.job = job
        self.out_dir = out_dir
        self.stream = stream
        self.written: List[str] = []

    def say(self, text: str = ""):
        print(text, file=self.stream)

    def emit(self, stem: str, csv_text: Optional[str], json_text: Optional[str]):
        for fmt, text in (("csv", csv_text), ("json", json_text)):
            if text is None or fmt not in self.job.formats:
                continue
            path = os.path.join(self.out_dir, f"{stem}.{fmt}")
            write_atomic(path, text)
            self.written.append(path)
            self.say(f"wrote {path}")


def _hbar_tag(h: float) -> str:
    return repr(float(h)).replace(".", "p")


def _fixed_point(b: Builtin) -> FixedPointReport:
    return find_fixed_point(b.hamiltonian, b.guess)


# --- spectrum -----------------------------------------------------------------

def cmd_spectrum(job: JobConfig, out_dir: str, stream=sys.stdout) -> int:
    ctx = _Context(job, out_dir, stream)
    b = resolve_hamiltonian(job)
    fp = _fixed_point(b)
    code = EXIT_OK
    for h in job.hbar:
        res = bs_spectrum(b.hamiltonian, fp, job.level_list, h, job.order, b.energy_ceiling,
                          name=b.name)
        stem = f"{job.name}_spectrum" + ("" if len(job.hbar) == 1 else f"_hbar{_hbar_tag(h)}")
        ctx.emit(stem, res.to_csv(), res.to_json())
        ctx.say(f"{b.name}: hbar={h:g} order={job.order} levels={len(res.levels)} "
                f"skipped={len(res.skipped)}")
        for n, reason in res.skipped:
            ctx.say(f"  skipped n={n}: {reason}")
        if res.skipped:
            code = EXIT_PARTIAL
    return code


# --- compare ------------------------------------------------------------------

def _oracle(b: Builtin, job: JobConfig, h: float, k: int, negated: bool) -> OracleSpectrum:
    kind = job.oracle
    if kind == "auto":
        kind = "grid" if (b.potential is not None and not negated) else "fock"
    if kind == "grid":
        if b.potential is None:
            raise ConfigError(f"job {job.name!r}, field 'oracle': grid oracle needs a "
                              "kinetic+potential Hamiltonian")
        if negated:
            raise ConfigError(f"job {job.name!r}, field 'oracle': grid oracle cannot "
                              "quantize a maximum; use fock")
        return grid_spectrum(b.potential, b.mass, h, k_levels=k, tol=job.tol)
    if b.symbol is None:
        raise ConfigError(f"job {job.name!r}, field 'oracle': Fock oracle needs a polynomial symbol")
    sym = -b.symbol if negated else b.symbol
    result = fock_spectrum(sym, h, k_levels=k, tol=job.tol)
    if negated:
        result = replace(result, eigenvalues=-result.eigenvalues)
    return result


def cmd_compare(job: JobConfig, out_dir: str, stream=sys.stdout) -> int:
    ctx = _Context(job, out_dir, stream)
    b = resolve_hamiltonian(job)
    fp = _fixed_point(b)
    action = job.action
    if action is None and len(job.hbar) >= 2 and job.levels is None:
        action = 1.0
    comparisons = []
    skipped = False
    for h in job.hbar:
        levels = levels_around(action, h) if action is not None else list(job.level_list)
        res = bs_spectrum(b.hamiltonian, fp, levels, h, 2, b.energy_ceiling, name=b.name)
        skipped |= bool(res.skipped)
        if not res.levels:
            continue
        k = max(lv.n for lv in res.levels) + 1
        oracle = _oracle(b, job, h, k, res.negated)
        c = compare(res, oracle)
        comparisons.append(c)
        ctx.say(f"{b.name}: hbar={h:g} oracle={oracle.method} N={oracle.resolution.get('N')}")
        for row in c.rows():
            n, A, E0, E2, Eo, oerr, r0, r2, rerr = row
            ctx.say(f"  n={n:<3d} E_oracle={Eo:.12f}  |E0-Eo|={r0:.3e}  |E2-Eo|={r2:.3e}  "
                    f"(err {rerr:.1e})")
    study = None
    if action is not None and len(comparisons) >= 2:
        study = scaling_study(comparisons, action)
        for line in study.lines():
            ctx.say(line)
    ctx.emit(f"{job.name}_compare", comparisons_csv(comparisons),
             comparisons_json(comparisons, study))
    improved = all(c.improved for c in comparisons)
    gates = improved and (study is None or study.ok)
    ctx.say(f"gates: {'PASS' if gates else 'FAIL'}")
    if not gates:
        return EXIT_ERROR
    return EXIT_PARTIAL if skipped else EXIT_OK


# --- identities ---------------------------------------------------------------

def cmd_identities(seed: int, count: int, out_dir: Optional[str] = None, stream=sys.stdout,
                   bracket: Optional[Callable] = None, formats=("json",)) -> int:
    report = run_identity_suite(seed, count, bracket)
    for line in report.lines():
        print(line, file=stream)
    if out_dir is not None and "json" in formats:
        path = os.path.join(out_dir, "identities.json")
        write_atomic(path, json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
        print(f"wrote {path}", file=stream)
    return EXIT_OK if report.ok else EXIT_ERROR


# --- normal form ----------------------------------------------------------------

NF_ACTIONS = (1e-2, 1e-3, 1e-4)


def cmd_normalform(job: JobConfig, out_dir: str, stream=sys.stdout) -> int:
    ctx = _Context(job, out_dir, stream)
    b = resolve_hamiltonian(job)
    if b.symbol is None:
        raise ConfigError(f"job {job.name!r}: the normal form needs a polynomial Hamiltonian")
    fp = _fixed_point(b)
    P = b.symbol.principal()
    x0, p0 = fp.location
    if abs(x0) > 1e-12 or abs(p0) > 1e-12:
        P = P.shift(round(x0, 12), round(p0, 12))
    P = P - P.coeff(0, 0)
    order = job.nf_order or max(1, P.degree // 2)
    series = birkhoff_series(P, order)
    ctx.say(f"{b.name}: Birkhoff normal form through order {order}")
    coeff_rows = []
    for k, a in enumerate(series.coefficients, start=1):
        ctx.say(f"  a{k} = {a} ({float(a):.16g})")
        coeff_rows.append({"k": k, "exact": str(a), "value": float(a), "err_est": 0.0})
    # cross-check against numerical inversion of A(E)
    table = []
    try:
        for A in NF_ACTIONS:
            orbit = solve_action(b.hamiltonian, fp, A)
            E = orbit.energy - fp.energy
            f0 = float(series(A))
            err = orbit.frequency * abs(orbit.action - A) + 1e-15 * max(abs(E), 1e-300)
            table.append({"A": A, "E_numeric": E, "f0": f0, "diff": abs(f0 - E), "err_est": err})
            ctx.say(f"  A={A:.0e}  E={E:.15e}  f0={f0:.15e}  |f0-E|={abs(f0 - E):.3e}")
    except (NonGeneric, OutOfWindow, BohrSommerfeldError) as exc:
        ctx.say(f"  numerical cross-check unavailable: {exc}")
    slope = None
    above = [r for r in table if r["diff"] > 10 * r["err_est"]]
    if len(above) >= 2:
        slope = fit_slope([r["A"] for r in above], [r["diff"] for r in above])
        ctx.say(f"  log-log slope of |f0 - E| = {slope:.3f} (expected about {order + 1})")
    doc = {"hamiltonian": b.name, "order": order, "coefficients": coeff_rows,
           "crosscheck": table, "slope": slope}
    buf = ["k,exact,value,err_est"] + [f"{r['k']},{r['exact']},{r['value']!r},{r['err_est']!r}"
                                       for r in coeff_rows]
    ctx.emit(f"{job.name}_normalform", "\n".join(buf) + "\n",
             json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


# --- argument handling ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bohrsommerfeld",
                                 description="Bohr-Sommerfeld spectra with the hbar**2 correction.")
    ap.add_argument("verb", choices=["spectrum", "compare", "identities", "normalform"])
    ap.add_argument("--config", help="TOML job file")
    ap.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./bs_output)")
    ap.add_argument("--hbar", help="value or comma-separated list")
    ap.add_argument("--levels", help="range such as 0..9, or a list 0,2,5")
    ap.add_argument("--order", type=int, choices=[0, 2])
    ap.add_argument("--seed", type=int)
    ap.add_argument("--count", type=int)
    ap.add_argument("--format", choices=["csv", "json"])
    ap.add_argument("--builtin", choices=builtin_names())
    ap.add_argument("--symbol", help="polynomial symbol in x, p, hbar, I")
    ap.add_argument("--potential", help="potential V(x) for p**2/2m + V")
    ap.add_argument("--mass")
    ap.add_argument("--ceiling", type=float, help="energy ceiling of the working window")
    ap.add_argument("--oracle", choices=["auto", "grid", "fock"])
    ap.add_argument("--action", type=float, help="fixed action for the scaling study")
    ap.add_argument("--nf-order", type=int, help="normal-form order")
    return ap


def _jobs_from_args(args) -> List[JobConfig]:
    jobs = load_config(args.config) if args.config else [JobConfig()]
    overrides = {}
    if args.hbar is not None:
        overrides["hbar"] = parse_hbar(args.hbar)
    if args.levels is not None:
        overrides["levels"] = parse_levels(args.levels)
    if args.order is not None:
        overrides["order"] = args.order
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.count is not None:
        if args.count < 0:
            raise ConfigError("--count must be non-negative")
        overrides["count"] = args.count
    if args.format is not None:
        overrides["formats"] = (args.format,)
    if args.ceiling is not None:
        overrides["ceiling"] = args.ceiling
    if args.oracle is not None:
        overrides["oracle"] = args.oracle
    if args.action is not None:
        overrides["action"] = args.action
    if args.nf_order is not None:
        overrides["nf_order"] = args.nf_order
    if args.mass is not None:
        overrides["mass"] = args.mass
    forms = {k: getattr(args, k) for k in ("builtin", "symbol", "potential")
             if getattr(args, k) is not None}
    if len(forms) > 1:
        raise ConfigError(f"give exactly one of --builtin/--symbol/--potential, got {sorted(forms)}")
    if forms:
        overrides.update({"builtin": None, "symbol": None, "potential": None, "params": {}, **forms})
    return [replace(j, **overrides) for j in jobs]


def main(argv: Optional[Sequence[str]] = None, stream=None) -> int:
    stream = stream or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        jobs = _jobs_from_args(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    codes = []
    for job in jobs:
        out_dir = args.out or job.out or os.environ.get(OUT_ENV) or "bs_output"
        try:
            if args.verb == "identities":
                code = cmd_identities(job.seed, job.count, out_dir, stream, formats=job.formats)
            elif args.verb == "spectrum":
                code = cmd_spectrum(job, out_dir, stream)
            elif args.verb == "compare":
                code = cmd_compare(job, out_dir, stream)
            else:
                code = cmd_normalform(job, out_dir, stream)
        except OracleDiverged as exc:
            print(f"error: job {job.name!r}: oracle diverged: {exc}", file=sys.stderr)
            code = EXIT_ORACLE
        except NonGeneric as exc:
            print(f"error: job {job.name!r}: NonGeneric: {exc}", file=sys.stderr)
            code = EXIT_ERROR
        except (NonElliptic, DegreeTooLow) as exc:
            print(f"error: job {job.name!r}: {type(exc).__name__}: {exc}", file=sys.stderr)
            code = EXIT_ERROR
        except (ConfigError, BohrSommerfeldError, ValueError) as exc:
            print(f"error: job {job.name!r}: {exc}", file=sys.stderr)
            code = EXIT_ERROR
        codes.append(code)
        if args.verb == "identities":
            break
    return _worst(codes)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
