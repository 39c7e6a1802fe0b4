"""Classical mechanics around an elliptic fixed point.

Orbits are traced with an adaptive embedded Runge-Kutta integrator
(Dormand-Prince 8(5,3)) on ``dx/dt = dH/dp``, ``dp/dt = -dH/dx``.  The
period is found from the return to a transversal section through the start
point, and samples are then taken at equally spaced times over one period,
so actions and averages reduce to periodic trapezoid sums.  Those converge
spectrally, so the RK tolerance limits the accuracy.
"""

from __future__ import annotations

import bisect
import csv
import enum
import functools
import io
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import DOP853
from scipy.optimize import brentq

from .exceptions import NoFixedPoint, NonGeneric, OrbitNotClosed, OutOfWindow
from .normalform import LinearSymplectic
from .polysym import PolySymbol, compile_real, fd_partial

__all__ = [
    "SmoothHamiltonian",
    "Classification",
    "FixedPointReport",
    "Orbit",
    "find_fixed_point",
    "trace_orbit",
    "action_and_frequency",
    "orbit_average",
    "solve_action",
    "energy_of_action",
    "apply_linear_symplectic",
]

RK_RTOL = 1e-12
N_SAMPLES = 256
NONGENERIC_RATIO = 1e-10


@dataclass(frozen=True)
class SmoothHamiltonian:
    """A phase-space function ``H(x, p)`` with optional derivative callbacks.

    Parameters
    ----------
    value : callable
        ``value(x, p) -> float``; the principal symbol.
    gradient, hessian : callable, optional
        ``(H_x, H_p)`` and ``[[H_xx, H_xp], [H_px, H_pp]]``.  When absent,
        :func:`~bohrsommerfeld.polysym.fd_partial` supplies them.
    partials : callable, optional
        ``partials(nx, np, x, p)``: exact mixed partials of any order, used
        for Taylor expansion.
    corrections : tuple of (int, callable)
        Higher terms of a slowly varying symbol, ``H = H0 + sum hbar**k H_k``,
        as ``(k, H_k)`` pairs.  The classical machinery runs on ``H0``.
    vectorized : bool
        Whether the callbacks accept numpy arrays.
    """

    value: Callable
    gradient: Optional[Callable] = None
    hessian: Optional[Callable] = None
    partials: Optional[Callable] = None
    corrections: Tuple[Tuple[int, Callable], ...] = ()
    name: str = "H"
    vectorized: bool = False
    symbol: Optional[PolySymbol] = field(default=None, compare=False)

    def __call__(self, x, p):
        return self.value(x, p)

    def grad(self, x, p) -> np.ndarray:
        if self.gradient is not None:
            return np.asarray(self.gradient(x, p), dtype=float)
        return np.array([fd_partial(self.value, x, p, 1, 0), fd_partial(self.value, x, p, 0, 1)])

    def hess(self, x, p) -> np.ndarray:
        if self.hessian is not None:
            return np.asarray(self.hessian(x, p), dtype=float)
        hxx = fd_partial(self.value, x, p, 2, 0)
        hxp = fd_partial(self.value, x, p, 1, 1)
        hpp = fd_partial(self.value, x, p, 0, 2)
        return np.array([[hxx, hxp], [hxp, hpp]])

    def partial(self, nx: int, np_: int, x: float, p: float) -> float:
        if self.partials is not None:
            return float(self.partials(nx, np_, x, p))
        return fd_partial(self.value, x, p, nx, np_)

    @property
    def exact_gradient(self) -> bool:
        return self.gradient is not None

    def values_on(self, xs: np.ndarray, ps: np.ndarray) -> np.ndarray:
        if self.vectorized:
            return np.broadcast_to(np.asarray(self.value(xs, ps), dtype=float), xs.shape).copy()
        return np.array([self.value(a, b) for a, b in zip(xs, ps)], dtype=float)

    def hess_on(self, xs: np.ndarray, ps: np.ndarray) -> np.ndarray:
        if self.vectorized and self.hessian is not None:
            h = self.hessian(xs, ps)
            out = np.empty((len(xs), 2, 2))
            for a in range(2):
                for b in range(2):
                    out[:, a, b] = np.broadcast_to(np.asarray(h[a][b], dtype=float), xs.shape)
            return out
        return np.array([self.hess(a, b) for a, b in zip(xs, ps)])

    def grad_on(self, xs: np.ndarray, ps: np.ndarray) -> np.ndarray:
        if self.vectorized and self.gradient is not None:
            g = self.gradient(xs, ps)
            return np.stack([np.broadcast_to(np.asarray(g[0], dtype=float), xs.shape),
                             np.broadcast_to(np.asarray(g[1], dtype=float), xs.shape)], axis=1)
        return np.array([self.grad(a, b) for a, b in zip(xs, ps)])

    def correction_on(self, xs: np.ndarray, ps: np.ndarray, hbar: float) -> np.ndarray:
        """``sum_k hbar**k H_k`` at the given points."""
        total = np.zeros(len(xs))
        for k, fk in self.corrections:
            if self.vectorized:
                vals = np.broadcast_to(np.asarray(fk(xs, ps), dtype=float), xs.shape)
            else:
                vals = np.array([fk(a, b) for a, b in zip(xs, ps)], dtype=float)
            total = total + hbar ** k * vals
        return total

    def principal(self) -> "SmoothHamiltonian":
        sym = self.symbol.principal() if self.symbol is not None else None
        return replace(self, corrections=(), symbol=sym)

    def negated(self) -> "SmoothHamiltonian":
        if self.symbol is not None:
            out = SmoothHamiltonian.from_polysymbol(-self.symbol, name=f"-({self.name})")
            return out
        v, g, h, d = self.value, self.gradient, self.hessian, self.partials
        return SmoothHamiltonian(
            value=lambda x, p: -v(x, p),
            gradient=None if g is None else (lambda x, p: -np.asarray(g(x, p), dtype=float)),
            hessian=None if h is None else (lambda x, p: -np.asarray(h(x, p), dtype=float)),
            partials=None if d is None else (lambda i, j, x, p: -d(i, j, x, p)),
            corrections=tuple((k, _negate(f)) for k, f in self.corrections),
            name=f"-({self.name})",
            vectorized=self.vectorized,
        )

    def compose(self, S: LinearSymplectic) -> "SmoothHamiltonian":
        """``H o S`` with the chain rule applied to gradient and Hessian."""
        if self.symbol is not None:
            return SmoothHamiltonian.from_polysymbol(self.symbol.compose_linear(S.matrix),
                                                     name=self.name)
        m = S.array
        v, g, h = self.value, self.gradient, self.hessian

        def mapped(x, p):
            return m[0, 0] * x + m[0, 1] * p, m[1, 0] * x + m[1, 1] * p

        value = lambda x, p: v(*mapped(x, p))  # noqa: E731
        gradient = None
        hessian = None
        if g is not None:
            gradient = lambda x, p: m.T @ np.asarray(g(*mapped(x, p)), dtype=float)  # noqa: E731
        if h is not None:
            hessian = lambda x, p: m.T @ np.asarray(h(*mapped(x, p)), dtype=float) @ m  # noqa: E731
        corrections = tuple((k, (lambda f: lambda x, p: f(*mapped(x, p)))(f))
                            for k, f in self.corrections)
        return SmoothHamiltonian(value=value, gradient=gradient, hessian=hessian,
                                 corrections=corrections, name=self.name)

    @classmethod
    def from_polysymbol(cls, P: PolySymbol, name: str = "H") -> "SmoothHamiltonian":
        """Wrap a real polynomial symbol; hbar terms become ``corrections``."""
        if not P.is_real:
            raise ValueError("only real symbols describe classical Hamiltonians")
        H0 = P.principal()
        fx, fp = H0.partial(1, 0), H0.partial(0, 1)
        fxx, fxp, fpp = H0.partial(2, 0), H0.partial(1, 1), H0.partial(0, 2)
        v = compile_real(H0)
        gx, gp = compile_real(fx), compile_real(fp)
        hxx, hxp, hpp = compile_real(fxx), compile_real(fxp), compile_real(fpp)

        def gradient(x, p):
            return (gx(x, p), gp(x, p))

        def hessian(x, p):
            a, b, c = hxx(x, p), hxp(x, p), hpp(x, p)
            return ((a, b), (b, c))

        def partials(i, j, x, p):
            return H0.partial(i, j).eval_real(x, p)

        corrections = tuple((k, compile_real(P.hbar_part(k)))
                            for k in range(1, P.hbar_order + 1) if P.hbar_part(k))
        return cls(value=v, gradient=gradient, hessian=hessian, partials=partials,
                   corrections=corrections, name=name, vectorized=True, symbol=P)

    @classmethod
    def kinetic_potential(cls, V: Callable, dV: Optional[Callable] = None,
                          d2V: Optional[Callable] = None, mass: float = 1.0,
                          dnV: Optional[Callable] = None, name: str = "H",
                          vectorized: bool = True) -> "SmoothHamiltonian":
        """``H = p**2 / (2 m) + V(x)``.

        ``dnV(n, x)`` gives the n-th derivative of ``V`` when available; it
        overrides ``dV``/``d2V``.
        """
        m = float(mass)
        if dnV is not None:
            dV = dV or (lambda x: dnV(1, x))
            d2V = d2V or (lambda x: dnV(2, x))

        def value(x, p):
            return p * p / (2 * m) + V(x)

        def vprime(x, n):
            if n == 1 and dV is not None:
                return dV(x)
            if n == 2 and d2V is not None:
                return d2V(x)
            if dnV is not None:
                return dnV(n, x)
            return fd_partial(lambda a, b: V(a), float(x), 0.0, n, 0)

        def gradient(x, p):
            return (vprime(x, 1), p / m)

        def hessian(x, p):
            return ((vprime(x, 2), 0.0 * x), (0.0 * x, 1.0 / m + 0.0 * x))

        def partials(i, j, x, p):
            if j == 0:
                return V(x) + p * p / (2 * m) if i == 0 else vprime(x, i)
            if i == 0 and j == 1:
                return p / m
            if i == 0 and j == 2:
                return 1.0 / m
            return 0.0

        fd = dV is None or d2V is None
        return cls(value=value, gradient=gradient, hessian=hessian, partials=partials,
                   name=name, vectorized=vectorized and not fd)


def _negate(f):
    return lambda x, p: -f(x, p)


class Classification(str, enum.Enum):
    GENERIC_MINIMUM = "GenericMinimum"
    GENERIC_MAXIMUM = "GenericMaximum"
    SADDLE = "Saddle"
    NON_GENERIC = "NonGeneric"


@dataclass(frozen=True)
class FixedPointReport:
    location: Tuple[float, float]
    energy: float
    hessian: Tuple[Tuple[float, float], Tuple[float, float]]
    determinant: float
    eigenvalues: Tuple[float, float]
    classification: Classification
    iterations: int = 0

    @property
    def is_generic(self) -> bool:
        return self.classification in (Classification.GENERIC_MINIMUM,
                                       Classification.GENERIC_MAXIMUM)

    @property
    def needs_negation(self) -> bool:
        """True for a maximum: quantize ``-H`` and negate the eigenvalues."""
        return self.classification is Classification.GENERIC_MAXIMUM

    @property
    def frequency(self) -> float:
        """Small-oscillation frequency ``sqrt(det Q)``."""
        return math.sqrt(max(self.determinant, 0.0))

    def negated(self) -> "FixedPointReport":
        h = tuple(tuple(-v for v in row) for row in self.hessian)
        cls = {Classification.GENERIC_MINIMUM: Classification.GENERIC_MAXIMUM,
               Classification.GENERIC_MAXIMUM: Classification.GENERIC_MINIMUM}.get(
                   self.classification, self.classification)
        ev = tuple(sorted(-v for v in self.eigenvalues))
        return replace(self, energy=-self.energy, hessian=h, eigenvalues=ev, classification=cls)


def classify_hessian(Q: np.ndarray) -> Tuple[Classification, float, Tuple[float, float]]:
    """Classify a symmetric 2x2 Hessian.

    Singular means ``|det Q| < 1e-10 max(||Q||_F, 1)**2``.  The floor of 1
    catches a Hessian that vanishes altogether (``H = I**2``), for which
    any relative test is blind.
    """
    Q = 0.5 * (Q + Q.T)
    det = float(Q[0, 0] * Q[1, 1] - Q[0, 1] * Q[1, 0])
    ev = tuple(float(v) for v in np.linalg.eigvalsh(Q))
    norm2 = max(float(np.sum(Q * Q)), 1.0)
    if abs(det) < NONGENERIC_RATIO * norm2:
        return Classification.NON_GENERIC, det, ev
    if det < 0:
        return Classification.SADDLE, det, ev
    if Q[0, 0] + Q[1, 1] > 0:
        return Classification.GENERIC_MINIMUM, det, ev
    return Classification.GENERIC_MAXIMUM, det, ev


def find_fixed_point(H: SmoothHamiltonian, guess: Sequence[float] = (0.0, 0.0),
                     max_iter: int = 100, require_generic: bool = False) -> FixedPointReport:
    """Newton iteration on the gradient, then classification by the Hessian.

    The iteration keeps going while the step keeps shrinking, so a
    degenerate critical point (linear convergence) is driven close enough to
    its exact location for the Hessian to show the singularity.

    Raises
    ------
    NoFixedPoint
        No convergence within ``max_iter`` iterations.
    NonGeneric
        Only when ``require_generic`` is set and the Hessian is singular.
    """
    z = np.array(guess, dtype=float)
    prev = math.inf
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        g = H.grad(*z)
        if not np.all(np.isfinite(g)):
            break
        if np.all(g == 0.0):
            converged = True
            break
        Q = H.hess(*z)
        try:
            step = np.linalg.solve(Q, g)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(Q, g, rcond=None)[0]
        size = float(np.linalg.norm(step))
        z = z - step
        if size <= 1e-15 * (1.0 + float(np.linalg.norm(z))):
            converged = True
            break
        if size >= prev and _grad_small(H, z):
            converged = True
            break
        prev = size
    if not converged and not _grad_small(H, z):
        raise NoFixedPoint(f"Newton iteration from {tuple(guess)} did not converge "
                           f"in {max_iter} iterations")
    if not _grad_small(H, z):
        raise NoFixedPoint(f"gradient did not vanish near {tuple(z)}")
    Q = H.hess(*z)
    cls, det, ev = classify_hessian(Q)
    report = FixedPointReport(
        location=(float(z[0]), float(z[1])),
        energy=float(H.value(z[0], z[1])),
        hessian=((float(Q[0, 0]), float(Q[0, 1])), (float(Q[1, 0]), float(Q[1, 1]))),
        determinant=det,
        eigenvalues=ev,
        classification=cls,
        iterations=it,
    )
    if require_generic and cls is Classification.NON_GENERIC:
        raise NonGeneric(nongeneric_message(report))
    return report


def _grad_small(H: SmoothHamiltonian, z: np.ndarray) -> bool:
    g = H.grad(*z)
    Q = H.hess(*z)
    scale = max(1.0, float(np.abs(Q).max()) * (1.0 + float(np.linalg.norm(z))))
    tol = 1e-12 if H.exact_gradient else 1e-7
    return float(np.linalg.norm(g)) < tol * scale


def nongeneric_message(report: FixedPointReport) -> str:
    return (f"fixed point at {report.location} is not generic: its Hessian is singular "
            f"(det = {report.determinant:.3g}, eigenvalues {report.eigenvalues}). "
            "Bohr-Sommerfeld quantization about it needs a nonsingular Hessian; "
            "for a pure quartic well V = x**4 the Hessian matrix has rank 1 at the "
            "bottom of the well, so that well is the standard counterexample.")


@dataclass(frozen=True)
class Orbit:
    """One closed level curve of ``H``.

    ``samples`` holds rows ``(t, x, p, H(x, p))`` at equally spaced times
    over one period (the endpoint ``t = T`` is not repeated);
    ``velocities`` holds ``(dx/dt, dp/dt)`` at the same points.
    """

    energy: float
    period: float
    action: float
    frequency: float
    samples: np.ndarray = field(repr=False)
    velocities: np.ndarray = field(repr=False)
    fixed_point: Tuple[float, float] = (0.0, 0.0)
    energy_drift: float = 0.0
    closure_error: float = 0.0
    n_steps: int = 0

    @property
    def x(self) -> np.ndarray:
        return self.samples[:, 1]

    @property
    def p(self) -> np.ndarray:
        return self.samples[:, 2]

    def reversed(self) -> "Orbit":
        """Same loop traversed backwards in time."""
        s = self.samples.copy()
        s[1:] = s[1:][::-1]
        v = -self.velocities
        v[1:] = v[1:][::-1]
        return replace(self, samples=s, velocities=v)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "x", "p", "H"])
        for row in self.samples:
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()


def _start_point(H: SmoothHamiltonian, E: float, fp: FixedPointReport):
    Q = np.array(fp.hessian)
    w, V = np.linalg.eigh(0.5 * (Q + Q.T))
    u = V[:, 1]
    if fp.classification is not Classification.GENERIC_MINIMUM:
        u = np.array([1.0, 0.0])
    if u[0] < 0 or (u[0] == 0 and u[1] < 0):
        u = -u
    z0 = np.array(fp.location)
    dE = E - fp.energy
    if fp.classification is Classification.GENERIC_MINIMUM:
        s_step = 0.25 * math.sqrt(2.0 * dE / w[1])
    else:
        s_step = 1e-3

    def f(s):
        return H.value(*(z0 + s * u)) - E

    lo = 0.0
    hi = s_step
    for _ in range(400):
        if f(hi) >= 0:
            break
        lo, hi = hi, hi + s_step
        s_step *= 1.25
    else:
        raise OrbitNotClosed(f"level set H = {E} not reached along the ray from the fixed point")
    s = brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=200)
    return z0 + s * u, u, z0


def trace_orbit(H: SmoothHamiltonian, E: float, fp: FixedPointReport,
                energy_ceiling: float | None = None, n_samples: int = N_SAMPLES,
                rtol: float = RK_RTOL, max_steps: int = 50000) -> Orbit:
    """Integrate the closed orbit of ``H`` at energy ``E`` around a minimum.

    Raises
    ------
    OutOfWindow
        ``E`` not strictly between the fixed-point energy and the ceiling.
    OrbitNotClosed
        The section was not re-crossed within ``max_steps`` steps, or the
        trajectory wandered off (separatrix proximity).
    """
    if not _is_minimum(fp):
        raise ValueError(f"orbits are traced around a minimum, got {fp.classification.value}")
    if not E > fp.energy:
        raise OutOfWindow(f"energy {E} is not above the fixed-point energy {fp.energy}")
    if energy_ceiling is not None and E >= energy_ceiling:
        raise OutOfWindow(f"energy {E} is not below the ceiling {energy_ceiling}")

    z_start, u, z_fp = _start_point(H, E, fp)
    n = np.array([-u[1], u[0]])
    radius = float(np.linalg.norm(z_start - z_fp))

    def rhs(t, y):
        g = H.grad(y[0], y[1])
        return np.array([g[1], -g[0]])

    v0 = rhs(0.0, z_start)
    sign = 1.0 if float(v0 @ n) >= 0 else -1.0

    def section(y):
        return sign * float((y - z_fp) @ n)

    solver = DOP853(rhs, 0.0, z_start, t_bound=np.inf, rtol=rtol, atol=rtol * radius * 1e-2)
    t_lo, t_hi, dense_list = [], [], []
    g_prev = 0.0
    period = None
    for _ in range(max_steps):
        msg = solver.step()
        if solver.status == "failed":
            raise OrbitNotClosed(f"integrator failed at E = {E}: {msg}")
        dense = solver.dense_output()
        t_lo.append(solver.t_old)
        t_hi.append(solver.t)
        dense_list.append(dense)
        y = solver.y
        if float(np.linalg.norm(y - z_fp)) > 1e3 * radius + 1.0:
            raise OrbitNotClosed(f"trajectory at E = {E} left the neighbourhood of the fixed point")
        g_new = section(y)
        if g_prev < 0.0 <= g_new and float((y - z_fp) @ u) > 0.0:
            period = brentq(lambda t: section(dense(t)), solver.t_old, solver.t,
                            xtol=1e-13 * max(1.0, solver.t) * 1e-1, rtol=4 * np.finfo(float).eps)
            break
        g_prev = g_new
    if period is None:
        raise OrbitNotClosed(f"no return to the section within {max_steps} steps at E = {E}")

    times = np.arange(n_samples) * (period / n_samples)
    pts = np.empty((n_samples, 2))
    for m, t in enumerate(times):
        idx = min(bisect.bisect_right(t_lo, t) - 1, len(dense_list) - 1)
        pts[m] = dense_list[max(idx, 0)](t)
    closure = float(np.linalg.norm(_eval_dense(t_lo, dense_list, period) - z_start)) / radius

    xs, ps = pts[:, 0], pts[:, 1]
    grads = H.grad_on(xs, ps)
    vel = np.stack([grads[:, 1], -grads[:, 0]], axis=1)
    energies = H.values_on(xs, ps)
    drift = float(np.max(np.abs(energies - E))) / max(abs(E - fp.energy), 1e-300)

    samples = np.column_stack([times, xs, ps, energies])
    proto = Orbit(energy=float(E), period=float(period), action=0.0, frequency=0.0,
                  samples=samples, velocities=vel, fixed_point=(float(z_fp[0]), float(z_fp[1])),
                  energy_drift=drift, closure_error=closure, n_steps=len(dense_list))
    A, omega = action_and_frequency(proto)
    return replace(proto, action=A, frequency=omega)


def _is_minimum(fp: FixedPointReport) -> bool:
    if fp.classification is Classification.GENERIC_MINIMUM:
        return True
    return fp.classification is Classification.NON_GENERIC and min(fp.eigenvalues) >= -1e-10 * max(
        1.0, abs(max(fp.eigenvalues)))


def _eval_dense(t_lo, dense_list, t):
    idx = min(bisect.bisect_right(t_lo, t) - 1, len(dense_list) - 1)
    return dense_list[max(idx, 0)](t)


def action_and_frequency(orbit: Orbit) -> Tuple[float, float]:
    """Action ``(1/2 pi) loop-integral of p dx`` and frequency ``2 pi / T``.

    The loop integral is the periodic trapezoid sum of ``(p - p0) dx/dt``
    over the equally spaced samples; the sign is normalized so the action is
    positive for either orientation.
    """
    p0 = orbit.fixed_point[1]
    n = len(orbit.samples)
    dt = orbit.period / n
    integral = float(np.sum((orbit.samples[:, 2] - p0) * orbit.velocities[:, 0])) * dt
    return abs(integral) / (2.0 * math.pi), 2.0 * math.pi / orbit.period


def orbit_average(orbit: Orbit, F: Callable) -> float:
    """Time average of ``F(x, p)`` over one period (equal to the angle average)."""
    xs, ps = orbit.x, orbit.p
    try:
        vals = np.asarray(F(xs, ps), dtype=float)
        if vals.shape != xs.shape:
            vals = np.broadcast_to(vals, xs.shape) if vals.ndim == 0 else None
    except (TypeError, ValueError):
        vals = None
    if vals is None:
        vals = np.array([F(a, b) for a, b in zip(xs, ps)], dtype=float)
    return float(np.mean(vals))


@functools.lru_cache(maxsize=256)
def window_action(H: SmoothHamiltonian, fp: FixedPointReport, energy_ceiling: float) -> float:
    """Action of the orbit just below the energy ceiling."""
    E = energy_ceiling - 1e-9 * max(1.0, abs(energy_ceiling - fp.energy))
    return trace_orbit(H, E, fp).action


def solve_action(H: SmoothHamiltonian, fp: FixedPointReport, A: float,
                 energy_ceiling: float | None = None, rtol: float = 1e-13,
                 max_iter: int = 60) -> Orbit:
    """Orbit whose action is ``A``, by Newton iteration with ``dA/dE = 1/omega``."""
    if not A > 0:
        raise OutOfWindow(f"action must be positive, got {A}")
    if energy_ceiling is not None and A >= window_action(H, fp, energy_ceiling):
        raise OutOfWindow(f"action {A} lies beyond the energy ceiling {energy_ceiling}")
    a1 = fp.frequency if fp.classification is Classification.GENERIC_MINIMUM else 1.0
    E = fp.energy + a1 * A
    if energy_ceiling is not None and E >= energy_ceiling:
        E = 0.5 * (fp.energy + energy_ceiling)
    best = None
    for _ in range(max_iter):
        orbit = trace_orbit(H, E, fp)
        err = A - orbit.action
        if best is None or abs(err) < abs(A - best.action):
            best = orbit
        if abs(err) <= rtol * A:
            return orbit
        E_new = E + orbit.frequency * err
        if not E_new > fp.energy:
            E_new = fp.energy + 0.5 * (E - fp.energy)
        if energy_ceiling is not None and E_new >= energy_ceiling:
            E_new = 0.5 * (E + energy_ceiling)
        if E_new == E:
            break
        E = E_new
    if abs(A - best.action) <= 1e-10 * A:
        return best
    raise OutOfWindow(f"could not invert A(E) at A = {A}")


def energy_of_action(H: SmoothHamiltonian, fp: FixedPointReport, A: float,
                     energy_ceiling: float | None = None) -> float:
    """Classical energy ``f0(A)``; ``A = 0`` returns the fixed-point energy."""
    if A == 0:
        return fp.energy
    return solve_action(H, fp, A, energy_ceiling).energy


def apply_linear_symplectic(H, S):
    """Compose a Hamiltonian (``SmoothHamiltonian`` or ``PolySymbol``) with ``S``.

    Raises :class:`~bohrsommerfeld.exceptions.NotSymplectic` if ``det S`` is
    not 1 to within ``1e-12``.
    """
    if not isinstance(S, LinearSymplectic):
        S = LinearSymplectic(S)
    if isinstance(H, PolySymbol):
        return H.compose_linear(S.matrix)
    return H.compose(S)
