"""Symmetric eigensolver: Householder tridiagonalization and implicit QL.

Deterministic and dependency-free apart from numpy array arithmetic.  The
QL sweep follows the classical ``tql`` scheme with Wilkinson-type shifts.
"""

from __future__ import annotations

import math
from typing import Optional, Tuple

import numpy as np

__all__ = ["tridiagonalize", "tridiagonal_eigen", "eigh", "eigvalsh"]


def tridiagonalize(A: np.ndarray, want_q: bool = False):
    """Reduce a real symmetric matrix to tridiagonal form ``Q^T A Q = T``.

    Returns ``(d, e, Q)`` with diagonal ``d``, sub-diagonal ``e``
    (``e[0] = 0``, ``e[i]`` couples ``i-1`` and ``i``) and ``Q`` or None.
    """
    a = np.array(A, dtype=float, copy=True)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("square matrix required")
    Q = np.eye(n) if want_q else None
    e = np.zeros(n)
    for k in range(n - 2):
        x = a[k + 1:, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            e[k + 1] = 0.0
            continue
        if x[0] > 0:
            alpha = -alpha
        v = x.copy()
        v[0] -= alpha
        vnorm2 = float(v @ v)
        if vnorm2 == 0.0:
            e[k + 1] = x[0]
            continue
        beta = 2.0 / vnorm2
        sub = a[k + 1:, k + 1:]
        # rank-2 update  A <- (I - beta v v^T) A (I - beta v v^T)
        p = beta * (sub @ v)
        K = 0.5 * beta * float(v @ p)
        w = p - K * v
        sub -= np.outer(v, w) + np.outer(w, v)
        a[k + 1:, k] = 0.0
        a[k, k + 1:] = 0.0
        e[k + 1] = alpha
        if Q is not None:
            Q[:, k + 1:] -= beta * np.outer(Q[:, k + 1:] @ v, v)
    if n >= 2:
        e[n - 1] = a[n - 1, n - 2]
    d = np.diag(a).copy()
    return d, e, Q


def tridiagonal_eigen(d: np.ndarray, e: np.ndarray, Z: Optional[np.ndarray] = None,
                      max_iter: int = 60) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """Implicit-shift QL on a symmetric tridiagonal matrix.

    ``e[i]`` is the coupling between ``i-1`` and ``i``.  If ``Z`` is given
    its columns are rotated along, so passing the Householder ``Q`` yields
    eigenvectors of the original matrix.
    """
    n = len(d)
    d = [float(v) for v in d]
    e = [float(v) for v in e[1:]] + [0.0]
    Zt = None if Z is None else np.array(Z, dtype=float).T.copy()
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= np.finfo(float).eps * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > max_iter:
                raise ArithmeticError("QL iteration did not converge")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if Zt is not None:
                    zi1 = Zt[i + 1].copy()
                    Zt[i + 1] = s * Zt[i] + c * zi1
                    Zt[i] = c * Zt[i] - s * zi1
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    vals = np.array(d)
    order = np.argsort(vals, kind="stable")
    vecs = None if Zt is None else Zt.T[:, order]
    return vals[order], vecs


def eigh(A: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric matrix."""
    d, e, Q = tridiagonalize(A, want_q=True)
    return tridiagonal_eigen(d, e, Q)


def eigvalsh(A: np.ndarray) -> np.ndarray:
    """Eigenvalues (ascending) of a symmetric matrix."""
    d, e, _ = tridiagonalize(A)
    return tridiagonal_eigen(d, e)[0]
