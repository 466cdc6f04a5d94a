"""Cyclic Jacobi eigensolver for dense symmetric matrices.

Deliberately independent of LAPACK so that it can serve as an oracle for
the closed-form spectra.  The inner loops are compiled with numba.
"""

from __future__ import annotations

import math

import numba
import numpy as np

from walkrd.errors import ConvergenceError, DomainError

MAX_SIZE = 2048
MAX_SWEEPS = 100


@numba.njit(cache=True)
def _off_norm(a):
    n = a.shape[0]
    s = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            s += a[i, j] * a[i, j]
    return math.sqrt(2.0 * s)


@numba.njit(cache=True)
def _sweeps(a, vt, want_vectors, tol, max_sweeps):
    # vt holds eigenvectors as rows so that updates stay contiguous
    n = a.shape[0]
    for sweep in range(max_sweeps):
        if _off_norm(a) < tol:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                app = a[p, p]
                aqq = a[q, q]
                if abs(apq) <= 1e-18 * (abs(app) + abs(aqq)):
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    continue
                theta = (aqq - app) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 1.0 / (2.0 * theta)
                else:
                    t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    if k == p or k == q:
                        continue
                    akp = a[p, k]
                    akq = a[q, k]
                    new_p = c * akp - s * akq
                    new_q = s * akp + c * akq
                    a[p, k] = new_p
                    a[k, p] = new_p
                    a[q, k] = new_q
                    a[k, q] = new_q
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                if want_vectors:
                    for k in range(n):
                        vp = vt[p, k]
                        vq = vt[q, k]
                        vt[p, k] = c * vp - s * vq
                        vt[q, k] = s * vp + c * vq
    if _off_norm(a) < tol:
        return max_sweeps
    return -1


def _padded(m):
    n = m.shape[0]
    buf = np.zeros((n, n + 9))
    buf[:, :n] = m
    return buf[:, :n]


def jacobi_eigh(matrix, want_vectors: bool = False, max_size: int = MAX_SIZE):
    """Eigenvalues (descending) and optionally eigenvectors of a symmetric matrix.

    Rotations sweep until the off-diagonal Frobenius norm drops below
    ``1e-12`` times the trace (or the Frobenius norm when the trace is not
    positive).  Returns ``(values, vectors)`` with ``vectors`` ``None``
    unless requested; column ``i`` pairs with ``values[i]``.
    """
    a = np.array(matrix, dtype=float, order="C")
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n > max_size:
        raise DomainError(f"matrix size {n} exceeds the Jacobi cap {max_size}")
    scale = float(np.abs(a).max()) if n else 0.0
    if n and float(np.abs(a - a.T).max()) > 1e-12 * scale:
        raise DomainError("matrix is not symmetric")
    trace = float(np.trace(a))
    ref = trace if trace > 0 else float(np.linalg.norm(a))
    # odd row padding keeps column walks off a single cache set
    a = _padded(0.5 * (a + a.T))
    vt = _padded(np.eye(n))
    if n > 1 and ref > 0:
        done = _sweeps(a, vt, want_vectors, 1e-12 * ref, MAX_SWEEPS)
        if done < 0:
            raise ConvergenceError(f"Jacobi did not converge in {MAX_SWEEPS} sweeps")
    values = np.diag(a).copy()
    order = np.argsort(-values, kind="stable")
    vectors = vt[order].T.copy() if want_vectors else None
    return values[order], vectors
