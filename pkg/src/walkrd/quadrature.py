"""Adaptive Gauss-Legendre quadrature on ``(0, 1)``.

Integrands here are smooth away from a handful of known points: kinks
where a spectral density crosses the water level, and an integrable
logarithmic blow-up at ``phi = 0``.  Kinks are passed in as split points
so that every piece is smooth up to its endpoints.  The piece touching 0
is cut into dyadic panels ``[b 2^-(j+1), b 2^-j]``, which makes a log
singularity look the same on every panel.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from walkrd.errors import DomainError, QuadratureError

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(15)
_EPS = np.finfo(float).eps
_DYADIC_BATCH = 8


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-10
    max_subdivisions: int = 60
    split_points: tuple[float, ...] = ()

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise DomainError(f"abs_tol must be positive, got {self.abs_tol!r}")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")
        pts = tuple(float(p) for p in self.split_points)
        if any(not 0.0 < p < 1.0 for p in pts):
            raise DomainError(f"split points must lie strictly inside (0, 1): {pts}")
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise DomainError(f"split points must be strictly increasing: {pts}")
        object.__setattr__(self, "split_points", pts)


def _gauss(f, lo, hi):
    half = 0.5 * (hi - lo)
    x = (0.5 * (hi + lo))[:, None] + half[:, None] * _NODES[None, :]
    fx = np.asarray(f(x), dtype=float).reshape(x.shape)
    return half * (fx @ _WEIGHTS), half * (np.abs(fx) @ _WEIGHTS)


def _adaptive(f, lo, hi, tol_density, max_depth):
    """Integrate ``f`` over each ``[lo[i], hi[i]]`` by bisection.

    Returns per-root integrals and the summed error estimate.
    """
    root = np.arange(lo.size)
    depth = np.zeros(lo.size, dtype=int)
    values = np.zeros(lo.size)
    error = 0.0
    while lo.size:
        mid = 0.5 * (lo + hi)
        whole, _ = _gauss(f, lo, hi)
        left, left_abs = _gauss(f, lo, mid)
        right, right_abs = _gauss(f, mid, hi)
        halves = left + right
        err = np.abs(whole - halves)
        ok = err <= tol_density * (hi - lo) + 50 * _EPS * (left_abs + right_abs)
        np.add.at(values, root[ok], halves[ok])
        error += float(err[ok].sum())
        bad = ~ok
        if np.any(depth[bad] >= max_depth):
            estimate = float(values.sum() + halves[bad].sum())
            raise QuadratureError(
                "subdivision budget exhausted", estimate, error + float(err[bad].sum())
            )
        lo, mid, hi = lo[bad], mid[bad], hi[bad]
        root = np.repeat(root[bad], 2)
        depth = np.repeat(depth[bad] + 1, 2)
        lo, hi = np.column_stack([lo, mid]).ravel(), np.column_stack([mid, hi]).ravel()
    return values, error


def _dyadic_from_zero(f, b, spec, tol_density):
    total = 0.0
    error = 0.0
    small = 0
    level = 0
    stop = 0.25 * spec.abs_tol
    while level < spec.max_subdivisions:
        j = np.arange(level, level + _DYADIC_BATCH)
        hi = b * 0.5**j
        lo = 0.5 * hi
        panels, err = _adaptive(f, lo, hi, tol_density, spec.max_subdivisions)
        error += err
        for value in panels:
            total += value
            level += 1
            small = small + 1 if abs(value) < stop else 0
            if small == 2:
                # tail [0, b 2^-level] is about one more panel for
                # bounded or logarithmic integrands
                return total + value, error + abs(value)
    raise QuadratureError("dyadic refinement toward 0 did not terminate", total, float("inf"))


def integrate(f: Callable[[np.ndarray], np.ndarray], spec: QuadratureSpec = QuadratureSpec(),
              full_output: bool = False):
    """Integrate a vectorised ``f`` over ``(0, 1)``.

    ``f`` receives a float array and must return an array of the same
    shape.  It is never evaluated at 0 or 1.  With ``full_output`` the
    error estimate is returned as well.
    """
    edges = (0.0, *spec.split_points, 1.0)
    tol_density = 0.5 * spec.abs_tol
    total, error = _dyadic_from_zero(f, edges[1], spec, tol_density)
    if len(edges) > 2:
        lo = np.asarray(edges[1:-1], dtype=float)
        hi = np.asarray(edges[2:], dtype=float)
        values, err = _adaptive(f, lo, hi, tol_density, spec.max_subdivisions)
        total += float(values.sum())
        error += err
    if full_output:
        return float(total), float(error)
    return float(total)
