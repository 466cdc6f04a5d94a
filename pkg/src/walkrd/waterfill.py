"""Reverse water-filling over finite spectra and limiting densities.

A water level ``theta`` fixes one point of a distortion-rate curve: every
mode keeps distortion ``min(theta, lambda)`` and costs
``max(0, log2(lambda / theta)) / 2`` bits.  Rates are in bits per
*source* sample throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from walkrd.errors import ConvergenceError, DomainError
from walkrd.quadrature import QuadratureSpec, integrate
from walkrd.spectra import DensityFamily, SpectralDensity

LN2 = math.log(2.0)

_RATE_RTOL = 1e-12
_MAX_BISECTIONS = 200


@dataclass(frozen=True)
class RdPoint:
    theta: float
    rate: float
    distortion: float


def finite_n_rd_point(eigenvalues, theta: float, N: int) -> RdPoint:
    """Kolmogorov water-filling over a finite spectrum, normalised by ``N``.

    ``eigenvalues`` may omit zero modes; they contribute nothing to either
    sum, which is why the normaliser is passed separately.
    """
    if not theta > 0:
        raise DomainError(f"water level must be positive, got {theta!r}")
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.size > N:
        raise DomainError(f"{lam.size} eigenvalues exceed normaliser N={N}")
    if lam.size and lam.min() < 0:
        raise DomainError("eigenvalues must be nonnegative")
    distortion = float(np.minimum(theta, lam).sum()) / N
    active = lam[lam > theta]
    rate = float(np.log2(active / theta).sum()) / (2 * N)
    return RdPoint(theta, rate, distortion)


def finite_n_water_level(eigenvalues, N: int, R: float) -> float:
    """Water level at which the finite-``N`` water-filling rate equals ``R``.

    The rate is piecewise smooth and strictly decreasing in ``log theta``
    below the top eigenvalue, so plain bisection on ``log theta`` is used.
    """
    if not R > 0:
        raise DomainError(f"rate must be positive, got {R!r}")
    lam = np.asarray(eigenvalues, dtype=float)
    lam = lam[lam > 0]
    if not lam.size:
        raise DomainError("spectrum has no positive eigenvalue")
    log_lam = np.log(lam)

    def rate(log_theta):
        return float(np.maximum(log_lam - log_theta, 0.0).sum()) / (2 * N * LN2)

    hi = float(log_lam.max())
    lo = hi - 2 * N * LN2 * R / lam.size - 1.0
    while rate(lo) < R:
        lo -= 2 * N * LN2 * R / lam.size + 1.0
    return math.exp(_bisect_log_level(rate, R, lo, hi))


def _bisect_log_level(rate, R, lo, hi):
    """Bisection on ``log theta`` for a decreasing ``rate(log theta)``.

    Requires ``rate(lo) >= R >= rate(hi)``.
    """
    for _ in range(_MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        r = rate(mid)
        if abs(r - R) <= _RATE_RTOL * R:
            return mid
        if r > R:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4 * np.finfo(float).eps * max(1.0, abs(mid)):
            return 0.5 * (lo + hi)
    raise ConvergenceError(f"water-level bisection did not converge for R={R!r}")


def _check_density(d: SpectralDensity, M: int):
    if int(M) != M or M < 1:
        raise DomainError(f"M must be a positive integer, got {M!r}")
    if d.family is DensityFamily.SHIFTED and d.M != M:
        raise DomainError(f"shifted density built for M={d.M} used with M={M}")


def _splits(d: SpectralDensity, theta: float) -> tuple[float, ...]:
    phi = d.crossing(theta)
    return (phi,) if phi is not None and 0.0 < phi < 1.0 else ()


def _rate_integral(d: SpectralDensity, log_theta: float, quad: QuadratureSpec) -> float:
    theta = math.exp(log_theta) if log_theta < 700 else math.inf
    spec = QuadratureSpec(quad.abs_tol, quad.max_subdivisions, _splits(d, theta))
    return integrate(lambda p: np.maximum(d.log(p) - log_theta, 0.0), spec) / LN2


def _distortion_integral(d: SpectralDensity, theta: float, quad: QuadratureSpec) -> float:
    spec = QuadratureSpec(quad.abs_tol, quad.max_subdivisions, _splits(d, theta))
    return integrate(lambda p: np.minimum(d(p), theta), spec)


def asymptotic_rd_point(d: SpectralDensity, theta: float, M: int = 1,
                        quad: QuadratureSpec = QuadratureSpec()) -> RdPoint:
    """Water-filling over a limiting density.

    The rate carries a ``1/(2M)`` factor because ``M`` source samples
    share one sample of the density's process.  The shifted density
    additionally scales distortion by ``M``; the standard one does not.
    """
    if not theta > 0:
        raise DomainError(f"water level must be positive, got {theta!r}")
    _check_density(d, M)
    rate = _rate_integral(d, math.log(theta), quad) / (2 * M)
    distortion = _distortion_integral(d, theta, quad)
    if d.family is DensityFamily.SHIFTED:
        distortion *= M
    return RdPoint(theta, rate, distortion)


def rate_at_level(d: SpectralDensity, theta: float, M: int = 1,
                  quad: QuadratureSpec = QuadratureSpec()) -> float:
    if not theta > 0:
        raise DomainError(f"water level must be positive, got {theta!r}")
    _check_density(d, M)
    return _rate_integral(d, math.log(theta), quad) / (2 * M)


def log_water_level(d: SpectralDensity, M: int, R: float,
                    quad: QuadratureSpec = QuadratureSpec()) -> float:
    """Natural log of :func:`rate_to_water_level`; usable when ``theta``
    itself would underflow (``M R`` beyond roughly 500)."""
    if not R > 0:
        raise DomainError(f"rate must be positive, got {R!r}; R = 0 needs an infinite water level")
    _check_density(d, M)

    def rate(log_theta):
        return _rate_integral(d, log_theta, quad) / (2 * M)

    hi = math.log(max(4.0, 4.0 * float(d(0.5))))
    lo = -2 * M * R * LN2 - math.log(16.0)
    step = math.log(16.0)
    while rate(hi) > R:
        hi += step
        step *= 2
    step = math.log(16.0)
    while rate(lo) < R:
        lo -= step
        step *= 2
    return _bisect_log_level(rate, R, lo, hi)


def rate_to_water_level(d: SpectralDensity, M: int, R: float,
                        quad: QuadratureSpec = QuadratureSpec()) -> float:
    """Invert the asymptotic rate: the ``theta`` with ``rate(theta) = R``."""
    return math.exp(log_water_level(d, M, R, quad))
