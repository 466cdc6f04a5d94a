"""Distortion of the EC and CE coding schemes, plus their finite-N forms.

The total distortion always splits as
``mmse(M) + coding_term + cross_term``: the first piece is lost to
decimation no matter how many bits are spent, the rest is due to
compression.  ``cross_term`` is only nonzero under CE, where the encoder
compresses the decimated walk for its own fidelity and the decoder
interpolates the result.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from walkrd.errors import DomainError, InconsistencyError
from walkrd.quadrature import QuadratureSpec, integrate
from walkrd.spectra import (
    SpectralDensity,
    WalkDims,
    berger_eigenvalues,
    berger_eigenvectors,
    mmse_interpolation,
)
from walkrd.waterfill import LN2, log_water_level, rate_at_level

_QUAD = QuadratureSpec()


class Scheme(enum.Enum):
    SOURCE_DRF = "source_drf"
    EC = "ec"
    CE = "ce"


@dataclass(frozen=True)
class SchemeConfig:
    """Decimation factor ``M`` and bitrate ``R`` in bits per source sample."""

    M: int
    R: float

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 1:
            raise DomainError(f"M must be a positive integer, got {self.M!r}")
        if not self.R > 0:
            raise DomainError(f"R must be positive, got {self.R!r}")
        object.__setattr__(self, "M", int(self.M))
        object.__setattr__(self, "R", float(self.R))


@dataclass(frozen=True)
class DistortionBreakdown:
    scheme: Scheme
    M: int
    R: float
    theta: float
    mmse_term: float
    coding_term: float
    cross_term: float = 0.0

    @property
    def total(self) -> float:
        return self.mmse_term + self.coding_term + self.cross_term


@dataclass(frozen=True)
class HighRate:
    """Closed-form distortion and whether ``M R`` is inside its validity range."""

    distortion: float
    valid: bool


@dataclass(frozen=True)
class SecondMoments:
    """Second moments of the coding error on the decimated walk.

    ``var[n-1] = E[eps_n^2]`` for ``n = 1..N_M`` and
    ``lag1[n-1] = E[eps_n eps_{n+1}]`` for ``n = 1..N_M-1``.  The error at
    time 0 is identically zero.
    """

    dims: WalkDims
    var: np.ndarray = field(repr=False)
    lag1: np.ndarray = field(repr=False)

    def __post_init__(self):
        var = np.array(self.var, dtype=float)
        lag1 = np.array(self.lag1, dtype=float)
        n = self.dims.N_M
        if var.shape != (n,) or lag1.shape != (n - 1,):
            raise DomainError(f"expected {n} variances and {n - 1} lag-1 moments, "
                              f"got {var.shape} and {lag1.shape}")
        if var.size and var.min() < 0:
            raise DomainError("error variances must be nonnegative")
        bound = np.sqrt(var[:-1] * var[1:]) + 1e-12
        if np.any(np.abs(lag1) > bound):
            raise DomainError("lag-1 moments violate Cauchy-Schwarz")
        var.setflags(write=False)
        lag1.setflags(write=False)
        object.__setattr__(self, "var", var)
        object.__setattr__(self, "lag1", lag1)


def _standard_min_integral(theta):
    d = SpectralDensity.standard()
    spec = QuadratureSpec(_QUAD.abs_tol, _QUAD.max_subdivisions, _split(d, theta))
    return integrate(lambda p: np.minimum(d(p), theta), spec)


def _standard_cos_integral(theta):
    d = SpectralDensity.standard()
    spec = QuadratureSpec(_QUAD.abs_tol, _QUAD.max_subdivisions, _split(d, theta))
    return integrate(lambda p: np.minimum(d(p), theta) * np.cos(np.pi * p), spec)


def _split(d, theta):
    phi = d.crossing(theta)
    return (phi,) if phi is not None and 0.0 < phi < 1.0 else ()


def _shifted_min_integral(M, theta):
    d = SpectralDensity.shifted(M)
    spec = QuadratureSpec(_QUAD.abs_tol, _QUAD.max_subdivisions, _split(d, theta))
    return integrate(lambda p: np.minimum(d(p), theta), spec)


def ec_at_level(M: int, theta: float) -> tuple[DistortionBreakdown, float]:
    """EC breakdown and rate for a water level on the shifted density."""
    rate = rate_at_level(SpectralDensity.shifted(M), theta, M)
    return _ec_breakdown(M, rate, theta), rate


def ce_at_level(M: int, theta: float) -> tuple[DistortionBreakdown, float]:
    """CE breakdown and rate for a water level on the standard density.

    The decimated walk has spectrum ``M S(phi)``, so ``theta`` here is the
    decimated-walk water level divided by ``M``.
    """
    rate = rate_at_level(SpectralDensity.standard(), theta, M)
    return _ce_breakdown(M, rate, theta), rate


def _ec_breakdown(M, R, theta):
    coding = M * _shifted_min_integral(M, theta)
    return DistortionBreakdown(Scheme.EC, M, R, theta, mmse_interpolation(M), coding)


def _ce_breakdown(M, R, theta):
    coding = (2 * M**2 + 1) / (3 * M) * _standard_min_integral(theta)
    cross = (M**2 - 1) / (3 * M) * _standard_cos_integral(theta)
    return DistortionBreakdown(Scheme.CE, M, R, theta, mmse_interpolation(M), coding, cross)


def drf_source(R: float) -> DistortionBreakdown:
    """Distortion-rate function of the undecimated walk."""
    if not R > 0:
        raise DomainError(f"R must be positive, got {R!r}")
    theta = math.exp(log_water_level(SpectralDensity.standard(), 1, R))
    return DistortionBreakdown(Scheme.SOURCE_DRF, 1, float(R), theta, 0.0,
                               _standard_min_integral(theta))


def distortion_ec(cfg: SchemeConfig) -> DistortionBreakdown:
    """Optimal (estimate-and-compress) distortion."""
    theta = math.exp(log_water_level(SpectralDensity.shifted(cfg.M), cfg.M, cfg.R))
    return _ec_breakdown(cfg.M, cfg.R, theta)


def distortion_ce(cfg: SchemeConfig) -> DistortionBreakdown:
    """Compress-and-estimate distortion."""
    theta = math.exp(log_water_level(SpectralDensity.standard(), cfg.M, cfg.R))
    return _ce_breakdown(cfg.M, cfg.R, theta)


def _ec_root(M):
    return math.sqrt(3.0 + 6.0 / M**2)


def high_rate_ce(cfg: SchemeConfig) -> HighRate:
    M, MR = cfg.M, cfg.M * cfg.R
    value = mmse_interpolation(M) + (2 * M**2 + 1) / (3 * M) * 2.0 ** (-2 * MR)
    return HighRate(value, MR >= 1.0)


def high_rate_ec(cfg: SchemeConfig) -> HighRate:
    M, MR = cfg.M, cfg.M * cfg.R
    coef = (1 + (2 + _ec_root(M)) * M**2) / (6 * M)
    value = mmse_interpolation(M) + coef * 2.0 ** (-2 * MR)
    return HighRate(value, MR >= ec_threshold(M))


def ec_threshold(M: int) -> float:
    """Smallest ``M R`` at which the EC water level sits below the whole
    shifted density, so that the high-rate closed form holds."""
    if M < 1:
        raise DomainError(f"M must be >= 1, got {M!r}")
    return math.log2(1.0 + 3.0 / _ec_root(M))


def ce_ec_gap(cfg: SchemeConfig) -> float:
    """Excess distortion of CE over EC."""
    M, MR = cfg.M, cfg.M * cfg.R
    if MR >= ec_threshold(M):
        return (1 + (2 - _ec_root(M)) * M**2) / (6 * M) * 2.0 ** (-2 * MR)
    return distortion_ce(cfg).total - distortion_ec(cfg).total


@dataclass(frozen=True)
class MaxGap:
    M: int
    MR: float
    relative_gap: float
    d_ec: float
    d_ce: float

    @property
    def R(self) -> float:
        return self.MR / self.M


def _relative_gap(M, MR):
    cfg = SchemeConfig(M, MR / M)
    ec = distortion_ec(cfg).total
    return ce_ec_gap(cfg) / ec


def max_relative_gap(M: int, grid_points: int = 60) -> MaxGap:
    """Largest ``(D_CE - D_EC) / D_EC`` over the bitrate at fixed ``M``.

    Above the EC threshold the ratio decreases in ``R``, but the peak sits
    in the transition region below it, so the coarse scan starts well
    below the threshold before a golden-section refinement.
    """
    top = ec_threshold(M) + 6.0
    grid = np.linspace(0.02, top, grid_points)
    values = np.array([_relative_gap(M, mr) for mr in grid])
    i = int(np.argmax(values))
    if i == 0 or i == grid.size - 1:
        best = grid[i]
    else:
        res = optimize.minimize_scalar(lambda mr: -_relative_gap(M, mr),
                                       bracket=(grid[i - 1], grid[i], grid[i + 1]),
                                       method="golden", tol=1e-8)
        best = float(res.x)
    cfg = SchemeConfig(M, best / M)
    ec, ce = distortion_ec(cfg).total, distortion_ce(cfg).total
    return MaxGap(M, best, (ce - ec) / ec, ec, ce)


def interpolated_coding_mse(dims: WalkDims, m: SecondMoments) -> float:
    """MSE of interpolating the coded decimated walk, relative to the
    interpolation of the uncoded one, from the coding-error moments.

    Samples are taken at times ``0..N-1`` in blocks ``[nM, (n+1)M)``, so
    the last coding error is only partially weighted; this is where the
    boundary term comes from.
    """
    N, M = dims.N, dims.M
    value = ((2 * M**2 + 1) / (3 * N * M) * m.var.sum()
             + (M**2 - 1) / (3 * N * M) * m.lag1.sum()
             - (2 * M**2 + 3 * M + 1) / (6 * N * M) * m.var[-1])
    if value < -1e-12:
        raise InconsistencyError(f"interpolation MSE came out negative: {value!r}")
    return max(float(value), 0.0)


def test_channel_moments(dims: WalkDims, theta: float) -> SecondMoments:
    """Exact error moments of the Gaussian test channel for the decimated walk.

    ``theta`` is the water level on the decimated walk's own spectrum
    (eigenvalues ``M / (2 sin(...))**2``).
    """
    if not theta > 0:
        raise DomainError(f"water level must be positive, got {theta!r}")
    lam = berger_eigenvalues(dims.N_M, scale=dims.M)
    U = berger_eigenvectors(dims.N_M)
    w = np.minimum(theta, lam)
    var = (U**2) @ w
    lag1 = (U[:-1] * U[1:]) @ w
    return SecondMoments(dims, var, lag1)


test_channel_moments.__test__ = False


def finite_n_dce(dims: WalkDims, theta: float) -> float:
    """Exact CE distortion at finite ``N`` under the Gaussian test channel."""
    return mmse_interpolation(dims.M) + interpolated_coding_mse(dims, test_channel_moments(dims, theta))


def decimated_rate(dims: WalkDims, theta: float) -> float:
    """Bits per source sample spent by water-filling the decimated walk at ``theta``."""
    lam = berger_eigenvalues(dims.N_M, scale=dims.M)
    return float(np.maximum(np.log(lam / theta), 0.0).sum()) / (2 * dims.N * LN2)
