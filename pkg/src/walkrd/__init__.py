"""Rate-distortion limits for a Gaussian random walk observed through decimation.

The package evaluates the distortion attainable when a factor-``M``
decimated random walk is compressed at ``R`` bits per source sample and
the full walk is reconstructed, under estimate-and-compress (EC) and
compress-and-estimate (CE) coding, together with brute-force and Monte
Carlo oracles for every closed form.
"""

from walkrd.errors import ConvergenceError, DomainError, QuadratureError
from walkrd.schemes import (
    DistortionBreakdown,
    SchemeConfig,
    ce_ec_gap,
    distortion_ce,
    distortion_ec,
    drf_source,
    ec_threshold,
    high_rate_ce,
    high_rate_ec,
)
from walkrd.spectra import SpectralDensity, WalkDims, mmse_interpolation

__all__ = [
    "ConvergenceError",
    "DistortionBreakdown",
    "DomainError",
    "QuadratureError",
    "SchemeConfig",
    "SpectralDensity",
    "WalkDims",
    "ce_ec_gap",
    "distortion_ce",
    "distortion_ec",
    "drf_source",
    "ec_threshold",
    "high_rate_ce",
    "high_rate_ec",
    "mmse_interpolation",
]

__version__ = "0.1.0"
