"""Seeded Monte Carlo and brute-force oracles.

Random numbers come from Philox streams keyed by ``(seed, trial, stream)``
so that each trial is reproducible on its own, independent of how many
trials run or in which order.  Normals are produced by the inverse normal
CDF applied to 53-bit uniforms, which consumes a fixed amount of the
stream per variate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from walkrd.errors import DomainError
from walkrd.jacobi import MAX_SIZE, jacobi_eigh
from walkrd.spectra import (
    CovarianceKind,
    CovarianceMatrix,
    EigenSource,
    EigenSystem,
    WalkDims,
    berger_eigenvalues,
    berger_eigenvectors,
    interpolation_matrix,
    reduced_interpolated_matrix,
)

#: Test-channel draws are generated in fixed-size chunks, one key per chunk.
CHUNK = 4096

_WALK_STREAM = 0
_RECON_STREAM = 1
_NOISE_STREAM = 2
_BATCH = 64


def keyed_normals(seed: int, trial: int, stream: int, size) -> np.ndarray:
    """Standard normals from the Philox stream keyed by ``(seed, trial, stream)``."""
    if seed < 0 or seed >= 2**64:
        raise DomainError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    ss = np.random.SeedSequence(seed, spawn_key=(trial, stream))
    gen = np.random.Generator(np.random.Philox(ss))
    u = gen.random(size) + 2.0**-54  # shift [0, 1) into (0, 1)
    return ndtri(u)


@dataclass(frozen=True)
class WalkPath:
    dims: WalkDims
    values: np.ndarray = field(repr=False)
    seed: int

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.values, prepend=0.0)


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    trials: int

    @classmethod
    def from_samples(cls, samples) -> McEstimate:
        samples = np.asarray(samples, dtype=float)
        n = samples.shape[0]
        return cls(float(samples.mean()), float(samples.std(ddof=1) / math.sqrt(n)), n)

    def within(self, target: float, k: float = 3.0) -> bool:
        return abs(self.mean - target) <= k * self.std_error


def sample_walk(dims: WalkDims, seed: int, trial: int = 0) -> WalkPath:
    return WalkPath(dims, np.cumsum(keyed_normals(seed, trial, _WALK_STREAM, dims.N)), seed)


def decimate(path: WalkPath | np.ndarray, dims: WalkDims | None = None) -> np.ndarray:
    """Every ``M``-th sample, ``Y_n = X_{nM}``."""
    if isinstance(path, WalkPath):
        dims, x = path.dims, path.values
    else:
        x = np.asarray(path)
    return x[..., dims.M - 1::dims.M]


def interpolate(y, dims: WalkDims) -> np.ndarray:
    """Piecewise-linear reconstruction of the walk from its decimation.

    Accepts a single vector of length ``N_M`` or a stack of them along the
    leading axes.
    """
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != dims.N_M:
        raise DomainError(f"expected {dims.N_M} decimated samples, got {y.shape[-1]}")
    return y @ interpolation_matrix(dims).T


@dataclass(frozen=True)
class MmseResult:
    """Monte Carlo interpolation error: overall and by offset within a block.

    ``by_offset[r]`` is the error variance at times ``jM + r``; offset 0
    is the grid itself.
    """

    overall: McEstimate
    by_offset: tuple[McEstimate, ...]


def empirical_mmse(dims: WalkDims, trials: int, seed: int) -> MmseResult:
    if trials < 2:
        raise DomainError("need at least two trials for a standard error")
    M = dims.M
    per_trial = np.empty(trials)
    per_offset = np.empty((trials, M))
    W = interpolation_matrix(dims)
    for start in range(0, trials, _BATCH):
        batch = range(start, min(start + _BATCH, trials))
        x = np.stack([sample_walk(dims, seed, t).values for t in batch])
        e2 = (x - decimate(x, dims) @ W.T) ** 2
        per_trial[batch.start:batch.stop] = e2.mean(axis=1)
        # last column of each block is the grid point, i.e. offset 0
        per_offset[batch.start:batch.stop] = np.roll(e2.reshape(len(batch), -1, M).mean(axis=1), 1, axis=1)
    offsets = tuple(McEstimate.from_samples(per_offset[:, r]) for r in range(M))
    return MmseResult(McEstimate.from_samples(per_trial), offsets)


def brute_force_spectrum(m: CovarianceMatrix | np.ndarray, want_vectors: bool = False) -> EigenSystem:
    """Jacobi eigen-decomposition of a covariance or symmetric matrix.

    For an interpolated covariance only the nonzero spectrum is computed,
    from the reduced ``N_M x N_M`` form.
    """
    if isinstance(m, CovarianceMatrix):
        if m.kind is CovarianceKind.INTERPOLATED:
            if m.dims.N_M > MAX_SIZE:
                raise DomainError(f"N_M={m.dims.N_M} exceeds the Jacobi cap {MAX_SIZE}")
            if want_vectors:
                raise DomainError("eigenvectors are not available from the reduced form")
            values, _ = jacobi_eigh(reduced_interpolated_matrix(m.dims))
            return EigenSystem(values, None, EigenSource.BRUTE_FORCE)
        m = m.entries
    values, vectors = jacobi_eigh(m, want_vectors)
    return EigenSystem(values, vectors, EigenSource.BRUTE_FORCE)


@dataclass(frozen=True)
class TestChannelDraw:
    """Draws from the Gaussian test channel ``Y = Y_hat + eps``, one per row."""

    y: np.ndarray
    y_hat: np.ndarray
    eps: np.ndarray


TestChannelDraw.__test__ = False


def sample_test_channel(dims: WalkDims, theta: float, seed: int, samples: int = 1) -> TestChannelDraw:
    """Sample the rate-distortion-achieving channel of the decimated walk.

    In the eigenbasis ``U`` of the decimated covariance, modes below the
    water level are lost entirely and the others keep variance ``theta``
    of noise: ``eps = U Z`` with ``Z ~ N(0, min(lambda, theta))`` and an
    independent ``Y_hat = U V`` with ``V ~ N(0, max(lambda - theta, 0))``.
    """
    if not theta > 0:
        raise DomainError(f"water level must be positive, got {theta!r}")
    if samples < 1:
        raise DomainError("samples must be >= 1")
    n = dims.N_M
    lam = berger_eigenvalues(n, scale=dims.M)
    U = berger_eigenvectors(n)
    noise_sd = np.sqrt(np.minimum(lam, theta))
    recon_sd = np.sqrt(np.maximum(lam - theta, 0.0))
    recon = np.empty((samples, n))
    noise = np.empty((samples, n))
    for c, start in enumerate(range(0, samples, CHUNK)):
        stop = min(start + CHUNK, samples)
        recon[start:stop] = keyed_normals(seed, c, _RECON_STREAM, (CHUNK, n))[:stop - start]
        noise[start:stop] = keyed_normals(seed, c, _NOISE_STREAM, (CHUNK, n))[:stop - start]
    y_hat = (recon * recon_sd) @ U.T
    eps = (noise * noise_sd) @ U.T
    return TestChannelDraw(y_hat + eps, y_hat, eps)
