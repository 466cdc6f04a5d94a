"""Covariances, eigen-systems and spectral densities of the random walk.

Three Gaussian vectors appear throughout the package:

* the source walk ``X_1..X_N`` with ``Cov(X_i, X_j) = min(i, j)``;
* its decimation ``Y_n = X_{nM}`` (a walk with increment variance ``M``);
* the MMSE estimate of ``X`` from ``Y``, i.e. the piecewise-linear
  interpolation of ``Y`` with the walk pinned to zero at time 0.

Indices in the public API are 1-based, matching the way the walk is
written mathematically; arrays are ordinary 0-based numpy arrays.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from walkrd.errors import DomainError

#: Largest ``N`` for which a dense ``N x N`` covariance is materialised.
MAX_COVARIANCE_SIZE = 8192


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class WalkDims:
    """Source length ``N``, decimation factor ``M`` and decimated length."""

    N: int
    M: int

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 1:
            raise DomainError(f"decimation factor must be a positive integer, got {self.M!r}")
        if int(self.N) != self.N or self.N < self.M:
            raise DomainError(f"source length must be an integer >= M, got N={self.N!r}, M={self.M}")
        if self.N % self.M:
            raise DomainError(f"N={self.N} is not a multiple of M={self.M}")

    @property
    def N_M(self) -> int:
        return self.N // self.M


class CovarianceKind(enum.Enum):
    SOURCE = "source"
    DECIMATED = "decimated"
    INTERPOLATED = "interpolated"


@dataclass(frozen=True)
class CovarianceMatrix:
    kind: CovarianceKind
    dims: WalkDims
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "entries", _frozen(self.entries))

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries))


class EigenSource(enum.Enum):
    CLOSED_FORM = "closed_form"
    BRUTE_FORCE = "brute_force"


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues sorted descending, with optional orthonormal eigenvectors.

    ``vectors[:, i]`` is the eigenvector of ``values[i]``.  Round-off
    negatives down to ``-1e-10`` are clamped to zero; anything more
    negative is rejected.
    """

    values: np.ndarray
    vectors: np.ndarray | None = field(default=None, repr=False)
    source: EigenSource = EigenSource.CLOSED_FORM

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise DomainError("eigenvalues must be a vector")
        if values.size and values.min() < -1e-10:
            raise DomainError(f"eigenvalue {values.min()!r} is negative beyond tolerance")
        order = np.argsort(-values, kind="stable")
        object.__setattr__(self, "values", _frozen(np.maximum(values[order], 0.0)))
        if self.vectors is not None:
            vectors = np.asarray(self.vectors, dtype=float)
            if vectors.shape[1] != values.size:
                raise DomainError("one eigenvector column is needed per eigenvalue")
            object.__setattr__(self, "vectors", _frozen(vectors[:, order]))

    def __len__(self) -> int:
        return self.values.size


class DensityFamily(enum.Enum):
    STANDARD = "standard"
    SHIFTED = "shifted"


@dataclass(frozen=True)
class SpectralDensity:
    """Limiting eigenvalue density of the walk (``STANDARD``) or of its
    interpolated decimation (``SHIFTED``).

    The standard density is ``S(phi) = (2 sin(pi phi / 2))**-2`` on
    ``(0, 1]``.  The shifted one subtracts ``(1 - M**-2) / 6``, which is
    positive for ``M > 1`` and leaves ``S`` unchanged at ``M = 1``.
    """

    family: DensityFamily = DensityFamily.STANDARD
    M: int = 1

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 1:
            raise DomainError(f"M must be a positive integer, got {self.M!r}")

    @classmethod
    def standard(cls) -> SpectralDensity:
        return cls(DensityFamily.STANDARD, 1)

    @classmethod
    def shifted(cls, M: int) -> SpectralDensity:
        return cls(DensityFamily.SHIFTED, M)

    @property
    def shift(self) -> float:
        if self.family is DensityFamily.STANDARD:
            return 0.0
        return (1.0 - self.M**-2) / 6.0

    @property
    def minimum(self) -> float:
        """Value at ``phi = 1``; both densities are strictly decreasing."""
        return 0.25 - self.shift

    def __call__(self, phi):
        phi = np.asarray(phi, dtype=float)
        return (2.0 * np.sin(0.5 * np.pi * phi)) ** -2 - self.shift

    def log(self, phi):
        """Natural log of the density, stable as ``phi -> 0``."""
        phi = np.asarray(phi, dtype=float)
        log_s = -2.0 * np.log(2.0 * np.sin(0.5 * np.pi * phi))
        if self.shift == 0.0:
            return log_s
        # log(S - c) = log S + log1p(-c / S)
        return log_s + np.log1p(-self.shift * np.exp(-log_s))

    def crossing(self, theta: float) -> float | None:
        """Frequency where the density equals ``theta``, or ``None`` when the
        density exceeds ``theta`` on the whole of ``(0, 1)``."""
        level = theta + self.shift
        if level <= 0.25:
            return None
        return 2.0 / math.pi * math.asin(1.0 / (2.0 * math.sqrt(level)))


def mmse_interpolation(M: int) -> float:
    """Per-sample MSE of linear interpolation from every ``M``-th sample."""
    if M < 1:
        raise DomainError(f"M must be >= 1, got {M!r}")
    return (M - 1.0 / M) / 6.0


def bridge_variance(r: int, M: int) -> float:
    """Variance of the walk ``r`` steps into a block whose endpoints are known."""
    if M < 1:
        raise DomainError(f"M must be >= 1, got {M!r}")
    if not 0 <= r <= M:
        raise DomainError(f"offset r={r!r} outside [0, {M}]")
    return r * (M - r) / M


def density_value(d: SpectralDensity, phi: float) -> float:
    if not 0.0 < phi <= 1.0:
        raise DomainError(f"phi={phi!r} outside (0, 1]")
    return float(d(phi))


def berger_eigenvalues(N: int, scale: float = 1.0) -> np.ndarray:
    """Eigenvalues of ``scale * min(i, j)``, ``i, j = 1..N``, descending.

    Exact at every ``N``: ``lambda_k = scale / (2 sin((2k-1) pi / (2(2N+1))))**2``.
    """
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N!r}")
    k = np.arange(1, N + 1)
    return scale * (2.0 * np.sin((2 * k - 1) / (2 * N + 1) * np.pi / 2)) ** -2


def berger_eigenvectors(N: int) -> np.ndarray:
    """``N x N`` matrix whose column ``k-1`` is the unit eigenvector for
    ``berger_eigenvalues(N)[k-1]``."""
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N!r}")
    n = np.arange(1, N + 1)[:, None]
    k = np.arange(1, N + 1)[None, :]
    u = np.sin((2 * k - 1) / (2 * N + 1) * np.pi * n)
    return u / np.linalg.norm(u, axis=0)


def eigenvector_entry(k: int, n: int, N: int) -> float:
    """Entry ``n`` of the ``k``-th unit eigenvector of ``min(i, j)`` (1-based)."""
    if not (1 <= k <= N and 1 <= n <= N):
        raise DomainError(f"indices k={k}, n={n} outside 1..{N}")
    tau = (2 * k - 1) / (2 * N + 1) * math.pi
    norm = math.sqrt(sum(math.sin(tau * j) ** 2 for j in range(1, N + 1)))
    return math.sin(tau * n) / norm


def interp_eigenvalues_asymptotic(dims: WalkDims) -> np.ndarray:
    """Closed-form approximation to the nonzero spectrum of the interpolated walk.

    Only asymptotically exact.  Every value is at least
    ``M**2/4 - (M**2-1)/6 > 0``; a negative one would mean a broken
    formula, so it raises rather than being clamped.
    """
    N, M = dims.N, dims.M
    k = np.arange(1, dims.N_M + 1)
    lam = M**2 * (2.0 * np.sin((2 * k - 1) * M / (2 * N + 1) * np.pi / 2)) ** -2 - (M**2 - 1) / 6.0
    bad = np.flatnonzero(lam < 0)
    if bad.size:
        raise DomainError(
            f"closed-form eigenvalue k={bad[0] + 1} is negative ({lam[bad[0]]:.6g}) for N={N}, M={M}"
        )
    return lam


def interpolation_matrix(dims: WalkDims) -> np.ndarray:
    """``N x N_M`` matrix mapping ``Y`` to the interpolated walk.

    Row ``m`` (1-based) with ``m = nM + r``, ``0 < r < M`` puts ``(M-r)/M``
    on ``Y_n`` and ``r/M`` on ``Y_{n+1}``; the weight on ``Y_0 = 0`` is
    dropped.  Rows ``m = jM`` select ``Y_j``.
    """
    N, M = dims.N, dims.M
    W = np.zeros((N, dims.N_M))
    m = np.arange(1, N + 1)
    n, r = np.divmod(m, M)
    on_grid = r == 0
    W[m[on_grid] - 1, n[on_grid] - 1] = 1.0
    left = ~on_grid & (n >= 1)
    W[m[left] - 1, n[left] - 1] = (M - r[left]) / M
    W[m[~on_grid] - 1, n[~on_grid]] = r[~on_grid] / M
    return W


def _min_matrix(n: int, scale: float) -> np.ndarray:
    idx = np.arange(1, n + 1)
    return scale * np.minimum.outer(idx, idx).astype(float)


def covariance_matrix(kind: CovarianceKind | str, dims: WalkDims,
                      max_size: int = MAX_COVARIANCE_SIZE) -> CovarianceMatrix:
    kind = CovarianceKind(kind)
    if dims.N > max_size:
        raise DomainError(f"N={dims.N} exceeds the covariance size cap {max_size}")
    if kind is CovarianceKind.SOURCE:
        entries = _min_matrix(dims.N, 1.0)
    elif kind is CovarianceKind.DECIMATED:
        entries = _min_matrix(dims.N_M, float(dims.M))
    else:
        W = interpolation_matrix(dims)
        entries = W @ _min_matrix(dims.N_M, float(dims.M)) @ W.T
    return CovarianceMatrix(kind, dims, entries)


def reduced_interpolated_matrix(dims: WalkDims) -> np.ndarray:
    """``N_M x N_M`` matrix sharing the nonzero spectrum of the interpolated
    covariance ``W S_Y W^T``.

    With ``S_Y = L L^T`` the nonzero eigenvalues of ``W L (W L)^T`` equal
    those of ``L^T (W^T W) L``.  ``L`` is ``sqrt(M)`` times the lower
    triangle of ones.
    """
    W = interpolation_matrix(dims)
    L = math.sqrt(dims.M) * np.tril(np.ones((dims.N_M, dims.N_M)))
    G = L.T @ (W.T @ W) @ L
    return 0.5 * (G + G.T)
