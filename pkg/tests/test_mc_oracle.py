import numpy as np
import pytest

from walkrd.errors import DomainError
from walkrd.mc_oracle import (
    CHUNK,
    McEstimate,
    brute_force_spectrum,
    decimate,
    empirical_mmse,
    interpolate,
    keyed_normals,
    sample_test_channel,
    sample_walk,
)
from walkrd.schemes import test_channel_moments
from walkrd.spectra import CovarianceKind, WalkDims, berger_eigenvalues, bridge_variance, covariance_matrix


def test_walk_deterministic_and_increments():
    dims = WalkDims(1000, 4)
    a, b = sample_walk(dims, 42), sample_walk(dims, 42)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, sample_walk(dims, 43).values)
    assert not np.array_equal(a.values, sample_walk(dims, 42, trial=1).values)
    # differencing the cumulative sum recovers the draws up to rounding
    assert np.allclose(a.increments, keyed_normals(42, 0, 0, 1000), rtol=0, atol=1e-12)
    assert np.array_equal(a.values, np.cumsum(keyed_normals(42, 0, 0, 1000)))


def test_walk_increment_statistics():
    inc = sample_walk(WalkDims(65536, 1), 0).increments
    assert 0.97 <= inc.var() <= 1.03
    assert abs(inc.mean()) <= 0.012


def test_keyed_normals_validation():
    with pytest.raises(DomainError):
        keyed_normals(-1, 0, 0, 3)
    assert np.all(np.isfinite(keyed_normals(0, 0, 0, 10**5)))


def test_decimate():
    path = sample_walk(WalkDims(12, 1), 1)
    assert np.array_equal(decimate(path), path.values)
    assert np.array_equal(decimate(np.arange(1.0, 5.0), WalkDims(4, 2)), [2.0, 4.0])
    dims = WalkDims(12, 3)
    assert decimate(sample_walk(dims, 1)).shape == (4,)


def test_interpolate():
    assert np.allclose(interpolate([2.0, 6.0], WalkDims(4, 2)), [1.0, 2.0, 4.0, 6.0])
    y = np.random.default_rng(0).standard_normal(5)
    assert np.array_equal(interpolate(y, WalkDims(5, 1)), y)
    dims = WalkDims(20, 4)
    assert np.array_equal(interpolate(y, dims)[3::4], y)
    with pytest.raises(DomainError):
        interpolate([1.0, 2.0], dims)


def test_mc_estimate():
    est = McEstimate.from_samples([1.0, 2.0, 3.0, 4.0])
    assert est.mean == 2.5
    assert est.std_error == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2)
    assert est.within(2.5 + 2.9 * est.std_error)
    assert not est.within(2.5 + 3.1 * est.std_error)


def test_empirical_mmse_m1_is_zero():
    res = empirical_mmse(WalkDims(64, 1), 5, 0)
    assert res.overall.mean == 0.0 and res.overall.std_error == 0.0
    with pytest.raises(DomainError):
        empirical_mmse(WalkDims(64, 1), 1, 0)


def test_empirical_mmse_small():
    dims = WalkDims(1024, 4)
    res = empirical_mmse(dims, 300, 7)
    assert res.overall.within(0.625)
    for r, est in enumerate(res.by_offset):
        if r == 0:
            assert est.mean == 0.0
        else:
            assert est.within(bridge_variance(r, 4))


def test_empirical_mmse_deterministic():
    dims = WalkDims(64, 4)
    assert empirical_mmse(dims, 70, 3) == empirical_mmse(dims, 70, 3)
    assert empirical_mmse(dims, 70, 3) != empirical_mmse(dims, 70, 4)


def test_brute_force_spectrum_paths():
    es = brute_force_spectrum(covariance_matrix(CovarianceKind.SOURCE, WalkDims(10, 1)), want_vectors=True)
    assert np.allclose(es.values, berger_eigenvalues(10), atol=1e-12)
    assert es.vectors.shape == (10, 10)
    es = brute_force_spectrum(np.array([[2.0, 0.0], [0.0, 1.0]]))
    assert list(es.values) == [2.0, 1.0]
    with pytest.raises(DomainError):
        brute_force_spectrum(covariance_matrix(CovarianceKind.INTERPOLATED, WalkDims(8, 2)), want_vectors=True)


def test_test_channel_edge_cases():
    dims = WalkDims(32, 4)
    draw = sample_test_channel(dims, 1e-14, 0, 10)
    assert np.max(np.abs(draw.eps)) < 1e-5
    assert np.allclose(draw.y, draw.y_hat, atol=1e-5)
    lam_max = berger_eigenvalues(8, scale=4).max()
    draw = sample_test_channel(dims, lam_max, 0, 10)
    assert np.array_equal(draw.y_hat, np.zeros_like(draw.y_hat))
    assert np.array_equal(draw.eps, draw.y)
    with pytest.raises(DomainError):
        sample_test_channel(dims, 0.0, 0)


def test_test_channel_chunking_is_prefix_stable():
    dims = WalkDims(16, 4)
    small = sample_test_channel(dims, 0.5, 9, 10)
    big = sample_test_channel(dims, 0.5, 9, CHUNK + 10)
    assert np.array_equal(small.y, big.y[:10])


def test_test_channel_moments_match():
    dims = WalkDims(256, 4)
    n = 20000
    draw = sample_test_channel(dims, 0.5, 11, n)
    exact = test_channel_moments(dims, 0.5)
    v, c = exact.var, exact.lag1
    z_var = np.abs((draw.eps**2).mean(0) - v) / np.sqrt(2 * v**2 / n)
    z_lag = np.abs((draw.eps[:, :-1] * draw.eps[:, 1:]).mean(0) - c) / np.sqrt((v[:-1] * v[1:] + c**2) / n)
    # Bonferroni over 64 entries at the single-test 3-sigma level is about 4.1
    assert z_var.max() < 4.0 and z_lag.max() < 4.0
    ratio = draw.y.var(axis=0) / (4 * np.arange(1, 65))
    assert np.all((ratio > 0.9) & (ratio < 1.1))
