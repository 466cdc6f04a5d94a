import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from walkrd.errors import DomainError, InconsistencyError
from walkrd.quadrature import QuadratureSpec, integrate
from walkrd.schemes import (
    DistortionBreakdown,
    Scheme,
    SchemeConfig,
    SecondMoments,
    ce_at_level,
    ce_ec_gap,
    decimated_rate,
    distortion_ce,
    distortion_ec,
    drf_source,
    ec_at_level,
    ec_threshold,
    finite_n_dce,
    high_rate_ce,
    high_rate_ec,
    interpolated_coding_mse,
    max_relative_gap,
    test_channel_moments,
)
from walkrd.spectra import SpectralDensity, WalkDims, berger_eigenvalues, mmse_interpolation
from walkrd.validation import GRID_M, GRID_R, coding_mse_by_expansion, random_moments
from walkrd.waterfill import finite_n_rd_point, rate_at_level


def test_config_validation():
    assert SchemeConfig(3.0, 1).M == 3
    for M, R in ((0, 1.0), (1.5, 1.0), (2, 0.0), (2, -1.0)):
        with pytest.raises(DomainError):
            SchemeConfig(M, R)


def test_drf_source_values():
    assert drf_source(1.0).total == pytest.approx(0.25, abs=1e-12)
    assert drf_source(2.0).total == pytest.approx(0.0625, abs=1e-12)
    half = drf_source(0.5)
    assert half.total > 0.25
    assert rate_at_level(SpectralDensity.standard(), half.theta) == pytest.approx(0.5, abs=1e-10)
    assert half.mmse_term == 0.0


def test_m2_r1_values():
    cfg = SchemeConfig(2, 1.0)
    ec, ce = distortion_ec(cfg), distortion_ce(cfg)
    assert ec.total == pytest.approx(0.25 + (1 + (2 + math.sqrt(4.5)) * 4) / 12 / 16, abs=1e-10)
    assert ec.total == pytest.approx(0.34107, abs=1e-5)
    assert ec.mmse_term == 0.25
    assert ec.coding_term == pytest.approx(0.09107, abs=1e-5)
    assert ce.total == pytest.approx(0.34375, abs=1e-10)
    assert abs(ce.cross_term) < 1e-12
    assert high_rate_ce(cfg).distortion == pytest.approx(0.34375, abs=1e-15)
    assert high_rate_ec(cfg).distortion == pytest.approx(0.25 + 1.45711 / 16, abs=1e-6)
    assert ce_ec_gap(cfg) == pytest.approx(0.002681, abs=1e-6)
    assert ce_ec_gap(cfg) == pytest.approx(high_rate_ce(cfg).distortion - high_rate_ec(cfg).distortion, abs=1e-15)


def test_m1_values():
    cfg = SchemeConfig(1, 1.0)
    for value in (distortion_ec(cfg).total, distortion_ce(cfg).total, high_rate_ce(cfg).distortion,
                  high_rate_ec(cfg).distortion):
        assert value == pytest.approx(0.25, abs=1e-12)
    for R in (1.0, 2.5):
        assert ce_ec_gap(SchemeConfig(1, R)) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("R", GRID_R)
def test_collapse_at_m1(R):
    dx = drf_source(R).total
    cfg = SchemeConfig(1, R)
    assert abs(distortion_ec(cfg).total - dx) < 1e-9
    assert abs(distortion_ce(cfg).total - dx) < 1e-9


@pytest.mark.parametrize("M", GRID_M)
def test_sandwich_and_monotone_in_rate(M):
    ec = np.array([distortion_ec(SchemeConfig(M, R)).total for R in GRID_R])
    ce = np.array([distortion_ce(SchemeConfig(M, R)).total for R in GRID_R])
    dx = np.array([drf_source(R).total for R in GRID_R])
    assert np.all(ce >= ec - 1e-9)
    assert np.all(ec >= np.maximum(mmse_interpolation(M), dx) - 1e-9)
    assert np.all(np.diff(ec) <= 0) and np.all(np.diff(ce) <= 0)


@pytest.mark.parametrize("R", GRID_R)
def test_monotone_in_m(R):
    for f in (distortion_ec, distortion_ce):
        totals = [f(SchemeConfig(M, R)).total for M in GRID_M]
        assert np.all(np.diff(totals) >= 0)


@pytest.mark.parametrize("M", GRID_M)
def test_high_rate_limit(M):
    cfg = SchemeConfig(M, 30.0 / M)
    mm = mmse_interpolation(M)
    assert distortion_ec(cfg).total - mm < 1e-12
    assert distortion_ce(cfg).total - mm < 1e-12
    assert distortion_ec(cfg).total - distortion_ec(cfg).mmse_term < 1e-15 * max(1, M)


def test_breakdown_additivity():
    b = distortion_ce(SchemeConfig(4, 0.1))
    assert b.total == b.mmse_term + b.coding_term + b.cross_term
    assert b.scheme is Scheme.CE
    assert b.total >= b.mmse_term >= 0
    with pytest.raises(Exception):
        b.total = 1.0  # frozen


@pytest.mark.parametrize("M", GRID_M)
def test_cross_term_vanishes_at_high_rate(M):
    cfg = SchemeConfig(M, 2.0 / M + 0.5)
    b = distortion_ce(cfg)
    assert b.theta <= 0.25
    assert abs(b.cross_term) < 1e-12


def test_threshold_values():
    assert ec_threshold(1) == pytest.approx(1.0, abs=1e-15)
    assert ec_threshold(2) == pytest.approx(1.27155, abs=1e-5)
    ms = [1, 2, 4, 10, 100, 10**4]
    vals = [ec_threshold(M) for M in ms]
    assert np.all(np.diff(vals) > 0)
    assert vals[-1] == pytest.approx(math.log2(1 + math.sqrt(3)), abs=1e-7)
    # at threshold the EC water level touches the minimum of the shifted density
    for M in (2, 10):
        d = SpectralDensity.shifted(M)
        assert M * rate_at_level(d, d.minimum, M) == pytest.approx(ec_threshold(M), abs=1e-10)


def test_validity_flags():
    assert not high_rate_ce(SchemeConfig(4, 0.2)).valid
    assert high_rate_ce(SchemeConfig(4, 0.25)).valid
    thr = ec_threshold(4)
    assert high_rate_ec(SchemeConfig(4, thr / 4 + 1e-9)).valid
    assert not high_rate_ec(SchemeConfig(4, thr / 4 - 1e-9)).valid


@pytest.mark.parametrize("M", GRID_M)
def test_gap_consistency(M):
    for off in (0.1, 1.0, 3.0):
        cfg = SchemeConfig(M, (ec_threshold(M) + off) / M)
        closed = high_rate_ce(cfg).distortion - high_rate_ec(cfg).distortion
        integral = distortion_ce(cfg).total - distortion_ec(cfg).total
        assert ce_ec_gap(cfg) == pytest.approx(closed, abs=1e-12)
        assert ce_ec_gap(cfg) == pytest.approx(integral, abs=1e-8)


def test_gap_below_threshold_uses_integrals():
    cfg = SchemeConfig(100, 0.01)
    assert ce_ec_gap(cfg) == distortion_ce(cfg).total - distortion_ec(cfg).total
    assert ce_ec_gap(cfg) > 0


def test_max_relative_gap():
    mg = max_relative_gap(100)
    assert mg.relative_gap == pytest.approx(0.027, abs=0.003)
    assert mg.MR < ec_threshold(100)
    assert (mg.d_ce - mg.d_ec) / mg.d_ec == mg.relative_gap
    # the D_CE-denominator reading lands inside the same band
    assert (mg.d_ce - mg.d_ec) / mg.d_ce == pytest.approx(0.027, abs=0.003)


def test_level_helpers_agree_with_rate_solvers():
    b, rate = ec_at_level(4, 0.3)
    assert distortion_ec(SchemeConfig(4, rate)).total == pytest.approx(b.total, rel=1e-9)
    b, rate = ce_at_level(4, 0.3)
    assert distortion_ce(SchemeConfig(4, rate)).total == pytest.approx(b.total, rel=1e-9)


def test_second_moments_validation():
    dims = WalkDims(6, 2)
    SecondMoments(dims, [1, 1, 1], [1, 0])
    with pytest.raises(DomainError):
        SecondMoments(dims, [1, 1], [0])
    with pytest.raises(DomainError):
        SecondMoments(dims, [1, -1, 1], [0, 0])
    with pytest.raises(DomainError):
        SecondMoments(dims, [1, 1, 1], [1.1, 0])


def test_coding_mse_examples():
    dims = WalkDims(4, 2)
    assert interpolated_coding_mse(dims, SecondMoments(dims, [0, 0], [0])) == 0
    assert interpolated_coding_mse(dims, SecondMoments(dims, [1, 1], [0])) == 0.4375
    assert interpolated_coding_mse(dims, SecondMoments(dims, [1, 1], [1])) == 0.5625


def test_coding_mse_hand_expansion():
    # per-sample errors 0, 0.25, 1, 0.5 for independent unit errors
    dims = WalkDims(4, 2)
    m = SecondMoments(dims, [1, 1], [0])
    assert coding_mse_by_expansion(dims, m) == pytest.approx((0 + 0.25 + 1 + 0.5) / 4, abs=1e-15)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=100, deadline=None)
def test_coding_mse_matches_expansion(seed):
    dims, m = random_moments(np.random.default_rng(seed))
    assert interpolated_coding_mse(dims, m) == pytest.approx(coding_mse_by_expansion(dims, m), abs=1e-12)


def test_coding_mse_rejects_negative():
    dims = WalkDims(4, 2)
    m = SecondMoments(dims, [0.0, 0.0], [0.0])
    # corrupt a validated instance to mimic a sign error upstream
    object.__setattr__(m, "var", np.array([-1.0, 0.0]))
    with pytest.raises(InconsistencyError):
        interpolated_coding_mse(dims, m)


def test_test_channel_limits():
    dims = WalkDims(32, 4)
    lam_max = berger_eigenvalues(dims.N_M, scale=4).max()
    m = test_channel_moments(dims, lam_max * 1.01)
    assert np.allclose(m.var, 4 * np.arange(1, dims.N_M + 1), rtol=1e-12)
    # each mode keeps exactly theta, so the moments shrink with it
    tiny = test_channel_moments(dims, 1e-12)
    assert np.allclose(tiny.var, 1e-12, rtol=1e-10)
    assert np.max(np.abs(tiny.lag1)) <= 1e-24
    with pytest.raises(DomainError):
        test_channel_moments(dims, 0.0)


@pytest.mark.parametrize("theta_Y", [0.2, 2.0, 8.0])
def test_test_channel_lag1_average(theta_Y):
    dims = WalkDims(4096, 4)
    m = test_channel_moments(dims, theta_Y)
    S = SpectralDensity.standard()
    t = theta_Y / 4
    phi = S.crossing(t)
    spec = QuadratureSpec(split_points=(phi,) if phi is not None and phi < 1 else ())
    target = 4 * integrate(lambda p: np.minimum(t, S(p)) * np.cos(np.pi * p), spec)
    mean = m.lag1.sum() / dims.N_M
    # at theta_Y = 0.2 the water sits below the whole spectrum and both sides vanish
    assert abs(mean - target) <= 0.01 * abs(target) + 1e-12


def test_finite_n_dce_m1_relation():
    dims = WalkDims(64, 1)
    theta = 3.0
    lam = berger_eigenvalues(64)
    m = test_channel_moments(dims, theta)
    plain = finite_n_rd_point(lam, theta, 64).distortion
    # with times 0..N-1 the last error variance drops out of the average
    assert finite_n_dce(dims, theta) == pytest.approx(plain - m.var[-1] / 64, abs=1e-12)


@pytest.mark.parametrize("theta_Y", [0.5, 2.0, 8.0])
def test_finite_n_dce_converges(theta_Y):
    target = ce_at_level(4, theta_Y / 4)[0].total
    err_lo = abs(finite_n_dce(WalkDims(512, 4), theta_Y) - target) / target
    err_hi = abs(finite_n_dce(WalkDims(4096, 4), theta_Y) - target) / target
    assert err_hi < 0.01
    assert err_hi < err_lo


def test_finite_n_dce_at_matched_rate():
    dims = WalkDims(4096, 4)
    cfg = SchemeConfig(4, 0.3)
    ce = distortion_ce(cfg)
    theta_Y = 4 * ce.theta
    assert decimated_rate(dims, theta_Y) == pytest.approx(0.3, rel=0.01)
    assert finite_n_dce(dims, theta_Y) == pytest.approx(ce.total, rel=0.01)


def test_breakdown_type():
    b = DistortionBreakdown(Scheme.EC, 2, 1.0, 0.1, 0.25, 0.1)
    assert b.cross_term == 0.0
