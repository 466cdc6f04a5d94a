"""Numbered acceptance checks shared by ``walkrd validate`` and the test suite.

Each check returns a :class:`CriterionResult`.  Reports contain no
timings so that a fixed seed gives byte-identical output; runtime limits
still count toward pass/fail.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from walkrd.curves import CurveMode, CurveRequest, build_curve
from walkrd.mc_oracle import brute_force_spectrum, empirical_mmse, sample_test_channel
from walkrd.quadrature import QuadratureSpec, integrate
from walkrd.schemes import (
    SchemeConfig,
    SecondMoments,
    ce_at_level,
    ce_ec_gap,
    distortion_ce,
    distortion_ec,
    drf_source,
    ec_threshold,
    finite_n_dce,
    high_rate_ce,
    high_rate_ec,
    interpolated_coding_mse,
    max_relative_gap,
    test_channel_moments,
)
from walkrd.spectra import (
    CovarianceKind,
    SpectralDensity,
    WalkDims,
    berger_eigenvalues,
    bridge_variance,
    covariance_matrix,
    interp_eigenvalues_asymptotic,
    mmse_interpolation,
)
from walkrd.waterfill import finite_n_rd_point, finite_n_water_level, rate_at_level, rate_to_water_level

GRID_M = (1, 2, 4, 10, 100)
GRID_R = (0.001, 0.01, 0.1, 0.5, 1.0, 2.0, 4.0)
FAST_MC_TRIALS = 200


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool | None  # None means skipped at this level
    measured: str
    required: str

    def __post_init__(self):
        if self.passed is not None:
            object.__setattr__(self, "passed", bool(self.passed))

    def line(self) -> str:
        tag = "SKIP" if self.passed is None else "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.number:2d} {self.name}: measured {self.measured}; required {self.required}"


def _timed(limit):
    def wrap(fn):
        def run(level, seed):
            start = time.perf_counter()
            result = fn(level, seed)
            if result.passed and time.perf_counter() - start > limit:
                return CriterionResult(result.number, result.name, False,
                                       result.measured, f"{result.required}, within {limit:g} s")
            return result
        run.__name__ = fn.__name__
        run.limit = limit
        return run
    return wrap


@_timed(10)
def max_gap_claim(level, seed):
    mg = max_relative_gap(100)
    thr = ec_threshold(100)
    cfg = SchemeConfig(100, (thr + 0.1) / 100)
    closed = high_rate_ce(cfg).distortion / high_rate_ec(cfg).distortion - 1
    integral = distortion_ce(cfg).total / distortion_ec(cfg).total - 1
    agree = abs(closed - integral) <= 1e-8
    ok = abs(mg.relative_gap - 0.027) <= 0.003 and agree
    return CriterionResult(
        1, "max relative CE-over-EC loss at M=100", ok,
        f"{100 * mg.relative_gap:.4f}% at MR={mg.MR:.4f}; closed vs integral ratio at MR={thr + 0.1:.4f} "
        f"differ by {abs(closed - integral):.2e}",
        "2.7% +/- 0.3 points; closed forms agree with integrals to 1e-8")


@_timed(5)
def m1_collapse(level, seed):
    worst = 0.0
    for R in (0.01, 0.1, 0.5, 1.0, 2.0, 4.0):
        cfg = SchemeConfig(1, R)
        dx = drf_source(R).total
        worst = max(worst, abs(distortion_ec(cfg).total - dx), abs(distortion_ce(cfg).total - dx))
    return CriterionResult(2, "M=1 collapse to the source DRF", worst < 1e-9,
                           f"max deviation {worst:.2e}", "< 1e-9")


@_timed(30)
def sandwich(level, seed):
    slack = np.inf
    dx = {R: drf_source(R).total for R in GRID_R}
    for M in GRID_M:
        for R in GRID_R:
            cfg = SchemeConfig(M, R)
            ec, ce = distortion_ec(cfg).total, distortion_ce(cfg).total
            slack = min(slack, ce - ec, ec - max(mmse_interpolation(M), dx[R]))
    return CriterionResult(3, "D_CE >= D_EC >= max(mmse, D_X) on the 5x7 grid", slack >= -1e-9,
                           f"smallest slack {slack:.3e}", ">= -1e-9")


def high_rate_points():
    pts = []
    for M in GRID_M:
        thr = ec_threshold(M)
        rates = [R for R in GRID_R if M * R >= thr + 0.1]
        rates += [(thr + off) / M for off in (0.1, 0.5, 1.0, 2.0, 4.0)]
        pts.extend(SchemeConfig(M, R) for R in rates)
    return pts


@_timed(60)
def high_rate_agreement(level, seed):
    worst_ce = worst_ec = worst_gap = worst_gap_int = 0.0
    for cfg in high_rate_points():
        ce, ec = distortion_ce(cfg).total, distortion_ec(cfg).total
        hce, hec = high_rate_ce(cfg).distortion, high_rate_ec(cfg).distortion
        gap = ce_ec_gap(cfg)
        worst_ce = max(worst_ce, abs(hce - ce) / ce)
        worst_ec = max(worst_ec, abs(hec - ec) / ec)
        worst_gap = max(worst_gap, abs(gap - (hce - hec)) / max(1.0, hce))
        worst_gap_int = max(worst_gap_int, abs(gap - (ce - ec)) / ec)
    ok = max(worst_ce, worst_ec, worst_gap_int) <= 1e-8 and worst_gap <= 1e-12
    return CriterionResult(
        4, "high-rate closed forms vs integral solvers", ok,
        f"CE {worst_ce:.2e}, EC {worst_ec:.2e}, gap vs closed difference {worst_gap:.2e}, "
        f"gap vs integral difference {worst_gap_int:.2e}",
        "CE, EC and integral gap <= 1e-8 relative; closed gap <= 1e-12")


@_timed(5)
def quadrature_identities(level, seed):
    S = SpectralDensity.standard()
    log_int = integrate(lambda p: S.log(p) / math.log(2))
    min_int = integrate(lambda p: np.minimum(S(p), 1.0), QuadratureSpec(split_points=(1 / 3,)))
    exact = 1 / 3 + math.sqrt(3) / (2 * math.pi)
    ok = abs(log_int) <= 1e-8 and abs(min_int - exact) <= 1e-6
    return CriterionResult(5, "quadrature identities", ok,
                           f"int log2 S = {log_int:.2e}, int min(S,1) error {abs(min_int - exact):.2e}",
                           "|int log2 S| <= 1e-8; min(S,1) within 1e-6 of 1/3 + sqrt(3)/(2 pi)")


@_timed(30)
def eigenvalue_oracle(level, seed):
    worst = 0.0
    for N in range(1, 65):
        brute = brute_force_spectrum(covariance_matrix(CovarianceKind.SOURCE, WalkDims(N, 1)))
        worst = max(worst, float(np.abs(brute.values - berger_eigenvalues(N)).max()))
    trace = berger_eigenvalues(1024).sum()
    trace_err = abs(trace - 1024 * 1025 / 2) / (1024 * 1025 / 2)
    return CriterionResult(6, "closed-form vs Jacobi eigenvalues of min(i,j)", worst <= 1e-9 and trace_err <= 1e-9,
                           f"max abs error {worst:.2e} for N<=64, trace error {trace_err:.2e} at N=1024",
                           "<= 1e-9 each")


def _sizes(level):
    # the fast level stays below N=4096 but keeps the same shape of check
    return (512, 4096) if level == "full" else (128, 512)


def _spectrum_discrepancy(N, M, thetas):
    dims = WalkDims(N, M)
    closed = interp_eigenvalues_asymptotic(dims)
    brute = brute_force_spectrum(covariance_matrix(CovarianceKind.INTERPOLATED, dims)).values
    fixed, matched = [], []
    for theta in thetas:
        pc = finite_n_rd_point(closed, theta, N)
        pb = finite_n_rd_point(brute, theta, N)
        fixed.append(abs(pb.distortion - pc.distortion) / pc.distortion)
        # the listed levels sit below both spectra, so compare at equal rate too
        pm = finite_n_rd_point(brute, finite_n_water_level(brute, N, pc.rate), N)
        matched.append(abs(pm.distortion - pc.distortion) / pc.distortion)
    return max(fixed), max(matched)


@_timed(120)
def spectrum_convergence(level, seed):
    lo, hi = _sizes(level)
    thetas = (0.05, 0.2, 1.0)
    fixed_lo, matched_lo = _spectrum_discrepancy(lo, 4, thetas)
    fixed_hi, matched_hi = _spectrum_discrepancy(hi, 4, thetas)
    ok = fixed_hi < 0.01 and matched_hi < 0.01 and matched_hi < matched_lo and fixed_hi <= fixed_lo
    return CriterionResult(
        7, "closed-form interpolated spectrum vs Jacobi, M=4", ok,
        f"equal-level gap {fixed_lo:.2e} -> {fixed_hi:.2e}, equal-rate gap {matched_lo:.2e} -> {matched_hi:.2e} "
        f"(N={lo} -> {hi})",
        f"< 1% at N={hi} and shrinking from N={lo}")


def coding_mse_by_expansion(dims: WalkDims, m: SecondMoments) -> float:
    """Average over times ``0..N-1`` of the interpolated coding error variance,
    expanded one sample at a time."""
    M = dims.M
    var = np.concatenate([[0.0], m.var])
    lag = np.concatenate([[0.0], m.lag1])
    total = 0.0
    for n in range(dims.N_M):
        for j in range(M):
            a, b = (M - j) / M, j / M
            total += a * a * var[n] + 2 * a * b * lag[n] + b * b * var[n + 1]
    return total / dims.N


def random_moments(rng: np.random.Generator) -> tuple[WalkDims, SecondMoments]:
    n = int(rng.integers(1, 17))
    M = int(rng.integers(1, 9))
    A = rng.standard_normal((n, n))
    cov = A @ A.T
    return WalkDims(n * M, M), SecondMoments(WalkDims(n * M, M), np.diag(cov), np.diag(cov, 1))


@_timed(10)
def coding_mse_equivalence(level, seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(100):
        dims, m = random_moments(rng)
        worst = max(worst, abs(interpolated_coding_mse(dims, m) - coding_mse_by_expansion(dims, m)))
    dims = WalkDims(4, 2)
    hand = (interpolated_coding_mse(dims, SecondMoments(dims, [1, 1], [0])),
            interpolated_coding_mse(dims, SecondMoments(dims, [1, 1], [1])))
    ok = worst <= 1e-12 and hand == (0.4375, 0.5625)
    return CriterionResult(8, "interpolation-error formula vs direct expansion", ok,
                           f"max deviation {worst:.2e} over 100 instances; hand cases {hand[0]!r}, {hand[1]!r}",
                           "<= 1e-12; hand cases 0.4375 and 0.5625 exactly")


@_timed(60)
def mc_mmse(level, seed):
    trials = 2000 if level == "full" else FAST_MC_TRIALS
    dims = WalkDims(4096, 4)
    res = empirical_mmse(dims, trials, seed)
    z = abs(res.overall.mean - 0.625) / res.overall.std_error
    offset_ok = True
    worst_z = 0.0
    for r, est in enumerate(res.by_offset):
        target = bridge_variance(r, 4)
        if est.std_error == 0.0:
            offset_ok &= est.mean == target
        else:
            worst_z = max(worst_z, abs(est.mean - target) / est.std_error)
    ok = z <= 3 and worst_z <= 3 and offset_ok
    return CriterionResult(9, f"Monte Carlo interpolation MSE, M=4, N=4096, {trials} trials", ok,
                           f"mean {res.overall.mean:.5f} ({z:.2f} s.e. from 0.625); worst offset {worst_z:.2f} s.e.",
                           "within 3 standard errors")


def _zscore(samples, target, variance):
    """Worst per-entry z-score using the exact Gaussian variance of each product."""
    n = samples.shape[0]
    return float((np.abs(samples.mean(axis=0) - target) / np.sqrt(variance / n)).max())


@_timed(60)
def finite_n_ce(level, seed):
    parts = []
    ok = True
    lo, hi = _sizes(level)
    worst_rel = 0.0
    shrinks = True
    for theta in (0.5, 2.0, 8.0):
        target = ce_at_level(4, theta / 4)[0].total
        err_lo = abs(finite_n_dce(WalkDims(lo, 4), theta) - target) / target
        err_hi = abs(finite_n_dce(WalkDims(hi, 4), theta) - target) / target
        worst_rel = max(worst_rel, err_hi)
        shrinks &= err_hi < err_lo
    ok &= worst_rel < 0.01 and shrinks
    parts.append(f"N={hi} max relative error {worst_rel:.2e}, {'shrinking' if shrinks else 'NOT shrinking'} "
                 f"from N={lo}")
    samples = 100_000 if level == "full" else FAST_MC_TRIALS
    dims = WalkDims(256, 4)
    draw = sample_test_channel(dims, 0.5, seed, samples)
    exact = test_channel_moments(dims, 0.5)
    eps = draw.eps
    v, c = exact.var, exact.lag1
    recon_var = 4 * np.arange(1, 65) - v
    z_var = _zscore(eps**2, v, 2 * v**2)
    z_lag = _zscore(eps[:, :-1] * eps[:, 1:], c, v[:-1] * v[1:] + c**2)
    z_cross = _zscore(draw.y_hat * eps, 0.0, recon_var * v)
    ok &= max(z_var, z_lag, z_cross) <= 3
    if level == "full":
        ratio = draw.y.var(axis=0) / (4 * np.arange(1, 65))
        ok &= bool(np.all((ratio >= 0.9) & (ratio <= 1.1)))
        parts.append(f"Var(Y_n)/(Mn) in [{ratio.min():.3f}, {ratio.max():.3f}]")
    parts.append(f"test-channel worst z: var {z_var:.2f}, lag-1 {z_lag:.2f}, Cov(Y_hat_n, eps_n) {z_cross:.2f} "
                 f"({samples} draws)")
    return CriterionResult(10, "finite-N CE distortion and test-channel moments", ok, "; ".join(parts),
                           f"within 1% at N={hi} and shrinking from N={lo}; moments within 3 s.e.")


@_timed(20)
def rate_round_trip(level, seed):
    worst = 0.0
    for d, M in ((SpectralDensity.standard(), 1), (SpectralDensity.shifted(2), 2),
                 (SpectralDensity.shifted(10), 10)):
        for R in (0.01, 0.1, 0.5, 1.0, 3.0):
            theta = rate_to_water_level(d, M, R)
            worst = max(worst, abs(rate_at_level(d, theta, M) - R))
    return CriterionResult(11, "rate -> water level -> rate round trip", worst < 1e-10,
                           f"max deviation {worst:.2e}", "< 1e-10")


def _unimodal(values):
    i = int(np.argmax(values))
    return bool(np.all(np.diff(values[:i + 1]) > 0) and np.all(np.diff(values[i:]) < 0)) and 0 < i < len(values) - 1


@_timed(60)
def figure_shapes(level, seed):
    rows = build_curve(CurveRequest(CurveMode.VS_RATE, 100, 1e-3, 1.0, 40, "log", ("ce", "ec", "gap")))
    by = {s: np.array([r.total for r in rows if r.scheme == s]) for s in ("ce", "ec", "gap")}
    # past R ~ 0.27 the excess over mmse drops below one ulp of the total,
    # so strict decrease is checked on the excess and the totals must not rise
    excess = {s: np.array([r.coding_term + r.cross_term for r in rows if r.scheme == s]) for s in ("ce", "ec")}
    decreasing = all(np.all(np.diff(excess[s]) < 0) and np.all(np.diff(by[s]) <= 0) for s in ("ce", "ec"))
    unimodal = _unimodal(by["gap"])
    rows = build_curve(CurveRequest(CurveMode.VS_M, 0.01, 1, 1000, 40, "log", ("ce", "ec", "gap")))
    by_m = {s: np.array([r.total for r in rows if r.scheme == s]) for s in ("ce", "ec", "gap")}
    nondecreasing = all(np.all(np.diff(by_m[s]) >= 0) for s in ("ce", "ec"))
    gap_at_1 = abs(by_m["gap"][0])
    ok = decreasing and unimodal and nondecreasing and gap_at_1 < 1e-9
    return CriterionResult(
        12, "figure shapes (M=100 over R; R=0.01 over M)", ok,
        f"totals decreasing in R (excess strictly): {decreasing}; gap unimodal in R: {unimodal}; "
        f"totals nondecreasing in M: {nondecreasing}; gap at M=1: {gap_at_1:.1e}",
        "all true; gap at M=1 < 1e-9")


CRITERIA: tuple[Callable[[str, int], CriterionResult], ...] = (
    max_gap_claim, m1_collapse, sandwich, high_rate_agreement, quadrature_identities,
    eigenvalue_oracle, spectrum_convergence, coding_mse_equivalence, mc_mmse, finite_n_ce,
    rate_round_trip, figure_shapes,
)


def run_all(level: str = "fast", seed: int = 0, echo: Callable[[str], None] | None = None) -> list[CriterionResult]:
    if level not in ("fast", "full"):
        raise ValueError(f"unknown level {level!r}")
    results = []
    for check in CRITERIA:
        res = check(level, seed)
        results.append(res)
        if echo is not None:
            echo(res.line())
    return results
