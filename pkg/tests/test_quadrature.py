import math

import numpy as np
import pytest

from walkrd.errors import DomainError, QuadratureError
from walkrd.quadrature import QuadratureSpec, integrate
from walkrd.spectra import SpectralDensity

S = SpectralDensity.standard()


def test_log_identity():
    assert abs(integrate(lambda p: S.log(p) / math.log(2))) <= 1e-8


def test_cos_integral():
    assert abs(integrate(lambda p: np.cos(np.pi * p))) <= 1e-12


def test_min_integral_closed_form():
    value = integrate(lambda p: np.minimum(S(p), 1.0), QuadratureSpec(split_points=(1 / 3,)))
    assert value == pytest.approx(1 / 3 + math.sqrt(3) / (2 * math.pi), abs=1e-6)


@pytest.mark.parametrize("k", [0, 1, 2, 5])
def test_polynomials(k):
    assert integrate(lambda p: p**k) == pytest.approx(1 / (k + 1), abs=1e-10)


def test_log_singularity_at_zero():
    assert integrate(lambda p: np.log(p)) == pytest.approx(-1.0, abs=1e-9)
    # int_0^1 log(sin(pi x / 2)) dx = -ln 2
    assert integrate(lambda p: np.log(np.sin(np.pi * p / 2))) == pytest.approx(-math.log(2), abs=1e-9)


def test_kink_with_and_without_split():
    f = lambda p: np.abs(p - 0.3)  # noqa: E731
    exact = 0.5 * (0.3**2 + 0.7**2)
    assert integrate(f, QuadratureSpec(split_points=(0.3,))) == pytest.approx(exact, abs=1e-14)
    assert integrate(f) == pytest.approx(exact, abs=1e-9)


def test_full_output_reports_error_bound():
    value, err = integrate(lambda p: np.sqrt(p), full_output=True)
    assert value == pytest.approx(2 / 3, abs=1e-10)
    assert 0 <= err <= 1e-9


def test_spec_validation():
    with pytest.raises(DomainError):
        QuadratureSpec(abs_tol=0)
    with pytest.raises(DomainError):
        QuadratureSpec(split_points=(0.5, 0.2))
    with pytest.raises(DomainError):
        QuadratureSpec(split_points=(1.0,))


def test_non_convergence_raises_with_estimate():
    f = lambda p: np.sin(1.0 / (p + 1e-9))  # noqa: E731
    with pytest.raises(QuadratureError) as info:
        integrate(f, QuadratureSpec(abs_tol=1e-14, max_subdivisions=3))
    assert math.isfinite(info.value.estimate)
