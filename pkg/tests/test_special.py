import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from clickbound.quadrature import QuadratureSpec, integrate_1d
from clickbound.special import (
    GaussianKernel,
    InvalidParameterError,
    bessel_j1,
    bump_phi,
    bump_theta,
    gaussian,
    j1_over_x,
)

mpmath.mp.dps = 40


def _series(order, x, terms=400):
    """J_n(x) from its power series at 40 digits."""
    x = mpmath.mpf(x)
    half = x / 2
    total = mpmath.mpf(0)
    for m in range(terms):
        term = (-1) ** m * half ** (2 * m + order) / (mpmath.factorial(m) * mpmath.factorial(m + order))
        total += term
        if m > x and abs(term) < mpmath.mpf(10) ** -45:
            break
    return total


class TestBesselJ1:
    def test_zero(self):
        assert bessel_j1(0.0) == 0.0

    def test_small_argument(self):
        assert abs(bessel_j1(1e-6) - 5e-7) <= 1e-18

    def test_first_root(self):
        root = mpmath.findroot(lambda x: _series(1, x), 3.83)
        assert abs(float(root) - 3.8317) < 1e-4
        assert abs(bessel_j1(float(root))) <= 1e-10

    def test_relative_accuracy_to_1e3(self):
        x = np.concatenate([np.geomspace(1e-3, 1e3, 200), np.linspace(0.5, 1000.0, 800)])
        got = bessel_j1(x)
        ref = np.array([float(mpmath.besselj(1, v)) for v in x])
        assert np.max(np.abs(got - ref) / np.abs(ref)) <= 1e-12

    def test_recurrence_against_series(self):
        rng = np.random.default_rng(7)
        for x in rng.uniform(0.0, 50.0, 100):
            if x == 0.0:
                continue
            rhs = float(_series(0, x) + _series(2, x))
            lhs = 2.0 / x * bessel_j1(x)
            assert abs(lhs - rhs) <= 1e-10 * abs(rhs)

    def test_odd_extension(self):
        x = np.linspace(0.1, 20, 50)
        np.testing.assert_array_equal(bessel_j1(-x), -bessel_j1(x))

    def test_array_shape(self):
        assert bessel_j1(np.zeros((3, 4))).shape == (3, 4)
        assert isinstance(bessel_j1(1.0), float)


class TestJ1OverX:
    def test_origin_limit(self):
        assert j1_over_x(0.0) == 0.5

    def test_branch_continuity(self):
        below, above = j1_over_x(0.99999e-4), j1_over_x(1.00001e-4)
        assert abs(below - above) < 1e-12

    def test_matches_ratio(self):
        x = np.linspace(0.01, 200, 400)
        np.testing.assert_allclose(j1_over_x(x), bessel_j1(x) / x, rtol=1e-10, atol=1e-16)


class TestGaussian:
    def test_peak(self):
        assert gaussian(0.0, 1.0) == pytest.approx(1.0 / math.sqrt(2 * math.pi), rel=1e-15)

    def test_closed_form(self):
        assert gaussian(2.0, 2.0) == pytest.approx(math.exp(-1) / math.sqrt(4 * math.pi), rel=1e-15)

    @pytest.mark.parametrize("zeta", [0.0, -1.0, float("nan")])
    def test_bad_variance(self, zeta):
        with pytest.raises(InvalidParameterError):
            gaussian(0.0, zeta)

    @pytest.mark.parametrize("zeta", [1e-3, 0.5, 1.0, 10.0, 1e4])
    def test_second_moment(self, zeta):
        spec = QuadratureSpec(rtol=1e-12)
        res = integrate_1d(lambda e: e * e * gaussian(e, zeta), 0.0, math.inf, spec)
        assert abs(2 * res.value - zeta) <= 1e-10 * max(1.0, zeta)

    def test_kernel(self):
        k = GaussianKernel(0.7)
        assert k(0.3) == gaussian(0.3, 0.7)
        res = integrate_1d(k, 0.0, math.inf, QuadratureSpec(rtol=1e-12))
        assert 2 * res.value == pytest.approx(1.0, abs=1e-12)
        assert k.tail_mass(0.0) == 0.5
        with pytest.raises(InvalidParameterError):
            GaussianKernel(0.0)


class TestBump:
    def test_phi_values(self):
        assert bump_phi(-1.0) == 0.0
        assert bump_phi(0.0) == 0.0
        assert bump_phi(1.0) == pytest.approx(math.exp(-1.0), rel=1e-15)

    def test_phi_tiny_argument(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            assert bump_phi(1e-300) == 0.0
            assert bump_phi(np.array([1e-300, 5e-324]))[1] == 0.0

    @pytest.mark.parametrize("s,expected", [(-0.5, 0.0), (0.0, 0.0), (0.5, 0.5), (1.0, 1.0), (2.0, 1.0)])
    def test_theta_values(self, s, expected):
        assert bump_theta(s) == expected

    @given(st.floats(min_value=-5.0, max_value=5.0, allow_nan=False))
    def test_theta_symmetry(self, s):
        assert abs(bump_theta(s) + bump_theta(1.0 - s) - 1.0) <= 1e-15

    def test_theta_monotone(self):
        s = np.linspace(-1.0, 2.0, 1000)
        t = bump_theta(s)
        assert np.all(np.diff(t) >= 0.0)
        assert t.min() == 0.0 and t.max() == 1.0

    def test_theta_near_edges(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            t = bump_theta(np.array([1e-300, 1 - 1e-16, 1e-3]))
        assert t[0] == 0.0 and t[1] == 1.0 and 0.0 <= t[2] < 1e-300
