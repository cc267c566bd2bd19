import math

import mpmath
import numpy as np
import pytest

from clickbound.oracle import OracleBudget, ft_onshell_bruteforce
from clickbound.special import InvalidParameterError, bump_theta
from clickbound.testfn import (
    FOUR_PI_SQ,
    ModelParams,
    build_profile,
    default_profile,
    onshell_ft,
    onshell_profile_h,
    profile_slope,
    radial_ft,
    smearing_f,
)


def _theta_mp(s):
    s = mpmath.mpf(s)
    if s <= 0:
        return mpmath.mpf(0)
    if s >= 1:
        return mpmath.mpf(1)
    a, b = mpmath.exp(-1 / s), mpmath.exp(-1 / (1 - s))
    return a / (a + b)


class TestModelParams:
    def test_center(self):
        p = ModelParams(1.0, 2.0)
        np.testing.assert_array_equal(p.center, [0.0, -2 * math.sqrt(2), 0.0, 0.0])

    @pytest.mark.parametrize("alpha,r", [(1.0, 0.5), (1.0, float("nan")), (float("inf"), 1.0)])
    def test_invalid(self, alpha, r):
        with pytest.raises(InvalidParameterError):
            ModelParams(alpha, r)


class TestSmearing:
    def test_center_value(self):
        p = ModelParams(2.0, 1.0)
        assert smearing_f(p.center, p) == 2.0

    def test_half_radius(self):
        p = ModelParams(1.0, 1.5)
        x = p.center + np.array([0.3, 0.0, 0.4, 0.0])
        assert smearing_f(x, p) == pytest.approx(0.5, abs=1e-15)

    def test_outside(self):
        p = ModelParams(1.0, 1.0)
        assert smearing_f(p.center + np.array([0.0, 1.2, 0.0, 0.0]), p) == 0.0

    def test_support(self):
        p = ModelParams(1.3, 2.0)
        rng = np.random.default_rng(11)
        d = rng.normal(size=(1000, 4))
        d /= np.linalg.norm(d, axis=1)[:, None]
        radii = rng.uniform(1.0, 3.0, size=1000)
        assert np.all(smearing_f(p.center + d * radii[:, None], p) == 0.0)

    def test_smooth_across_boundary(self):
        p = ModelParams(1.0, 1.0)
        step = 1e-4
        r = np.arange(0.5, 1.5, step)
        x = p.center + np.outer(r, [0.0, 0.6, 0.0, 0.8])
        grad = np.diff(smearing_f(x, p)) / step
        assert np.max(np.abs(grad)) < 10.0
        assert np.max(np.abs(np.diff(grad))) < 1e-2


class TestProfile:
    def test_origin(self):
        assert onshell_profile_h(0.0) == 0.0
        assert default_profile()(0.0) == 0.0

    def test_slope(self):
        ref = 0.5 * mpmath.quad(lambda s: s ** 3 * _theta_mp(1 - s), [0, 0.5, 1])
        assert profile_slope() == pytest.approx(float(ref), rel=1e-12)
        assert onshell_profile_h(1e-5) / 1e-5 == pytest.approx(float(ref), rel=1e-9)
        assert default_profile().over_u(0.0) == pytest.approx(float(ref), rel=1e-12)

    def test_u40_against_adaptive(self):
        mpmath.mp.dps = 30
        ref = mpmath.quad(lambda s: s * s * _theta_mp(1 - s) * mpmath.besselj(1, 40 * s),
                          mpmath.linspace(0, 1, 41))
        assert abs(onshell_profile_h(40.0) - float(ref)) <= 1e-9
        assert abs(float(default_profile()(40.0)) - float(ref)) <= 1e-9

    def test_bounds_and_cutoff(self):
        prof = default_profile()
        h = prof.grid * prof.values
        assert np.max(np.abs(h)) <= 1.0 / 3.0
        assert abs(h[-1]) < 1e-12
        assert prof(prof.u_max + 1.0) == 0.0

    def test_spline_matches_direct(self):
        prof = default_profile()
        u = np.linspace(0.013, prof.u_max - 0.01, 301)
        np.testing.assert_allclose(prof(u), onshell_profile_h(u), rtol=0, atol=1e-12)

    def test_build_is_deterministic(self):
        a = build_profile(step=0.1, u_limit=60.0, threshold=1e-6)
        b = build_profile(step=0.1, u_limit=60.0, threshold=1e-6)
        np.testing.assert_array_equal(a.values, b.values)

    def test_negative_argument(self):
        with pytest.raises(InvalidParameterError):
            onshell_profile_h(-1.0)


class TestTransform:
    def test_zero_amplitude(self):
        p = ModelParams(0.0, 2.0)
        k = np.linspace(0.1, 20, 30)
        assert np.all(onshell_ft(k, 0.3, p) == 0)

    def test_modulus_independent_of_mu(self):
        p = ModelParams(1.0, 2.0)
        mu = np.linspace(-1, 1, 21)
        mods = np.abs(onshell_ft(1.7, mu, p))
        assert np.ptp(mods) <= 1e-15 * mods.max()

    def test_small_q_limit(self):
        for q in (1e-8, 1e-6, 1e-4):
            assert radial_ft(q, 1.5) == pytest.approx(FOUR_PI_SQ * 1.5 * profile_slope(), rel=1e-7)
        assert np.isfinite(onshell_ft(1e-8, 0.2, ModelParams(1.0, 1.0)))

    def test_nonpositive_k(self):
        with pytest.raises(InvalidParameterError):
            onshell_ft(0.0, 0.0, ModelParams(1.0, 1.0))

    def test_against_bruteforce(self):
        p = ModelParams(1.0, 2.0)
        main = onshell_ft(1.3, 0.4, p)
        brute = ft_onshell_bruteforce(1.3, 0.4, p, OracleBudget())
        assert abs(main - brute.value) <= 0.01 * abs(brute.value)

    def test_theta_matches_high_precision(self):
        s = np.linspace(-0.2, 1.2, 15)
        np.testing.assert_allclose(bump_theta(s), [float(_theta_mp(v)) for v in s], atol=1e-15)
