"""Interior-angle recursion, its stationary law, and the exact speed."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from hullwalk import (InsufficientSamples, InvalidInput, WalkConfig,
                      local_drift, run, simulate_chain, speed_2_1,
                      stationary_cdf, stationary_law, stationary_pdf, t_map)
from hullwalk.angle_chain import (SPEED_BALL_2_1, SPEED_SPHERE_2_1,
                                  pushforward_cdf)

PI = math.pi


class TestTMap:
    def test_midpoint_from_zero(self):
        assert t_map(0.0, 0.5) == pytest.approx(0.0, abs=1e-15)

    def test_flat_angle_sticks_at_u_zero(self):
        assert t_map(PI, 0.0) == pytest.approx(PI, abs=1e-15)

    def test_direct_evaluation(self):
        assert t_map(PI / 2, 1.0 / 3.0) == pytest.approx(PI / 2, abs=1e-12)

    def test_range_validation(self):
        with pytest.raises(InvalidInput):
            t_map(-0.1, 0.5)
        with pytest.raises(InvalidInput):
            t_map(1.0, 1.5)

    @given(st.floats(0, PI), st.floats(0, PI), st.floats(0, 1))
    @settings(max_examples=300, deadline=None)
    def test_contraction_and_range(self, x, y, u):
        tx, ty = t_map(x, u), t_map(y, u)
        assert 0.0 <= tx <= PI
        assert abs(tx - ty) <= abs(x - y) + 1e-12


class TestStationaryLaw:
    def test_cdf_endpoints(self):
        assert stationary_cdf(0.0) == 0.0
        assert stationary_cdf(PI) == pytest.approx(1.0, abs=1e-15)

    def test_pdf_at_zero(self):
        assert stationary_pdf(0.0) == pytest.approx(4.0 / (3.0 * PI), abs=1e-12)

    def test_normalization_by_quadrature(self):
        total, _ = integrate.quad(stationary_pdf, 0.0, PI, epsabs=1e-13)
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_out_of_range_clamped(self):
        pdf, cdf = stationary_law(-1.0)
        assert pdf == 0.0 and cdf == 0.0
        pdf, cdf = stationary_law(4.0)
        assert pdf == 0.0 and cdf == 1.0

    def test_cdf_matches_pdf_integral(self):
        for t in np.linspace(0.1, PI, 7):
            val, _ = integrate.quad(stationary_pdf, 0.0, t, epsabs=1e-13)
            assert val == pytest.approx(stationary_cdf(t), abs=1e-10)

    def test_density_differential_identity(self):
        # (pi + t) f'(t) = -f(pi - t) as a numerical identity
        fprime = -2.0 / (3.0 * PI**2)
        for t in np.linspace(0.01, PI - 0.01, 9):
            assert (PI + t) * fprime == pytest.approx(-stationary_pdf(PI - t),
                                                      abs=1e-12)


class TestLocalDrift:
    def test_vanishes_at_endpoints(self):
        assert local_drift(0.0) == 0.0
        assert local_drift(PI) == pytest.approx(0.0, abs=1e-15)

    def test_right_angle_value(self):
        assert local_drift(PI / 2) == pytest.approx(4.0 / (9.0 * PI), abs=1e-12)

    def test_nonnegative_on_grid(self):
        grid = np.linspace(0.0, PI, 10_000)
        vals = local_drift(grid)
        assert np.all(vals >= 0.0)
        # the drift keeps rising past pi/2 (derivative 6/(4.5 pi)^2 there);
        # its true maximum on [0, pi] is ~0.144822 at theta ~ 1.7896
        assert np.all(vals <= 0.1449)

    def test_range_check(self):
        with pytest.raises(InvalidInput):
            local_drift(3.5)


class TestSpeed:
    def test_closed_form(self):
        assert speed_2_1().value == 8.0 / (9.0 * PI**2)
        assert abs(SPEED_BALL_2_1 - 0.09006327) < 5e-9
        assert abs(SPEED_SPHERE_2_1 - 0.13509491) < 5e-9

    def test_quadrature_agreement(self):
        q = speed_2_1("quadrature")
        assert abs(q.value - SPEED_BALL_2_1) < 1e-10

    def test_sphere_quadrature(self):
        q = speed_2_1("quadrature", law="sphere")
        assert abs(q.value - SPEED_SPHERE_2_1) < 1e-10

    def test_chain_mc_within_three_se(self):
        mc = speed_2_1("chain_mc", n=200_000, seed=5)
        assert abs(mc.value - SPEED_BALL_2_1) <= 3 * mc.stderr

    def test_chain_mc_needs_samples(self):
        with pytest.raises(InsufficientSamples):
            speed_2_1("chain_mc", n=500)

    def test_unknown_method(self):
        with pytest.raises(InvalidInput):
            speed_2_1("bogus")


class TestSimulateChain:
    def test_stays_in_range(self):
        ch = simulate_chain(20_000, seed=1, init=PI)
        assert ch.samples.min() >= 0.0
        assert ch.samples.max() <= PI

    def test_ks_distance_reported(self):
        ch = simulate_chain(100_000, seed=2)
        assert ch.ks_distance < 0.01

    def test_coupled_chains_contract(self):
        g = np.random.default_rng(3)
        u = g.random(5000)
        x, y = 0.0, PI
        gap = PI
        for ui in u:
            x, y = t_map(x, ui), t_map(y, ui)
            new_gap = abs(x - y)
            assert new_gap <= gap + 1e-12
            gap = new_gap

    def test_fixed_point_identity_spot(self):
        for t in [0.3, 1.0, 2.0, 3.0]:
            assert abs(pushforward_cdf(t) - stationary_cdf(t)) < 1e-10


class TestWalkAngleConsistency:
    def test_walk_angles_converge_to_stationary_law(self):
        cfg = WalkConfig(d=2, k=1, steps=100_000, seed=6, trace_thin=1)
        r = run(cfg)
        theta = r.trace_theta[2000:]
        d = stats.kstest(theta, stationary_cdf).statistic
        assert d < 0.02
