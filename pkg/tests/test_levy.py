"""Exponent, densities, tail masses and their mutual consistency."""

import math

import numpy as np
import pytest
from scipy import special as sp
from scipy.integrate import quad

from relfk.errors import DomainError
from relfk.levy import (ModelParams, char_exponent, levy_density,
                        levy_khintchine_residual, one_minus_sphere_avg_cos,
                        radial_tail_inverse, small_ball_second_moment,
                        sphere_area, tail_mass, transition_kernel)

TAIL_D1_M1_R1 = 0.17419238086991257   # 30-digit oracle, rounded


def fourier_kernel(y, t, d, m):
    """Independent kernel route: radial Fourier inversion via QUADPACK."""
    def psi(r):
        return r * r / (np.hypot(r, m) + m) if m > 0 else r

    if d == 1:
        f = lambda r: np.cos(y * r) * np.exp(-t * psi(r)) / np.pi
    elif d == 2:
        f = lambda r: sp.j0(y * r) * np.exp(-t * psi(r)) * r / (2 * np.pi)
    else:
        f = lambda r: (np.sin(y * r) * np.exp(-t * psi(r)) * r
                       / (2 * np.pi ** 2 * y))
    val, _ = quad(f, 0, np.inf, epsabs=1e-13, epsrel=1e-12, limit=800)
    return val


class TestParamsAndExponent:
    def test_param_validation(self):
        with pytest.raises(DomainError):
            ModelParams(0, 1.0)
        with pytest.raises(DomainError):
            ModelParams(1, -0.5)
        with pytest.raises(DomainError):
            ModelParams(1, math.inf)

    def test_exponent_values(self):
        p = ModelParams(1, 4.0)
        assert char_exponent(3.0, p) == pytest.approx(1.0, rel=1e-15)
        assert char_exponent(0.0, p) == 0.0
        p0 = ModelParams(2, 0.0)
        assert char_exponent(np.array([3.0, 4.0]), p0) == pytest.approx(5.0)

    def test_exponent_small_argument_accuracy(self):
        # naive sqrt(x^2+m^2)-m loses digits here; the stable form must not
        p = ModelParams(1, 1.0)
        xi = 1e-8
        assert char_exponent(xi, p) == pytest.approx(xi * xi / 2.0,
                                                     rel=1e-12)

    def test_mass_monotonicity(self):
        xs = [char_exponent(1.3, ModelParams(1, m))
              for m in (0.0, 0.1, 1.0, 10.0)]
        assert all(a > b for a, b in zip(xs, xs[1:]))

    def test_sphere_area(self):
        assert sphere_area(1) == pytest.approx(2.0)
        assert sphere_area(2) == pytest.approx(2 * math.pi)
        assert sphere_area(3) == pytest.approx(4 * math.pi)


class TestDensities:
    def test_massless_levy_density_closed_form(self):
        p = ModelParams(1, 0.0)
        assert levy_density(2.0, p) == pytest.approx(1 / (math.pi * 4.0),
                                                     rel=1e-14)
        p3 = ModelParams(3, 0.0)
        assert levy_density(1.5, p3) == pytest.approx(
            1.0 / (math.pi ** 2 * 1.5 ** 4), rel=1e-14)

    def test_massive_density_large_radius_decay(self):
        p = ModelParams(1, 2.0)
        # exponential thinning: n_m(y) e^{m|y|} |y|^{(d+2)/2} flattens out
        vals = [levy_density(r, p) * math.exp(2 * r) * r ** 1.5
                for r in (5, 10, 20)]
        assert vals[0] == pytest.approx(vals[2], rel=0.05)

    def test_density_pointwise_mass_limit(self):
        p0 = ModelParams(2, 0.0)
        for r in (0.3, 1.0, 4.0):
            small = levy_density(r, ModelParams(2, 1e-9))
            assert small == pytest.approx(levy_density(r, p0), rel=1e-6)

    def test_kernel_massless_closed_form(self):
        p = ModelParams(1, 0.0)
        y, t = 0.7, 1.3
        assert transition_kernel(y, t, p) == pytest.approx(
            t / (math.pi * (y * y + t * t)), rel=1e-14)

    def test_kernel_matches_fourier_inversion(self):
        # dual route at points where the oscillatory reference is accurate
        for d in (1, 2, 3):
            for m in (0.0, 0.5, 2.0):
                for y, t in [(0.0, 1.0), (0.5, 2.0), (1.0, 1.0), (2.0, 0.5)]:
                    ours = transition_kernel(y, t, ModelParams(d, m))
                    ref = fourier_kernel(y + 1e-12, t, d, m)
                    assert ours == pytest.approx(ref, rel=2e-8), (d, m, y, t)

    def test_kernel_pointwise_mass_limit(self):
        p0 = ModelParams(1, 0.0)
        for y, t in [(0.0, 1.0), (1.0, 1.0), (0.5, 2.0)]:
            v = transition_kernel(y, t, ModelParams(1, 1e-7))
            assert v == pytest.approx(transition_kernel(y, t, p0), rel=1e-5)

    def test_kernel_total_mass_one(self):
        for d, m in [(1, 0.0), (1, 1.0), (2, 0.5)]:
            p = ModelParams(d, m)
            f = lambda r: (transition_kernel(r, 0.8, p) * sphere_area(d)
                           * r ** (d - 1))
            total, _ = quad(f, 0, np.inf, epsabs=1e-12, epsrel=1e-10,
                            limit=400)
            assert total == pytest.approx(1.0, rel=1e-8), (d, m)


class TestTails:
    def test_massless_tail_closed_form(self):
        # C/r in every dimension; d=1 constant is 2/pi
        p = ModelParams(1, 0.0)
        assert tail_mass(2.0, p) == pytest.approx(1.0 / math.pi, rel=1e-14)
        p3 = ModelParams(3, 0.0)
        f = lambda r: levy_density(r, p3) * sphere_area(3) * r ** 2
        ref, _ = quad(f, 0.7, np.inf, epsabs=1e-14, epsrel=1e-12)
        assert tail_mass(0.7, p3) == pytest.approx(ref, rel=1e-10)

    def test_massive_tail_pin(self):
        assert tail_mass(1.0, ModelParams(1, 1.0)) == pytest.approx(
            TAIL_D1_M1_R1, rel=1e-11)

    def test_tail_thinner_with_mass(self):
        for d in (1, 2, 3):
            t0 = tail_mass(1.0, ModelParams(d, 0.0))
            t1 = tail_mass(1.0, ModelParams(d, 0.5))
            t2 = tail_mass(1.0, ModelParams(d, 2.0))
            assert t0 > t1 > t2 > 0

    def test_radial_tail_inverse_roundtrip(self):
        for d, m in [(1, 0.0), (1, 1.0), (2, 0.3), (3, 1.5)]:
            p = ModelParams(d, m)
            for target in (0.01, 0.5, 3.0):
                r = radial_tail_inverse(target, p)
                assert tail_mass(r, p) == pytest.approx(target, rel=1e-9)

    def test_small_ball_second_moment(self):
        # massless closed form: area * c_d * eps, linear in the cutoff
        p = ModelParams(1, 0.0)
        assert small_ball_second_moment(0.01, p) == pytest.approx(
            2 * 0.01 / math.pi, rel=1e-12)
        pm = ModelParams(1, 1.0)
        f = lambda r: 2 * levy_density(r, pm) * r * r
        ref, _ = quad(f, 0, 0.05, epsabs=1e-16, epsrel=1e-12)
        ours = small_ball_second_moment(0.05, pm)
        assert ours == pytest.approx(ref, rel=1e-9)
        assert ours < small_ball_second_moment(0.05, p)


class TestExponentMeasureConsistency:
    def test_sphere_average_forms(self):
        rho = np.array([1e-6, 0.1, 0.249, 0.251, 2.0, 40.0])
        for d in (1, 2, 3):
            vals = one_minus_sphere_avg_cos(rho, d)
            assert np.all(vals >= 0) and np.all(vals <= 2.0)
            # mean square of one coordinate on the sphere is 1/d
            assert vals[0] == pytest.approx(rho[0] ** 2 / (2 * d), rel=1e-6)

    def test_sphere_average_series_seam(self):
        v = one_minus_sphere_avg_cos(np.array([0.2499999, 0.2500001]), 3)
        assert abs(v[1] - v[0]) < 2e-8

    def test_levy_khintchine_residual_small(self):
        for d in (1, 2, 3):
            for m in (0.0, 0.3, 1.0):
                for xi in (0.25, 1.0, 4.0):
                    r = levy_khintchine_residual(xi, ModelParams(d, m))
                    assert r < 1e-6, (d, m, xi, r)
