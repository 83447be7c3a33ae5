import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fwbreak.kernel import (
    apply_Q,
    apply_Q_dx,
    fourier_tail_bound,
    kernel_closed_form,
    kernel_fourier_partial_sum,
    kernel_lattice_sum,
    kernel_values,
    multiplier,
)
from fwbreak.spectral import GridSpec, Spectrum, norm_Hs, spectral_derivative, to_field, to_spectrum

from conftest import sampled

E = math.e


def random_spectrum(rng, n=64, kmax=None):
    kmax = n // 2 - 1 if kmax is None else kmax
    c = np.zeros(n // 2 + 1, dtype=complex)
    c[1:kmax + 1] = rng.normal(size=kmax) + 1j * rng.normal(size=kmax)
    c[0] = rng.normal()
    return Spectrum(GridSpec(n), c)


class TestMultiplier:
    def test_zero_frequency(self):
        assert multiplier(0) == 1.0

    def test_first_frequency(self):
        assert multiplier(1) == pytest.approx(1.0 / (1.0 + 4.0 * math.pi**2), rel=1e-15)
        assert multiplier(1) == pytest.approx(0.0247045, abs=5e-8)

    def test_even(self):
        assert multiplier(-3) == multiplier(3)

    def test_range(self):
        vals = multiplier(np.arange(-50, 51))
        assert np.all((vals > 0) & (vals <= 1))


class TestClosedForm:
    def test_peak_value(self):
        k = kernel_closed_form(0.0)
        assert k.value == pytest.approx((1 + E) / (2 * (E - 1)), rel=1e-15)
        assert k.value == pytest.approx(1.08198, abs=1e-5)

    def test_midpoint(self):
        k = kernel_closed_form(0.5)
        assert k.value == pytest.approx(math.exp(0.5) / (E - 1), rel=1e-15)
        assert k.derivative_left == 0.0 == k.derivative_right

    def test_corner_at_zero(self):
        k = kernel_closed_form(0.0)
        assert k.derivative_right == pytest.approx(-0.5, abs=1e-15)
        assert k.derivative_left == pytest.approx(0.5, abs=1e-15)

    def test_left_derivative_is_limit_from_one(self):
        near_one = kernel_closed_form(1 - 1e-9)
        assert near_one.derivative_left == pytest.approx(kernel_closed_form(0.0).derivative_left, abs=1e-8)

    def test_periodic_reduction(self):
        assert kernel_closed_form(1.25).value == kernel_closed_form(0.25).value
        assert kernel_closed_form(-1e-20).x == 0.0

    def test_derivative_matches_finite_difference(self):
        h = 1e-6
        for x in (0.1, 0.37, 0.8):
            fd = (kernel_closed_form(x + h).value - kernel_closed_form(x - h).value) / (2 * h)
            assert kernel_closed_form(x).derivative_right == pytest.approx(fd, abs=1e-8)

    @given(st.floats(min_value=1e-9, max_value=1 - 1e-9))
    def test_positive_and_symmetric(self, x):
        k = kernel_closed_form(x)
        assert k.value > 0
        assert k.value == pytest.approx(kernel_closed_form(1 - x).value, rel=1e-13)

    def test_solves_resolvent_equation(self):
        # K - K'' = delta: away from 0, K'' = K; the derivative jump at 0 is -1
        x, h = 0.3, 1e-4
        second = (kernel_closed_form(x + h).value - 2 * kernel_closed_form(x).value
                  + kernel_closed_form(x - h).value) / h**2
        assert second == pytest.approx(kernel_closed_form(x).value, rel=1e-6)
        k0 = kernel_closed_form(0.0)
        assert k0.derivative_right - k0.derivative_left == pytest.approx(-1.0, abs=1e-15)


class TestSums:
    def test_fourier_only_mean_term(self):
        assert kernel_fourier_partial_sum(0.3, 0) == 1.0

    def test_fourier_small_direct(self):
        x = 0.3
        direct = sum(math.cos(2 * math.pi * k * x) / (1 + 4 * math.pi**2 * k * k) for k in range(-5, 6))
        assert kernel_fourier_partial_sum(x, 5) == pytest.approx(direct, abs=1e-15)

    @pytest.mark.parametrize("x", [0.0, 0.5])
    def test_fourier_converges_within_tail_bound(self, x):
        err = abs(kernel_fourier_partial_sum(x, 10_000) - kernel_closed_form(x).value)
        assert err <= 5.1e-6
        assert err <= fourier_tail_bound(10_000) + 1e-12

    def test_lattice_direct_finite_sum(self):
        expected = 0.5 * (math.exp(-0.25) + math.exp(-0.75) + math.exp(-1.25))
        assert kernel_lattice_sum(0.25, 1) == pytest.approx(expected, rel=1e-15)

    def test_lattice_peak(self):
        assert abs(kernel_lattice_sum(0.0, 40) - (1 + E) / (2 * (E - 1))) <= max(math.exp(-40), 4.5e-16)

    def test_dense_grid_bounds(self):
        x = np.linspace(0, 1, 1001, endpoint=False)
        closed = kernel_values(x)
        for K in (10, 100, 1000):
            assert np.max(np.abs(closed - kernel_fourier_partial_sum(x, K))) <= fourier_tail_bound(K)
        for L in (2, 5, 10):
            assert np.max(np.abs(closed - kernel_lattice_sum(x, L))) <= 2 * math.exp(-L)

    def test_kernel_fourier_coefficients_are_multiplier(self):
        # sample the closed form finely and compare its discrete Fourier coefficients;
        # the corner makes the aliasing error O(1/n^2)
        n = 4096
        coeffs = to_spectrum(sampled(n, kernel_values)).coeffs.real
        for k in range(5):
            assert coeffs[k] == pytest.approx(multiplier(k), abs=1e-7)

    def test_argument_validation(self):
        with pytest.raises(ValueError):
            kernel_fourier_partial_sum(0.1, -1)
        with pytest.raises(ValueError):
            kernel_lattice_sum(0.1, 0)


class TestOperators:
    def test_Q_fixes_constants(self):
        s = to_spectrum(sampled(32, lambda x: 3.0 + 0 * x))
        np.testing.assert_allclose(apply_Q(s).coeffs, s.coeffs)

    def test_Q_on_sine(self):
        f = sampled(32, lambda x: np.sin(2 * np.pi * x))
        out = to_field(apply_Q(to_spectrum(f))).values
        np.testing.assert_allclose(out, f.values / (1 + 4 * np.pi**2), atol=1e-15)

    def test_Q_zero(self):
        s = Spectrum(GridSpec(16), np.zeros(9, dtype=complex))
        assert not np.any(apply_Q(s).coeffs)

    def test_Q_dx_on_sine(self):
        grid = GridSpec(64)
        f = sampled(64, lambda x: np.sin(2 * np.pi * x))
        out = to_field(apply_Q_dx(to_spectrum(f))).values
        np.testing.assert_allclose(out, 2 * np.pi * np.cos(2 * np.pi * grid.x) / (1 + 4 * np.pi**2), atol=1e-14)

    def test_Q_dx_kills_constants(self):
        s = to_spectrum(sampled(32, lambda x: 2.5 + 0 * x))
        assert np.max(np.abs(apply_Q_dx(s).coeffs)) == 0.0

    def test_Q_is_inverse_of_one_minus_dxx(self, rng):
        s = random_spectrum(rng, 64, kmax=20)
        qs = apply_Q(s)
        back = qs.coeffs - spectral_derivative(qs, 2).coeffs
        np.testing.assert_allclose(back, s.coeffs, atol=1e-12)

    def test_Q_matches_convolution_quadrature(self):
        # (K * v)(x) by Gauss-Legendre on the smooth branch y in (0, 1)
        nodes, weights = np.polynomial.legendre.leggauss(80)
        y = 0.5 * (nodes + 1)
        w = 0.5 * weights
        v = lambda x: np.sin(2 * np.pi * x) + 0.5 * np.cos(6 * np.pi * x)
        n = 64
        grid = GridSpec(n)
        spectral = to_field(apply_Q(to_spectrum(sampled(n, v)))).values
        quad = np.array([np.sum(w * kernel_values(y) * v(x - y)) for x in grid.x])
        np.testing.assert_allclose(spectral, quad, atol=1e-13)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(-2, 3))
    def test_Q_contracts_every_Hs(self, seed, s_index):
        s = random_spectrum(np.random.default_rng(seed))
        assert norm_Hs(apply_Q(s), s_index) <= norm_Hs(s, s_index) * (1 + 1e-14)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(-2, 3))
    def test_Q_smoothing_by_two(self, seed, s_index):
        s = random_spectrum(np.random.default_rng(seed))
        assert norm_Hs(apply_Q(s), s_index + 2) == pytest.approx(norm_Hs(s, s_index), rel=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_Q_dx_bounded_L2_to_H1(self, seed):
        s = random_spectrum(np.random.default_rng(seed), 256)
        assert norm_Hs(apply_Q_dx(s), 1.0) <= norm_Hs(s, 0.0) * (1 + 1e-12)

    def test_Q_dx_bound_approaches_equality_at_high_frequency(self):
        grid = GridSpec(256)
        ratios = []
        for k in (1, 4, 16, 64):
            c = np.zeros(129, dtype=complex)
            c[k] = 1.0
            s = Spectrum(grid, c)
            ratios.append(norm_Hs(apply_Q_dx(s), 1.0) / norm_Hs(s, 0.0))
        assert all(a < b for a, b in zip(ratios, ratios[1:]))
        assert ratios[-1] == pytest.approx(1.0, abs=1e-4)

    def test_Q_commutes_with_dx(self, rng):
        s = random_spectrum(rng, 64)
        a = apply_Q(spectral_derivative(s, 1)).coeffs
        b = spectral_derivative(apply_Q(s), 1).coeffs
        np.testing.assert_allclose(a, b, atol=1e-14)

    def test_mean_fixed_and_annihilated(self, rng):
        s = random_spectrum(rng, 64)
        assert apply_Q(s).coeffs[0] == s.coeffs[0]
        assert apply_Q_dx(s).coeffs[0] == 0
