import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stsqm.errors import DomainError
from stsqm.spectral import (
    SPACE_TO_MOMENTUM,
    TIME_TO_ENERGY,
    GaussianPacketSpec,
    PhysicalConstants,
    comb_axis,
    discrete_norm,
    energy_derivative_apply,
    forward_transform,
    gauss_legendre_axis,
    gaussian_amplitude,
    half_derivative_apply,
    inverse_transform,
    make_grid,
    mode_axis,
    principal_sqrt,
)


def brute_transform(f, grid, sign, hbar=1.0):
    # direct O(n^2) sum of the defining integral on the conjugate grid
    q = grid.conjugate(hbar).points
    x = grid.points
    kern = np.exp(sign * 1j * np.outer(q, x) / hbar)
    return kern @ f * grid.spacing / math.sqrt(2 * math.pi * hbar)


class TestGrid:
    def test_small_grids(self):
        g = make_grid(4, 0, 4)
        assert np.array_equal(g.points, [0, 1, 2, 3])
        assert g.spacing == 1
        g = make_grid(2, -1, 1)
        assert np.array_equal(g.points, [-1, 0])
        assert g.spacing == 1

    def test_conjugate_spacing(self):
        g = make_grid(1024, -50, 50)
        assert g.spacing == pytest.approx(100 / 1024, rel=1e-15)
        # 2 pi hbar / (n * spacing) = 2 pi / 100
        assert g.conjugate_spacing() == pytest.approx(2 * math.pi / 100, rel=1e-14)
        assert g.conjugate_spacing(hbar=2.0) == pytest.approx(4 * math.pi / 100, rel=1e-14)
        c = g.conjugate()
        assert c.n == 1024
        assert c.lo == pytest.approx(-512 * 2 * math.pi / 100)

    @pytest.mark.parametrize("n, lo, hi", [(1, 0, 1), (0, 0, 1), (4, 1, 1), (4, 2, 1)])
    def test_rejects_bad_grids(self, n, lo, hi):
        with pytest.raises(DomainError):
            make_grid(n, lo, hi)

    def test_constants_validation(self):
        assert PhysicalConstants() == PhysicalConstants(1.0, 1.0)
        for bad in ((0.0, 1.0), (1.0, -1.0)):
            with pytest.raises(ValueError):
                PhysicalConstants(*bad)


class TestTransforms:
    def test_zero_in_zero_out(self):
        g = make_grid(16, -3, 3)
        assert np.all(forward_transform(np.zeros(16), g, TIME_TO_ENERGY) == 0)

    def test_length_mismatch(self):
        with pytest.raises(DomainError):
            forward_transform(np.zeros(15), make_grid(16, 0, 1), SPACE_TO_MOMENTUM)

    @pytest.mark.parametrize("sign", [TIME_TO_ENERGY, SPACE_TO_MOMENTUM])
    def test_matches_brute_force_sum(self, sign):
        rng = np.random.default_rng(3)
        g = make_grid(64, -2.3, 5.1)
        f = rng.normal(size=64) + 1j * rng.normal(size=64)
        np.testing.assert_allclose(forward_transform(f, g, sign, hbar=0.7), brute_transform(f, g, sign, 0.7),
                                   rtol=0, atol=1e-12 * np.abs(f).sum())

    def test_gaussian_pair(self):
        g = make_grid(1024, -40, 40)
        f = np.exp(-g.points**2 / 2)
        F = forward_transform(f, g, TIME_TO_ENERGY)
        eps = g.conjugate().points
        np.testing.assert_allclose(F, np.exp(-eps**2 / 2), atol=1e-13)
        assert discrete_norm(F, g.conjugate()) == pytest.approx(discrete_norm(f, g), rel=1e-12)

    def test_windowed_plane_wave_peaks_at_nearest_point(self):
        g = make_grid(256, 0, 50)
        e0 = 3.3
        w = np.exp(-((g.points - 25) ** 2) / 50)
        F = forward_transform(w * np.exp(-1j * e0 * g.points), g, TIME_TO_ENERGY)
        conj = g.conjugate()
        assert np.argmax(np.abs(F)) == conj.nearest_index(e0)

    @pytest.mark.parametrize("n", [8, 64, 1024])
    def test_plancherel_and_round_trip(self, n):
        rng = np.random.default_rng(n)
        g = make_grid(n, -1.7, 4.2)
        f = rng.normal(size=n) + 1j * rng.normal(size=n)
        for sign in (TIME_TO_ENERGY, SPACE_TO_MOMENTUM):
            F = forward_transform(f, g, sign)
            assert discrete_norm(F, g.conjugate()) == pytest.approx(discrete_norm(f, g), rel=1e-12)
            back = inverse_transform(F, g, sign)
            assert np.linalg.norm(back - f) <= 1e-12 * np.linalg.norm(f)

    def test_multi_axis(self):
        rng = np.random.default_rng(1)
        g = make_grid(32, 0, 3)
        f = rng.normal(size=(5, 32, 3))
        F = forward_transform(f, g, SPACE_TO_MOMENTUM, axis=1)
        np.testing.assert_allclose(F[2, :, 1], forward_transform(f[2, :, 1], g, SPACE_TO_MOMENTUM), atol=1e-14)

    @settings(max_examples=40, deadline=None)
    @given(lo=st.floats(-20, 20), length=st.floats(0.5, 30), logn=st.integers(2, 9),
           hbar=st.floats(0.3, 3.0), seed=st.integers(0, 2**31))
    def test_round_trip_property(self, lo, length, logn, hbar, seed):
        n = 2**logn
        g = make_grid(n, lo, lo + length)
        rng = np.random.default_rng(seed)
        f = rng.normal(size=n) + 1j * rng.normal(size=n)
        for sign in (1, -1):
            back = inverse_transform(forward_transform(f, g, sign, hbar), g, sign, hbar)
            assert np.linalg.norm(back - f) <= 1e-12 * np.linalg.norm(f)


class TestHalfDerivative:
    def periodic(self, n=256):
        return make_grid(n, 0.0, 2 * math.pi * 4)

    def test_eigen_action(self):
        g = self.periodic()
        conj = g.conjugate()
        k = conj.nearest_index(4.0)
        eps = conj.points[k]
        assert eps == pytest.approx(4.0)
        f = np.exp(-1j * eps * g.points)
        out = half_derivative_apply(f, g)
        assert np.max(np.abs(out - 2.0 * f)) <= 1e-8

    def test_negative_energy_uses_principal_branch(self):
        g = self.periodic()
        f = np.exp(+1j * 4.0 * g.points)  # eps = -4
        out = half_derivative_apply(f, g)
        assert np.max(np.abs(out - 2j * f)) <= 1e-10
        assert principal_sqrt(-4.0 - 0.0j) == 2j

    def test_constant_maps_to_zero(self):
        g = self.periodic(64)
        assert np.max(np.abs(half_derivative_apply(np.ones(64), g))) < 1e-14

    def test_two_mode_weights(self):
        g = self.periodic()
        a, b = 0.3 - 0.2j, 1.1 + 0.4j
        e1 = np.exp(-1j * 1.0 * g.points)
        e9 = np.exp(-1j * 9.0 * g.points)
        out = half_derivative_apply(a * e1 + b * e9, g)
        np.testing.assert_allclose(out, a * e1 + 3 * b * e9, atol=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**31), hbar=st.floats(0.5, 2.0))
    def test_square_is_energy_multiplier(self, seed, hbar):
        rng = np.random.default_rng(seed)
        g = make_grid(128, -3.0, 9.0)
        # band-limited: random coefficients on the interior of the energy grid
        spec = np.zeros(128, dtype=complex)
        spec[32:96] = rng.normal(size=64) + 1j * rng.normal(size=64)
        f = inverse_transform(spec, g, TIME_TO_ENERGY, hbar)
        twice = half_derivative_apply(half_derivative_apply(f, g, hbar), g, hbar)
        full = energy_derivative_apply(f, g, hbar)
        assert np.linalg.norm(twice - full) <= 1e-10 * np.linalg.norm(full)

    def test_energy_derivative_is_i_hbar_dt(self):
        g = make_grid(512, -20, 20)
        t = g.points
        f = np.exp(-t**2 / 2) * np.exp(-2j * t)
        exact = 1j * (-t - 2j) * f
        np.testing.assert_allclose(energy_derivative_apply(f, g), exact, atol=1e-11)


class TestGaussian:
    def test_centered_real_even_normalized(self):
        g = make_grid(256, -10, 10)
        amp = gaussian_amplitude(GaussianPacketSpec((0.0,), (1.0,)), g)
        assert np.max(np.abs(amp.imag)) < 1e-15
        np.testing.assert_allclose(amp[1:], amp[1:][::-1], atol=1e-15)
        assert discrete_norm(amp, g) == pytest.approx(1.0, abs=1e-12)

    def test_position_shift_is_phase_only(self):
        g = make_grid(128, -8, 8)
        a = gaussian_amplitude(GaussianPacketSpec((1.0,), (0.7,), (0.0,)), g)
        b = gaussian_amplitude(GaussianPacketSpec((1.0,), (0.7,), (3.3,), 1.2), g)
        np.testing.assert_allclose(np.abs(a), np.abs(b), rtol=1e-13)

    def test_negative_momentum_fraction(self):
        g = make_grid(4096, -100, 100).conjugate()
        amp = gaussian_amplitude(GaussianPacketSpec((10.0,), (0.5,)), g)
        frac = float(np.sum(np.abs(amp[g.points < 0]) ** 2) * g.spacing)
        bound = 0.5 * math.erfc(10.0 / (0.5 * math.sqrt(2)))
        assert frac < 1e-8
        assert frac <= bound + 1e-300

    def test_tail_fraction_matches_erfc(self):
        g = make_grid(4096, -100, 100).conjugate()
        amp = gaussian_amplitude(GaussianPacketSpec((1.0,), (0.5,)), g)
        frac = float(np.sum(np.abs(amp[g.points < 0]) ** 2) * g.spacing)
        # trapezoid on (-inf, 0]: half weight at p = 0, Euler-Maclaurin end term
        rho0 = float(np.abs(amp[g.nearest_index(0.0)]) ** 2)
        frac += 0.5 * rho0 * g.spacing
        drho0 = rho0 * 1.0 / 0.5**2  # rho(p) slope at 0: rho(0) p0 / sigma^2
        frac -= g.spacing**2 / 12 * drho0
        assert frac == pytest.approx(0.5 * math.erfc(1.0 / (0.5 * math.sqrt(2))), rel=1e-6)

    def test_widths_must_be_positive(self):
        with pytest.raises(ValueError):
            GaussianPacketSpec((1.0,), (0.0,))

    def test_norm_on_quadrature_axes(self):
        ax = gauss_legendre_axis(0.0, 20.0, 40)
        amp = gaussian_amplitude(GaussianPacketSpec((10.0,), (0.5,)), ax)
        assert discrete_norm(amp, ax) == pytest.approx(1.0, abs=1e-12)


class TestQuadratureAxes:
    def test_gauss_legendre_integrates_polynomials(self):
        ax = gauss_legendre_axis(0.0, 3.0, 5, order=8)
        assert len(ax) == 40
        assert ax.nodes.min() > 0
        assert np.sum(ax.weights * ax.nodes**15) == pytest.approx(3.0**16 / 16, rel=1e-13)

    def test_gauss_legendre_sqrt_endpoint(self):
        ax = gauss_legendre_axis(0.0, 1.0, 64)
        # integral of sqrt(p) exp(-p) on [0, 1] by series sum
        exact = sum((-1) ** k / math.factorial(k) / (k + 1.5) for k in range(40))
        assert np.sum(ax.weights * np.sqrt(ax.nodes) * np.exp(-ax.nodes)) == pytest.approx(exact, rel=1e-6)

    def test_mode_and_comb(self):
        m = mode_axis([1.0, 2.0])
        assert m.discrete and np.array_equal(m.weights, [1, 1])
        c = comb_axis(0.5, 4)
        np.testing.assert_allclose(c.nodes, [0.5, 1.0, 1.5, 2.0])
        with pytest.raises(DomainError):
            mode_axis([-1.0])
