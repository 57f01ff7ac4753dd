import json
import math
from pathlib import Path

import numpy as np
import pytest

from stsqm.arrival import (
    arrival_density,
    arrival_time_density,
    best_backflow_ratio,
    current_series,
    detect_backflow,
    kijowski_reference,
    l1_distance,
    mode_superposition,
    moments,
    probability_current,
    sc_conditional_y_at_time,
    sc_cumulative_y,
    two_mode_backflow_scan,
)
from stsqm.distributions import ArrivalDistribution, FluxSeries
from stsqm.errors import DomainError, NoSupportError, WindowError
from stsqm.qm import ScalarField, TCMomentumAmplitude
from stsqm.spectral import GaussianPacketSpec, PhysicalConstants, make_grid
from stsqm.sts import SCEnergyAmplitude, SCMomentumAmplitude, SpinorField, energy_to_momentum, sc_field

FIXTURES = Path(__file__).parent / "fixtures"


def gaussian_1d(p0=10.0, sigma=0.5, constants=PhysicalConstants()):
    return SCMomentumAmplitude.gaussian(GaussianPacketSpec((p0,), (sigma,)), constants=constants)


def window(x, p0=10.0, sigma=0.5, n=1024, spreads=16.0):
    tc = x / p0
    width = math.hypot(1 / (2 * sigma), x * sigma / p0) / p0
    return make_grid(n, tc - spreads * width, tc + spreads * width)


class TestDensities:
    def test_plane_wave_is_uniform_and_improper(self):
        amp = energy_to_momentum(SCEnergyAmplitude.modes([3.0], [0.5 + 0.5j]))
        d = arrival_time_density(amp, 2.0, make_grid(64, 0.0, 10.0))
        assert d.improper
        assert np.ptp(d.samples) <= 1e-15
        assert d.samples[0] == pytest.approx(0.5 / (2 * math.pi))

    def test_two_branch_sum(self):
        amp = gaussian_1d()
        other = amp.replace(minus=0.5 * amp.branch_plus)
        tg = window(3.0)
        both = arrival_time_density(other, 3.0, tg, check_window=False)
        plus = arrival_time_density(amp, 3.0, tg)
        minus = arrival_time_density(other.replace(plus=0 * amp.branch_plus), 3.0, tg, check_window=False)
        np.testing.assert_allclose(both.samples, plus.samples + minus.samples, rtol=1e-13)

    @pytest.mark.parametrize("x", [2.0, 5.0, 10.0])
    def test_normalized(self, x):
        d = arrival_time_density(gaussian_1d(), x, window(x))
        assert d.captured_mass == pytest.approx(1.0, abs=1e-8)
        assert d.metadata["captured_mass"] == pytest.approx(1.0, abs=1e-8)
        assert not d.improper

    def test_parity_mirror(self):
        amp = gaussian_1d()
        tg = window(4.0)
        a = arrival_time_density(amp, 4.0, tg)
        b = arrival_time_density(amp.mirrored(), -4.0, tg)
        np.testing.assert_allclose(a.density, b.density, rtol=1e-12)

    def test_window_error_suggests_window(self):
        with pytest.raises(WindowError) as info:
            arrival_time_density(gaussian_1d(), 5.0, make_grid(128, 0.0, 0.4))
        lo, hi = info.value.suggested
        assert lo < 0.5 < hi
        assert info.value.captured_mass < 0.5

    def test_density_on_field_grid(self):
        yg = make_grid(64, -20, 20)
        amp = SCMomentumAmplitude.gaussian(GaussianPacketSpec((10.0, 0.5), (0.5, 0.5)), (yg.conjugate(),))
        f = sc_field(amp, 5.0, window(5.0, n=256), (yg,))
        d = arrival_density(f)
        assert d.axes == ("t", "y")
        assert d.captured_mass == pytest.approx(1.0, abs=1e-12)
        assert moments(d, 1, "t") == pytest.approx(moments(arrival_time_density(amp, 5.0, f.t_grid), 1), rel=1e-10)


class TestKijowski:
    def test_agrees_with_reference(self):
        p0, sigma, x = 6.0, 0.5, 3.0
        spec = GaussianPacketSpec((p0,), (sigma,))
        xg = make_grid(2048, -150.0, 150.0)
        tc = TCMomentumAmplitude.gaussian(spec, xg)
        tg = window(x, p0, sigma, n=256)
        a = arrival_time_density(SCMomentumAmplitude.gaussian(spec), x, tg)
        b = kijowski_reference(tc, x, tg)
        mask = b.density >= 1e-12 * b.density.max()
        rel = np.abs(a.density - b.density)[mask] / b.density[mask]
        assert rel.max() <= 1e-6
        assert b.metadata["captured_mass"] == pytest.approx(1.0, abs=1e-6)

    def test_negative_momenta_arrive_from_the_right(self):
        spec = GaussianPacketSpec((-6.0,), (0.5,))
        xg = make_grid(2048, -150.0, 150.0)
        tc = TCMomentumAmplitude.gaussian(spec, xg)
        tg = window(3.0, 6.0, 0.5, n=256)
        a = arrival_time_density(SCMomentumAmplitude.gaussian(spec), -3.0, tg)
        b = kijowski_reference(tc, -3.0, tg)
        np.testing.assert_allclose(a.density, b.density, atol=1e-8 * b.density.max())


class TestCurrent:
    def test_plane_wave_current(self):
        xg = make_grid(32, 0.0, 4 * math.pi)
        tc, _ = mode_superposition([1.5], [2.0], xg)
        flux = current_series(tc, 1.0, [0.0, 0.3], xg)
        # |psi|^2 = 4, velocity 1.5
        np.testing.assert_allclose(flux.current, 6.0, rtol=1e-12)

    def test_real_wave_function_has_no_current(self):
        xg = make_grid(128, -20, 20)
        psi = np.exp(-xg.points**2 / 4)
        flux = probability_current([ScalarField(psi, 0.0, (xg,))], 0.7)
        assert abs(flux.current[0]) <= 1e-15

    def test_plane_outside_grid(self):
        xg = make_grid(8, 0, 1)
        with pytest.raises(DomainError):
            probability_current([ScalarField(np.ones(8), 0.0, (xg,))], 2.0)
        with pytest.raises(DomainError):
            probability_current([], 0.5)

    def test_mode_superposition_rejects_off_grid(self):
        with pytest.raises(DomainError):
            mode_superposition([1.1], [1.0], make_grid(32, 0.0, 4 * math.pi))


@pytest.fixture(scope="module")
def fixture():
    return json.loads((FIXTURES / "backflow.json").read_text())


class TestBackflowFixture:
    def test_fixture_is_the_search_result(self, fixture):
        s = fixture["search"]
        k1, k2 = fixture["momenta"]
        ratio, jmin = best_backflow_ratio(k1, k2, s["lo"], s["hi"], s["steps"])
        assert fixture["coefficients"] == [1.0, ratio]
        assert fixture["normalized_min_current"] == jmin

    def test_current_negative_while_densities_are_not(self, fixture):
        g = fixture["x_grid"]
        L = g["length_over_pi"] * math.pi
        xg = make_grid(g["n"], -L / 2, L / 2)
        tc, sc = mode_superposition(fixture["momenta"], fixture["coefficients"], xg)
        p = np.array(fixture["momenta"])
        period = 2 * math.pi / np.ptp(p**2 / 2)
        tg = make_grid(512, 0.0, period)
        flux = current_series(tc, 0.0, tg.points, xg)
        runs = detect_backflow(flux)
        assert len(runs) == 1
        c = fixture["coefficients"][1]
        assert runs[0][2] == pytest.approx(1 + 2 * c**2 - 3 * c, abs=1e-4)
        sts = arrival_time_density(sc, 0.0, tg)
        kij = kijowski_reference(tc, 0.0, tg)
        assert sts.samples.min() >= -1e-14 and kij.samples.min() >= -1e-14
        np.testing.assert_allclose(sts.samples, kij.samples, rtol=1e-12)

    def test_scan_closed_form(self):
        # J_min of e^{ix} + c e^{2ix} is 1 + 2c^2 - 3c, negative only for 1/2 < c < 1
        c = np.array([0.25, 0.5, 0.75, 1.0, 1.5])
        got = two_mode_backflow_scan(1.0, 2.0, c, phases=720) * (1 + c**2)
        np.testing.assert_allclose(got, 1 + 2 * c**2 - 3 * c, atol=1e-12)


class TestDetectBackflow:
    def test_runs(self):
        t = np.arange(8.0)
        j = np.array([1, -1, -2, 1, 1, -0.5, 1, -3])
        assert detect_backflow(FluxSeries(t, j)) == [(1.0, 2.0, -2.0), (5.0, 5.0, -0.5), (7.0, 7.0, -3.0)]

    def test_none(self):
        assert detect_backflow(FluxSeries(np.arange(3.0), np.ones(3))) == []


def tilted_field(correlation=0.0, x=5.0):
    yg = make_grid(128, -25, 25)
    spec = GaussianPacketSpec((10.0, 1.5), (0.5, 0.4), correlation=correlation)
    amp = SCMomentumAmplitude.gaussian(spec, (yg.conjugate(),))
    return sc_field(amp, x, window(x, n=512, spreads=20), (yg,)), spec


class TestYDistributions:
    @pytest.mark.parametrize("rho", [0.0, 0.5])
    def test_cumulative_mean_follows_momentum_ratio(self, rho):
        x = 5.0
        f, spec = tilted_field(rho, x)
        got = moments(sc_cumulative_y(f), 1)
        # independent quadrature of x <p_y / p_x> over |phi_tilde|^2
        px = np.linspace(10.0 - 6, 10.0 + 6, 2401)
        py = np.linspace(1.5 - 5, 1.5 + 5, 2001)
        P, Q = np.meshgrid(px, py, indexing="ij")
        u, v = (P - 10.0) / 0.5, (Q - 1.5) / 0.4
        w = np.exp(-(u * u + v * v - 2 * rho * u * v) / (2 * (1 - rho**2)))
        expect = x * float(np.sum(Q / P * w) / np.sum(w))
        assert got == pytest.approx(expect, abs=1e-8)

    def test_conditional_at_time(self):
        f, _ = tilted_field()
        d = sc_conditional_y_at_time(f, 0.5)
        assert d.captured_mass == pytest.approx(1.0, abs=1e-12)
        assert d.metadata["time"] == pytest.approx(f.t_grid.points[d.metadata["row"]])

    def test_conditional_errors(self):
        f, _ = tilted_field()
        with pytest.raises(DomainError):
            sc_conditional_y_at_time(f, 100.0)
        tg, yg = make_grid(4, 0, 1), make_grid(4, 0, 1)
        plus = np.zeros((4, 4))
        plus[0] = 1.0
        z = SpinorField(plus, np.zeros((4, 4)), 0.0, tg, (yg,))
        with pytest.raises(NoSupportError, match="no arrivals at this time"):
            sc_conditional_y_at_time(z, 0.5)

    def test_needs_transverse_axis(self):
        f = SpinorField(np.ones(4), np.zeros(4), 0.0, make_grid(4, 0, 1))
        with pytest.raises(DomainError):
            sc_cumulative_y(f)


class TestMoments:
    def gaussian_dist(self, mu=1.5, s=0.3, n=400):
        g = make_grid(n, mu - 10 * s, mu + 10 * s)
        raw = np.exp(-((g.points - mu) ** 2) / (2 * s * s))
        return ArrivalDistribution(("t",), (g.points,), raw, 1.0, (g.spacing,))

    def test_mean_and_variance(self):
        d = self.gaussian_dist()
        assert moments(d, 1) == pytest.approx(1.5, abs=1e-12)
        assert moments(d, 2, central=True) == pytest.approx(0.09, rel=1e-10)
        assert moments(d, 2) == pytest.approx(0.09 + 2.25, rel=1e-10)

    def test_errors(self):
        d = self.gaussian_dist()
        with pytest.raises(DomainError):
            moments(d, 3)
        with pytest.raises(NoSupportError):
            moments(ArrivalDistribution(("t",), (np.arange(3.0),), np.zeros(3), 1.0, (1.0,)), 1)

    def test_l1(self):
        a = self.gaussian_dist()
        assert l1_distance(a, a) == 0.0
        with pytest.raises(DomainError):
            l1_distance(a, self.gaussian_dist(n=200))
