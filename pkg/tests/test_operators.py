import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stsqm.errors import DomainError, SingularCoefficientError, StepSizeError
from stsqm.operators import (
    DIRAC_VARIANTS,
    IDENTITY,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    ModeCoordinates,
    apply_coupled_sc_step,
    apply_px_sigma_z,
    dirac_split_matrix,
    dispersion_residual,
    integrate_stationary_sc,
    px_eigenvalue_sigma_z,
    random_modes,
    verify_anticommutation,
)
from stsqm.spectral import PhysicalConstants, make_grid
from stsqm.sts import SpinorField

finite = st.floats(-50, 50, allow_nan=False)


class TestEigenvalues:
    def test_examples(self):
        assert px_eigenvalue_sigma_z(ModeCoordinates(2.0)) == (2.0, -2.0)
        assert px_eigenvalue_sigma_z(ModeCoordinates(1.5, (), 1.5)) == (0.0, 0.0)
        lp, lm = px_eigenvalue_sigma_z(ModeCoordinates(0.0, (), 1.0))
        assert lp == pytest.approx(1j * math.sqrt(2), abs=1e-15)
        assert lm == -lp
        assert lp**2 == pytest.approx(-2.0)

    @settings(max_examples=200, deadline=None)
    @given(e=finite, v=finite, py=finite, pz=finite, m=st.floats(0.1, 10))
    def test_square_is_dispersion(self, e, v, py, pz, m):
        c = PhysicalConstants(1.0, m)
        mode = ModeCoordinates(e, (py, pz), v)
        lp, lm = px_eigenvalue_sigma_z(mode, c)
        d = mode.dispersion(c)
        assert lm == -lp
        assert abs(lp * lp - d) <= 1e-12 * max(1.0, abs(d))
        assert (lp.imag == 0) == (d >= 0) or d == 0


class TestDiracSplit:
    def test_examples(self):
        np.testing.assert_array_equal(dirac_split_matrix(ModeCoordinates(2.0)), np.diag([2, -2]))
        np.testing.assert_array_equal(dirac_split_matrix(ModeCoordinates(0.0, (1.0, 0.0))), 1j * SIGMA_X)
        M = dirac_split_matrix(ModeCoordinates(2.0, (), 1.0))
        np.testing.assert_allclose(M @ M, 2.0 * IDENTITY, atol=1e-14)

    def test_unknown_variant(self):
        with pytest.raises(DomainError):
            dirac_split_matrix(ModeCoordinates(1.0), variant="majorana")

    @pytest.mark.parametrize("variant", DIRAC_VARIANTS)
    def test_square_identity_on_random_modes(self, variant):
        rng = np.random.default_rng(7)
        modes = random_modes(1000, rng)
        assert any(not m.allowed() for m in modes) and any(m.allowed() for m in modes)
        worst = max(dispersion_residual(m, PhysicalConstants(), variant) for m in modes)
        assert worst <= 1e-12

    def test_variants_agree_without_potential_and_transverse(self):
        mode = ModeCoordinates(3.0)
        np.testing.assert_allclose(dirac_split_matrix(mode, variant="dirac"),
                                   dirac_split_matrix(mode, variant="kinetic-split"), atol=0)


class TestAnticommutation:
    def test_pauli_pairs(self):
        rep = verify_anticommutation(SIGMA_Z, SIGMA_X)
        assert rep and rep.alpha_sq == 0 and rep.beta_sq == 0 and rep.anticommutator == 0
        assert verify_anticommutation(SIGMA_X, SIGMA_Z)
        assert verify_anticommutation(SIGMA_Y, SIGMA_Z)

    def test_same_matrix_fails(self):
        rep = verify_anticommutation(SIGMA_Z, SIGMA_Z)
        assert not rep
        assert rep.anticommutator == 2.0

    def test_scaled_fails_square(self):
        rep = verify_anticommutation(2 * SIGMA_Z, SIGMA_X)
        assert not rep and rep.alpha_sq == 3.0


def const_potential(v):
    return lambda x: v + 0.0 * np.asarray(x)


class TestStationary:
    def test_constant_potential_plane_wave(self):
        e, v = 5.0, 1.0
        k = math.sqrt(2 * (e - v))
        L = 2 * math.pi / k
        g = make_grid(401, 0.0, L * 401 / 400)
        prof = integrate_stationary_sc(1.0, 1j * k, e, const_potential(v), g, "+")
        err = np.max(np.abs(prof.phi - np.exp(1j * k * g.points)))
        assert err <= 1e-8
        assert prof.phi_plus is prof.phi and prof.phi_minus is None

    def test_fourth_order(self):
        e, v = 5.0, 1.0
        k = math.sqrt(2 * (e - v))
        L = 4.0
        errs = []
        for n in (40, 80, 160):
            g = make_grid(n + 1, 0.0, L * (n + 1) / n)
            prof = integrate_stationary_sc(1.0, 1j * k, e, const_potential(v), g)
            errs.append(abs(prof.phi[-1] - np.exp(1j * k * g.points[-1])))
        orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
        assert all(3.7 <= p <= 4.3 for p in orders), orders

    def test_degenerate_dispersion_is_linear(self):
        g = make_grid(101, 0.0, 2.0)
        prof = integrate_stationary_sc(0.5, 0.25, 2.0, const_potential(2.0), g)
        np.testing.assert_allclose(prof.phi, 0.5 + 0.25 * g.points, atol=1e-13)

    def test_branch_conjugation_on_smooth_step(self):
        V = lambda x: 2.0 / (1.0 + np.exp(-np.asarray(x) / 0.3)) + 0.5
        g = make_grid(801, -3.0, 3.0)
        e = 3.0
        a0, b0 = 1.0 + 0.2j, 0.3 + 2.0j
        plus = integrate_stationary_sc(a0, b0, e, V, g, "+")
        minus = integrate_stationary_sc(np.conj(a0), np.conj(b0), e, V, g, "-")
        assert np.max(np.abs(minus.phi - np.conj(plus.phi))) <= 1e-12 * np.max(np.abs(plus.phi))
        # branches really differ for x-dependent V
        same = integrate_stationary_sc(a0, b0, e, V, g, "-")
        assert np.max(np.abs(same.phi - plus.phi)) > 1e-3

    def test_linearity(self):
        V = lambda x: 1.0 + 0.3 * np.sin(np.asarray(x))
        g = make_grid(201, 0.0, 5.0)
        c = 0.7 - 1.3j
        a = integrate_stationary_sc(1.0, 0.5j, 4.0, V, g)
        b = integrate_stationary_sc(c, 0.5j * c, 4.0, V, g)
        assert np.max(np.abs(b.phi - c * a.phi)) <= 1e-14 * np.max(np.abs(b.phi))

    def test_refuses_vanishing_potential(self):
        g = make_grid(51, -1.0, 1.0)
        with pytest.raises(SingularCoefficientError, match="singular 1/V coefficient"):
            integrate_stationary_sc(1.0, 0.0, 1.0, lambda x: np.asarray(x), g)
        with pytest.raises(SingularCoefficientError):
            integrate_stationary_sc(1.0, 0.0, 1.0, const_potential(0.0), g)

    def test_bad_branch(self):
        with pytest.raises(DomainError):
            integrate_stationary_sc(1.0, 0.0, 1.0, const_potential(1.0), make_grid(11, 0, 1), "up")


def periodic_mode_field(e_index=6, py_index=2, branch=1, nt=64, ny=16):
    """Single (eps, p_y) mode exactly on periodic grids."""
    tg = make_grid(nt, 0.0, 2 * math.pi)  # energy spacing 1
    yg = make_grid(ny, 0.0, 2 * math.pi)  # momentum spacing 1
    t, y = np.meshgrid(tg.points, yg.points, indexing="ij")
    wave = np.exp(-1j * e_index * t + 1j * py_index * y)
    zero = np.zeros_like(wave)
    plus, minus = (wave, zero) if branch > 0 else (zero, wave)
    return SpinorField(plus, minus, 0.0, tg, (yg,)), float(e_index), float(py_index)


class TestCoupledStep:
    @pytest.mark.parametrize("method", ["exact", "midpoint"])
    def test_free_mode_phase(self, method):
        f, e, py = periodic_mode_field()
        dx = 1e-2
        out = apply_coupled_sc_step(f, dx, method=method)
        k = math.sqrt(2 * e - py**2)
        expected = np.exp(1j * k * dx) * f.plus
        tol = 1e-12 if method == "exact" else (k * dx) ** 3
        assert np.max(np.abs(out.plus - expected)) <= tol
        assert np.max(np.abs(out.minus)) <= 1e-14
        assert out.x == pytest.approx(dx)

    def test_minus_branch_phase(self):
        f, e, py = periodic_mode_field(branch=-1)
        out = apply_coupled_sc_step(f, 0.05)
        k = math.sqrt(2 * e - py**2)
        assert np.max(np.abs(out.minus - np.exp(-1j * k * 0.05) * f.minus)) <= 1e-12
        assert np.max(np.abs(out.plus)) <= 1e-14

    def test_free_step_conserves_component_norms(self):
        rng = np.random.default_rng(5)
        tg = make_grid(64, 0.0, 2 * math.pi)
        yg = make_grid(16, 0.0, 2 * math.pi)
        # random field on modes with eps >= p_y^2/2 only
        eps = tg.conjugate().points[:, None]
        py = yg.conjugate().points[None, :]
        allowed = eps >= py**2 / 2
        from stsqm.operators import _from_modes

        P = np.where(allowed, rng.normal(size=(64, 16)) + 1j * rng.normal(size=(64, 16)), 0)
        Q = np.where(allowed, rng.normal(size=(64, 16)) + 1j * rng.normal(size=(64, 16)), 0)
        f = SpinorField(_from_modes(P, tg, (yg,), 1.0), _from_modes(Q, tg, (yg,), 1.0), 0.0, tg, (yg,))
        out = f
        for _ in range(10):
            out = apply_coupled_sc_step(out, 0.1)
        for a, b in ((f.plus, out.plus), (f.minus, out.minus)):
            assert abs(np.linalg.norm(b) - np.linalg.norm(a)) <= 1e-10 * np.linalg.norm(a)

    def test_potential_transfers_at_first_order(self):
        f, _, _ = periodic_mode_field()
        amounts = []
        for dx in (1e-2, 5e-3, 2.5e-3):
            out = apply_coupled_sc_step(f, dx, potential=1.5)
            amounts.append(np.linalg.norm(out.minus) / np.linalg.norm(f.plus))
        assert amounts[0] > 0
        for a, b in zip(amounts, amounts[1:]):
            assert a / b == pytest.approx(2.0, rel=1e-2)

    def test_dirac_variant_couples_transverse_momentum(self):
        f, _, _ = periodic_mode_field()
        out = apply_coupled_sc_step(f, 1e-2, variant="dirac")
        assert np.linalg.norm(out.minus) > 1e-4
        out = apply_coupled_sc_step(f, 1e-2, variant="kinetic-split")
        assert np.linalg.norm(out.minus) <= 1e-14

    def test_step_size_rejection(self):
        f, _, _ = periodic_mode_field(nt=64)
        with pytest.raises(StepSizeError) as info:
            apply_coupled_sc_step(f, 5.0, potential=40.0)
        assert info.value.spectral_radius > info.value.bound

    def test_matches_sigma_z_generator(self):
        f, e, py = periodic_mode_field()
        p, m = apply_px_sigma_z(f.plus, f.minus, f.t_grid, f.transverse)
        k = math.sqrt(2 * e - py**2)
        assert np.max(np.abs(p - k * f.plus)) <= 1e-12
        assert np.max(np.abs(m)) <= 1e-14
