"""Decomposition round trips, refined parameters, and tracking."""

import numpy as np
import pytest

from cmlab.modulation import (Decomposer, NewtonError, OutsideTubeError,
                              cutoff_normalization, decompose, initial_guess,
                              modulate, refined_params, renormalize,
                              synthetic_field, w1_of)
from cmlab.solitons import ProfileParams, profile_p1, soliton_q
from cmlab.spectral import Field, Grid

GRID = Grid(4096, 200.0)


@pytest.fixture(scope="module")
def dec():
    return Decomposer(GRID)


def odd_orthogonal_radiation(dec, size=1e-3):
    """Decaying closed-form radiation orthogonal to every test profile.

    A real odd seed pairs to zero with all Z's except Z_3 by parity; the
    remaining component is removed along the decaying kernel direction Q_x,
    so the result has no growing parts and is exactly representable.
    """
    c3 = dec.basis.diag[2]
    z3 = dec.basis.z_elems[2]
    seed_vals = size * GRID.x * np.exp(-(GRID.x**2) / 4.0) + 0j
    coef = GRID.inner_r(seed_vals, z3) / c3

    def rad(y):
        qp = -np.sqrt(2.0) * y / (1 + y**2) ** 1.5
        return size * y * np.exp(-(y**2) / 4.0) - coef * qp

    return rad


class TestRenormalize:
    def test_round_trip(self):
        f = Field(GRID, np.exp(-(GRID.x / 5) ** 2) * np.exp(0.3j * GRID.x))
        w = renormalize(f, 1.3, 0.7, 2.0)
        back = modulate(w, 1.3, 0.7, 2.0)
        assert GRID.l2(back.values - f.values) < 1e-8

    def test_identity_parameters(self):
        f = Field(GRID, np.exp(-GRID.x**2) + 0j)
        assert GRID.l2(modulate(f, 1.0, 0.0, 0.0).values - f.values) < 1e-13

    def test_norm_preserved(self):
        f = Field(GRID, np.exp(-(GRID.x / 5) ** 2) * np.exp(0.3j * GRID.x))
        assert abs(modulate(f, 0.8, 1.1, -3.0).l2 - f.l2) < 1e-10

    def test_closed_form_sampling(self):
        q = soliton_q(GRID)
        out = modulate(q, 2.0, np.pi / 3, 5.0)
        y = (GRID.x - 5.0) / 2.0
        expect = np.exp(1j * np.pi / 3) / np.sqrt(2.0) * np.sqrt(2.0) / np.sqrt(1 + y**2)
        inner = np.abs(GRID.x) < 60
        assert np.max(np.abs(out.values - expect)[inner]) < 1e-9

    def test_bandwidth_guard(self):
        # a pure mode near the top of the band cannot be squeezed further
        k = int(0.9 * GRID.n / 2)
        f = Field(GRID, np.exp(1j * (2 * np.pi * k / GRID.length) * GRID.x))
        from cmlab.modulation import bandwidth_guard
        with pytest.raises(ValueError):
            bandwidth_guard(f, 0.5)


class TestDecompose:
    def test_exact_fixed_point(self, dec):
        res = dec.decompose(Field(GRID, soliton_q(GRID).values.copy()))
        s = res.state
        assert abs(s.lam - 1) < 1e-12 and abs(s.gamma) < 1e-12 and abs(s.center) < 1e-12
        assert max(abs(s.b), abs(s.eta), abs(s.nu), abs(s.mu)) < 1e-12
        assert res.eps.l2 < 1e-10

    def test_synthetic_profile_recovery(self, dec):
        v = synthetic_field(GRID, 0.9, 0.5, 3.0, ProfileParams(0.05, 0.001, 0.01))
        res = dec.decompose(v, guess=(0.9, 0.5, 3.0))
        s = res.state
        assert abs(s.lam - 0.9) < 1e-8 and abs(s.gamma - 0.5) < 1e-8
        assert abs(s.center - 3.0) < 1e-8
        assert abs(s.b - 0.05) < 1e-8 and abs(s.eta - 0.001) < 1e-8
        assert abs(s.nu - 0.01) < 1e-8 and abs(s.mu) < 1e-8
        # the growing profile is not box-representable, so the resampled
        # radiation field carries wrap junk at the box ends; centrally and
        # in the weighted norm it vanishes
        central = np.abs(GRID.x) <= GRID.length / 4
        assert GRID.l2(res.eps.values * central) < 1e-3
        assert np.max(np.abs(res.ortho_residuals)) < 1e-10

    def test_cold_start(self, dec):
        v = synthetic_field(GRID, 0.9, 0.5, 3.0, ProfileParams(0.05, 0.001, 0.01))
        res = dec.decompose(v)
        assert abs(res.state.lam - 0.9) < 1e-8
        assert res.newton_iters <= 10

    def test_orthogonal_radiation_untouched(self, dec):
        rad = odd_orthogonal_radiation(dec)
        # profile-free centered field: everything is box-representable, so
        # the radiation comes back exactly
        v = synthetic_field(GRID, 1.0, 0.3, 0.0, ProfileParams(), radiation=rad)
        res = dec.decompose(v, guess=(1.0, 0.3, 0.0))
        s = res.state
        assert abs(s.lam - 1.0) < 1e-10 and abs(s.gamma - 0.3) < 1e-10
        assert max(abs(s.b), abs(s.eta), abs(s.nu)) < 1e-10
        assert GRID.l2(res.eps.values - rad(GRID.x)) < 1e-12
        # off-center sub-unity variant: the displaced soliton tail is mildly
        # non-periodic, recovery is interpolation-limited at the box ends
        v2 = synthetic_field(GRID, 0.9, 0.3, -2.0, ProfileParams(), radiation=rad)
        res2 = dec.decompose(v2, guess=(0.9, 0.3, -2.0))
        assert abs(res2.state.lam - 0.9) < 1e-10
        assert GRID.l2(res2.eps.values - rad(GRID.x)) < 1e-5

    def test_orthogonal_radiation_with_profile(self, dec):
        rad = odd_orthogonal_radiation(dec)
        v = synthetic_field(GRID, 1.1, 0.3, -2.0, ProfileParams(0.03, 5e-4, 4e-3),
                            radiation=rad)
        res = dec.decompose(v, guess=(1.1, 0.3, -2.0))
        s = res.state
        assert abs(s.lam - 1.1) < 1e-8 and abs(s.b - 0.03) < 1e-8
        # the growing profile rings through the resampled field; parameters
        # are exact but the field comparison is interpolation-limited
        central = np.abs(GRID.x) <= GRID.length / 4
        assert GRID.l2((res.eps.values - rad(GRID.x)) * central) < 1e-3

    def test_eps_hat_equals_p_plus_eps(self, dec):
        v = synthetic_field(GRID, 1.0, 0.1, 0.5, ProfileParams(0.04, 1e-3, -2e-3))
        res = dec.decompose(v, guess=(1.0, 0.1, 0.5))
        from cmlab.solitons import profile_p
        p = profile_p(ProfileParams(res.state.b, res.state.eta, res.state.nu), GRID)
        gap = res.eps_hat.values - p.values - res.eps.values
        assert GRID.l2(gap / GRID.jx**2) < 1e-12

    def test_equivariance_group_law(self, dec):
        v1 = synthetic_field(GRID, 1.0, 0.2, 1.0, ProfileParams(0.02, 0, 0))
        v2 = modulate(v1, 1.2, 0.4, 0.7)
        res = dec.decompose(v2, guess=(1.2, 0.6, 1.9))
        s = res.state
        assert abs(s.lam - 1.2) < 1e-8
        assert abs(s.gamma - 0.6) < 1e-8
        assert abs(s.center - (0.7 + 1.2 * 1.0)) < 1e-8

    def test_hundred_trapped_draws(self, dec):
        rng = np.random.default_rng(11)
        worst = 0.0
        for _ in range(100):
            b = rng.uniform(0.005, 0.1)
            eta = rng.uniform(-1, 1) * b**1.01
            nu = rng.uniform(-1, 1) * b**0.99
            lam = rng.uniform(0.7, 1.4)
            gam = rng.uniform(-np.pi, np.pi)
            x0 = rng.uniform(-5, 5)
            v = synthetic_field(GRID, lam, gam, x0, ProfileParams(b, eta, nu))
            res = dec.decompose(v, guess=(lam, gam, x0))
            s = res.state
            errs = [abs(s.lam - lam),
                    abs((s.gamma - gam + np.pi) % (2 * np.pi) - np.pi),
                    abs(s.center - x0), abs(s.b - b), abs(s.eta - eta),
                    abs(s.nu - nu), abs(s.mu)]
            worst = max(worst, max(errs))
            assert np.max(np.abs(res.ortho_residuals)) < 1e-10
            assert res.newton_iters <= 10
        assert worst < 1e-8

    def test_outside_tube_raises(self, dec):
        v = Field(GRID, 5.0 * np.exp(-GRID.x**2) + 0j)
        with pytest.raises((OutsideTubeError, NewtonError)):
            dec.decompose(v, guess=(1.0, 0.0, 0.0))

    def test_initial_guess_quality(self):
        v = synthetic_field(GRID, 0.8, 1.0, -4.0, ProfileParams(0.05, 0, 0))
        lam, gam, x0 = initial_guess(v)
        assert abs(x0 + 4.0) < 0.5
        assert 0.3 < lam < 2.0


class TestAdaptedDerivative:
    def test_on_soliton(self):
        w1 = w1_of(soliton_q(GRID))
        assert GRID.l2(w1.values) / soliton_q(GRID).l2 < 1e-3

    def test_zero(self):
        z = Field(GRID, np.zeros(GRID.n, complex))
        assert w1_of(z).l2 == 0.0

    def test_linearization_matches_p1_hat(self):
        # D_{Q+P}(Q+P) agrees with the first-order profile to quadratic order
        from cmlab.solitons import profile_p, profile_p1_hat, LineOps
        line = LineOps(GRID)
        pp = ProfileParams(5e-3, 1e-4, 2e-3)
        w = soliton_q(GRID).values + profile_p(pp, GRID).values
        w1 = line.dv(w, w)
        target = profile_p1_hat(pp, GRID).values
        win = np.abs(GRID.x) <= GRID.length / 4
        assert GRID.l2((w1 - target) * win) < 50 * (pp.b**2 + abs(pp.eta) + pp.nu**2)


class TestRefinedParams:
    def test_normalization_constant(self):
        # A = (1/2) int chi for the shipped cutoff: chi = 1 on [-1,1] plus
        # smooth shoulders, so A is slightly above 1
        a = cutoff_normalization()
        assert 1.0 < a < 2.0

    def test_window_ratio_approaches_one(self):
        g = Grid(16384, 1600.0)
        b = 1e-4
        w1 = profile_p1(ProfileParams(b, 0, 0, 0), g)
        vals = []
        for lam in (0.2, 0.05, 0.02, 0.01):
            bt, _, _ = refined_params(w1, lam)
            vals.append(bt / b)
        err = np.abs(np.array(vals) - 1.0)
        assert np.all(np.diff(err) < 0) and err[-1] < 0.05

    def test_zero_input(self):
        z = Field(GRID, np.zeros(GRID.n, complex))
        assert refined_params(z, 0.1) == (0.0, 0.0, 0.0)

    def test_eta_nu_channels(self):
        pp = ProfileParams(0.0, 0.02, 0.015, 0.0)
        w1 = profile_p1(pp, GRID)
        bt, et, nt = refined_params(w1, 0.1)
        assert abs(bt) < 1e-12
        assert abs(et / pp.eta - 1) < 0.3
        assert abs(nt / pp.nu - 1) < 0.12

    def test_mu_does_not_leak_into_nu(self):
        w1 = profile_p1(ProfileParams(0, 0, 0, 0.05), GRID)
        _, _, nt = refined_params(w1, 0.1)
        assert abs(nt) < 1e-12

    def test_window_too_large(self):
        w1 = profile_p1(ProfileParams(0.01, 0, 0), GRID)
        with pytest.raises(ValueError):
            refined_params(w1, 1e-3)   # R1 = 177 > L/8
