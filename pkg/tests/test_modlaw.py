"""Formal modulation ODE system, closed forms, and the instability scan."""

import numpy as np
import pytest

from cmlab.modlaw import (ModLawState, closed_form, instability_scan,
                          integrate, match_closed_form, rhs)


class TestRhs:
    def test_static_point(self):
        s = ModLawState(1.0, 0.5, -2.0, 0.0, 0.0, 0.0)
        assert all(v == 0 for v in rhs(s))

    def test_pure_b_values(self):
        s = ModLawState(1.0, 0.0, 0.0, 0.1, 0.0, 0.0)
        out = rhs(s)
        assert np.isclose(out[0], -0.1)
        assert np.isclose(out[3], -0.015)

    def test_conserved_gradients(self):
        # finite-difference d/ds of the three conserved ratios along the flow
        s = ModLawState(0.8, 0.1, 0.3, 0.05, 0.01, -0.02)
        h = 1e-7
        f = np.array(rhs(s))
        forward = ModLawState(*(np.array([s.lam, s.gamma, s.center, s.b,
                                          s.eta, s.nu]) + h * f))
        for a, b in zip(forward.conserved(), s.conserved()):
            assert abs(a - b) < 1e-10

    def test_mu_component(self):
        s = ModLawState(1.0, 0, 0, 0.1, 0, 0, mu=0.3)
        assert np.isclose(rhs(s, track_mu=True)[6], -0.03)

    def test_rejects_bad_state(self):
        with pytest.raises(ValueError):
            ModLawState(-1.0, 0, 0, 0, 0, 0)
        with pytest.raises(ValueError):
            ModLawState(1.0, np.nan, 0, 0, 0, 0)


class TestIntegration:
    def test_matches_closed_form_bounce(self):
        s0 = ModLawState(1.0, 0.3, 2.0, 0.25, 0.3, 0.1)
        ell, eta0, nu0, t_col, gam_star = match_closed_form(s0)
        times, states, reason = integrate(s0, 12.0, record_stride=50)
        lam = np.array([s.lam for s in states])
        gam = np.array([s.gamma for s in states])
        lam_c, gam_c = closed_form(ell, eta0, t_col, gam_star, times)
        assert np.max(np.abs(lam - lam_c)) < 1e-8
        assert np.max(np.abs(gam - gam_c)) < 1e-8
        assert reason == "t_end"

    def test_conserved_ratio_drift(self):
        s0 = ModLawState(1.0, 0.0, 0.0, 0.2, 0.05, -0.03)
        _, states, _ = integrate(s0, 8.0, record_stride=100)
        ref = np.array(states[0].conserved())
        drift = max(np.max(np.abs(np.array(s.conserved()) - ref)) for s in states)
        assert drift < 1e-10

    def test_collapse_linear_law(self):
        # with eta0 = 0, b/lambda is exactly linear in lab time
        s0 = ModLawState(1.0, 0.0, 0.0, 0.2, 0.0, 0.0)
        ell = s0.conserved()[0]
        times, states, _ = integrate(s0, 8.0, record_stride=50)
        bl = np.array([s.b / s.lam for s in states])
        slope, _ = np.polyfit(times, bl, 1)
        assert abs(slope + ell / 2) < 1e-6

    def test_bounce_minimum(self):
        s0 = ModLawState(1.0, 0.0, 0.0, 0.25, 0.3, 0.0)
        ell, eta0, _, t_col, _ = match_closed_form(s0)
        times, states, _ = integrate(s0, 2 * t_col, record_stride=20)
        lam_min = min(s.lam for s in states)
        assert abs(lam_min - eta0**2 / ell) < 1e-7

    def test_approach_to_collapse_stops(self):
        s0 = ModLawState(0.05, 0.0, 0.0, 0.05**1.5, 0.0, 0.0)
        _, states, reason = integrate(s0, 1e9, lam_floor=1e-3,
                                      record_stride=1000)
        assert reason in ("lam_floor", "dt_floor")
        assert states[-1].lam <= 1.1e-3 or reason == "dt_floor"

    def test_step_guard(self):
        with pytest.raises(ValueError):
            integrate(ModLawState(1, 0, 0, 0.1, 0, 0), 1.0,
                      steps_per_timescale=5)


class TestClosedForm:
    def test_substitution(self):
        lam, gam = closed_form(1.0, 0.0, 1.0, 0.7, np.array([0.0]))
        assert np.isclose(lam[0], 0.25)
        assert np.isclose(gam[0], 0.7)

    def test_at_collapse_time(self):
        lam, gam = closed_form(2.0, 0.1, 1.0, 0.0, np.array([1.0]))
        assert np.isclose(lam[0], 0.1**2 / 2.0)
        assert np.isclose(gam[0], np.pi / 2)

    def test_total_phase_sweep(self):
        for eta0 in (0.3, -0.2):
            _, g_lo = closed_form(1.0, eta0, 0.0, 0.0, np.array([-1e9]))
            _, g_hi = closed_form(1.0, eta0, 0.0, 0.0, np.array([1e9]))
            assert abs((g_hi[0] - g_lo[0]) - np.sign(eta0) * np.pi) < 1e-6

    def test_time_reversal_symmetry(self):
        tau = np.linspace(0, 3, 7)
        lam_p, _ = closed_form(1.3, 0.0, 5.0, 0.0, 5.0 + tau)
        lam_m, _ = closed_form(1.3, 0.0, 5.0, 0.0, 5.0 - tau)
        assert np.allclose(lam_p, lam_m)

    def test_rejects_nonpositive_ell(self):
        with pytest.raises(ValueError):
            closed_form(0.0, 0.1, 0.0, 0.0, np.array([0.0]))
        with pytest.raises(ValueError):
            closed_form(-1.0, 0.1, 0.0, 0.0, np.array([0.0]))


class TestScan:
    def test_collapse_iff_eta0_zero(self):
        rows = instability_scan(1.0, [0.0, 1e-3, -0.01], [0.0])
        by_eta = {r.eta0: r for r in rows}
        assert by_eta[0.0].classification == "collapse-trend"
        assert by_eta[1e-3].classification == "bounce"
        assert by_eta[-0.01].classification == "bounce"

    def test_minimum_scale_value(self):
        rows = instability_scan(1.0, [1e-3], [0.0])
        assert abs(rows[0].lam_min - 1e-6) < 1e-9

    def test_phase_jump(self):
        rows = instability_scan(2.0, [0.5, -0.5, 0.0], [0.0])
        jumps = {r.eta0: r.phase_jump for r in rows}
        assert abs(jumps[0.5] - np.pi) < 1e-12
        assert abs(jumps[-0.5] + np.pi) < 1e-12
        assert jumps[0.0] == 0.0

    def test_drift_slope_column(self):
        rows = instability_scan(1.0, [0.0], [0.3, -0.7])
        slopes = {r.nu0: r.drift_slope for r in rows}
        assert slopes[0.3] == -0.3 and slopes[-0.7] == 0.7

    def test_drift_slope_matches_integration(self):
        s0 = ModLawState(1.0, 0.0, 0.0, 0.2, 0.1, 0.05)
        nu0 = s0.conserved()[2]
        times, states, _ = integrate(s0, 6.0, record_stride=50)
        xs = np.array([s.center for s in states])
        slope = np.polyfit(times, xs, 1)[0]
        assert abs(slope + nu0) < 1e-8

    def test_rejects_bad_ell(self):
        with pytest.raises(ValueError):
            instability_scan(0.0, [0.0], [0.0])
