"""Convergence factors, interval-relative errors, and step certification."""

import numpy as np
import pytest

from psdlab import (
    IntervalError,
    SolverKind,
    Spectrum,
    bounds,
    certify_step,
    delta,
    factors,
    kappa,
    locate_interval,
    sigma,
)
from psdlab.bounds import HOLDS, PASSED_LAMBDA_I, VIOLATED


@pytest.fixture
def spec124():
    return Spectrum(lambdas=np.array([1.0, 2.0, 4.0]))


class TestDelta:
    def test_midpoint(self):
        s = Spectrum(lambdas=np.array([1.0, 2.0, 8.0]))
        assert delta(s, 0, 1.5) == pytest.approx(1.0)

    def test_left_boundary_is_zero(self, spec124):
        assert delta(spec124, 0, 1.0) == 0.0

    def test_hand_value(self, spec124):
        assert delta(spec124, 0, 1.2) == pytest.approx(0.25, rel=1e-14)

    def test_outside_interval_raises(self, spec124):
        with pytest.raises(IntervalError):
            delta(spec124, 0, 2.0)
        with pytest.raises(IntervalError):
            delta(spec124, 0, 0.5)
        with pytest.raises(IntervalError):
            delta(spec124, 5, 1.5)

    def test_blows_up_at_right_boundary(self, spec124):
        assert delta(spec124, 0, 2.0 - 1e-12) > 1e11


class TestLocateInterval:
    def test_left_closed(self, spec124):
        assert locate_interval(spec124, 1.0) == 0
        assert locate_interval(spec124, 2.0) == 1
        assert locate_interval(spec124, 3.9) == 1

    def test_out_of_range(self, spec124):
        with pytest.raises(IntervalError):
            locate_interval(spec124, 4.0)
        with pytest.raises(IntervalError):
            locate_interval(spec124, 0.99)


class TestKappa:
    def test_hand_value(self, spec124):
        assert kappa(spec124, 0) == pytest.approx(1.0 / 3.0, rel=1e-15)

    def test_mu_form_agrees(self, spec124):
        mus = spec124.mus
        k_mu = (mus[1] - mus[2]) / (mus[0] - mus[2])
        assert kappa(spec124, 0) == pytest.approx(k_mu, rel=1e-14)

    def test_mu_form_agrees_random(self):
        rng = np.random.default_rng(17)
        for _ in range(25):
            lam = np.sort(np.exp(rng.uniform(0.0, 3.0, size=6)))
            lam += np.arange(6) * 1e-6  # enforce strict gaps
            s = Spectrum(lambdas=lam)
            for i in range(4):
                k_mu = (s.mus[i + 1] - s.mus[-1]) / (s.mus[i] - s.mus[-1])
                assert kappa(s, i) == pytest.approx(k_mu, rel=1e-14)

    def test_top_interval_rejected(self, spec124):
        with pytest.raises(ValueError, match="topmost"):
            kappa(spec124, 1)

    def test_vanishing_gap_to_top(self):
        s = Spectrum(lambdas=np.array([1.0, 4.0 - 1e-9, 4.0]))
        assert kappa(s, 0) < 1e-9

    def test_degenerate_gap_rejected(self):
        s = Spectrum(lambdas=np.array([1.0, 1.0, 4.0]))
        with pytest.raises(ValueError, match="strict gaps"):
            kappa(s, 0)


class TestSigma:
    def test_psd_gamma_zero(self, spec124):
        assert sigma(SolverKind.PSD, spec124, 0, 0.0) == pytest.approx(0.2, rel=1e-14)

    def test_psd_gamma_one_boundary(self, spec124):
        assert sigma(SolverKind.PSD, spec124, 0, 1.0) == pytest.approx(1.0, rel=1e-15)

    def test_psd_hand_value(self, spec124):
        assert sigma(SolverKind.PSD, spec124, 0, 0.5) == pytest.approx(7.0 / 11.0, rel=1e-14)

    def test_pinvit1_hand_value(self):
        s = Spectrum(lambdas=np.array([1.0, 2.0]))
        assert sigma(SolverKind.PINVIT1, s, 0, 0.5) == pytest.approx(0.75, rel=1e-15)

    def test_invit_kinds_ignore_gamma(self, spec124):
        assert sigma(SolverKind.INVIT1, spec124, 0, 0.9) == pytest.approx(0.5)
        assert sigma(SolverKind.INVIT2, spec124, 0, 0.9) == pytest.approx(0.2)

    def test_gamma_zero_reductions(self, spec124):
        assert sigma(SolverKind.PSD, spec124, 0, 0.0) == sigma(SolverKind.INVIT2, spec124, 0)
        assert sigma(SolverKind.PINVIT1, spec124, 0, 0.0) == sigma(SolverKind.INVIT1, spec124, 0)


class TestFactorMonotonicityAndHierarchy:
    def test_sigma_psd_increasing_in_kappa(self):
        # finite differences of the closed form on a grid; the derivative
        # 2 (1 - gamma^2) / ((2 - kappa) + gamma kappa)^2 never vanishes
        for gamma in (0.0, 0.3, 0.7, 0.95):
            ks = np.linspace(0.01, 0.99, 50)
            vals = (ks + gamma * (2 - ks)) / ((2 - ks) + gamma * ks)
            diffs = np.diff(vals)
            assert np.all(diffs > 0)
            mid = 0.5 * (ks[:-1] + ks[1:])
            expected = 2 * (1 - gamma**2) / ((2 - mid) + gamma * mid) ** 2
            np.testing.assert_allclose(diffs / np.diff(ks), expected, rtol=1e-3)

    def test_sigma_psd_increasing_in_gamma(self):
        for k in (0.05, 0.3, 0.8):
            gs = np.linspace(0.0, 0.99, 50)
            vals = (k + gs * (2 - k)) / ((2 - k) + gs * k)
            assert np.all(np.diff(vals) > 0)

    def test_hierarchy_on_grids(self):
        rng = np.random.default_rng(23)
        for _ in range(50):
            lam = np.sort(np.exp(rng.uniform(0.0, 4.0, size=8)))
            lam += np.arange(8) * 1e-6
            s = Spectrum(lambdas=lam)
            for i in range(6):
                for gamma in (0.0, 0.2, 0.5, 0.9):
                    f = factors(s, i, gamma)
                    assert f.sigma_invit1 <= f.sigma_pinvit1 + 1e-15
                    assert f.sigma_invit2 <= f.sigma_psd + 1e-15
                    assert f.sigma_invit2 <= f.sigma_invit1 + 1e-15
                    assert f.sigma_psd <= f.sigma_pinvit1 + 1e-15
                    for value in (f.sigma_invit1, f.sigma_pinvit1,
                                  f.sigma_invit2, f.sigma_psd):
                        assert 0.0 < value <= 1.0
                    if gamma == 0.0:
                        assert f.sigma_psd == f.sigma_invit2
                        assert f.sigma_pinvit1 == f.sigma_invit1

    def test_equality_only_at_gamma_zero(self, spec124):
        f0 = factors(spec124, 0, 0.0)
        assert f0.sigma_psd == f0.sigma_invit2
        f = factors(spec124, 0, 0.3)
        assert f.sigma_psd > f.sigma_invit2
        assert f.sigma_pinvit1 > f.sigma_invit1


class TestCertifyStep:
    def test_holds(self, spec124):
        # sigma^2 = 0.04 on the first interval; delta shrinks 1 -> 0.03/0.97
        check = certify_step(spec124, 0.0, 1.5, 1.03, kind="psd")
        assert check.verdict == HOLDS
        assert check.ratio == pytest.approx((0.03 / 0.97) / 1.0, rel=1e-12)
        assert check.slack > 0

    def test_passed_lambda_i(self, spec124):
        check = certify_step(spec124, 0.3, 2.5, 1.9, kind="psd")
        assert check.verdict == PASSED_LAMBDA_I
        assert check.interval_index == 1

    def test_stationary_boundary(self, spec124):
        check = certify_step(spec124, 0.3, 1.0, 1.0, kind="psd")
        assert check.verdict == PASSED_LAMBDA_I
        assert check.ratio is None

    def test_monotonicity_violation_flagged(self, spec124):
        check = certify_step(spec124, 0.3, 1.5, 1.6, kind="psd")
        assert check.verdict == VIOLATED
        assert "monotonicity" in check.note

    def test_violation_detected(self, spec124):
        # a fake step that contracts less than sigma^2 allows
        sig_sq = sigma(SolverKind.PSD, spec124, 0, 0.0) ** 2
        rho_before = 1.5
        d_before = delta(spec124, 0, rho_before)
        target = d_before * sig_sq * 4.0
        rho_after = (target * 2.0 + 1.0) / (1.0 + target)
        check = certify_step(spec124, 0.0, rho_before, rho_after, kind="psd")
        assert check.verdict == VIOLATED
        assert check.ratio > check.sigma_squared

    def test_tolerance_absorbs_roundoff(self, spec124):
        sig_sq = sigma(SolverKind.PSD, spec124, 0, 0.5) ** 2
        d_before = delta(spec124, 0, 1.5)
        target = d_before * sig_sq * (1.0 + 1e-10)  # inside the 1e-9 band
        rho_after = (target * 2.0 + 1.0) / (1.0 + target)
        check = certify_step(spec124, 0.5, 1.5, rho_after, kind="psd")
        assert check.verdict == HOLDS

    def test_top_interval_uses_degenerate_kappa(self, spec124):
        check = certify_step(spec124, 0.5, 3.0, 2.2, kind="psd")
        assert check.interval_index == 1
        assert check.sigma_squared == pytest.approx(0.25, rel=1e-12)

    def test_pinvit1_kind(self, spec124):
        check = certify_step(spec124, 0.5, 1.5, 1.3, kind="pinvit1")
        assert check.sigma_squared == pytest.approx(0.75**2, rel=1e-12)
        assert check.verdict == HOLDS
