"""Solver steps and the run driver: hand values, bounds, monotonicity."""

import numpy as np
import pytest

from psdlab import (
    SolverKind,
    Spectrum,
    SymmetricPencil,
    bounds,
    diagonalize,
    generate_problem,
    invit1_step,
    invit2_step,
    pinvit1_step,
    psd_step,
    rayleigh,
    run,
    sigma,
    synthetic_gamma_preconditioner,
    exact_inverse_preconditioner,
)


def diag_pencil(lambdas):
    lam = np.asarray(lambdas, dtype=float)
    return SymmetricPencil(np.diag(lam), np.eye(lam.size))


def random_instance(rng, n, gamma, seed):
    lam = np.sort(np.exp(rng.uniform(0.0, np.log(1e3), size=n)))
    lam += lam * np.arange(n) * 1e-8  # keep gaps strict
    pencil = diag_pencil(lam)
    form = diagonalize(pencil)
    t = synthetic_gamma_preconditioner(form, gamma, seed=seed)
    x0 = rng.standard_normal(n)
    return pencil, t, x0


class TestPinvit1Step:
    def test_hand_example_exact_inverse(self):
        pencil = diag_pencil([1.0, 2.0])
        t = exact_inverse_preconditioner(pencil)
        res = pinvit1_step(pencil, t, np.array([1.0, 1.0]))
        # x' proportional to (1.5, 0.75)
        direction = np.array([1.5, 0.75])
        np.testing.assert_allclose(
            res.x, direction / np.linalg.norm(direction), rtol=1e-14
        )
        assert res.rho.rho == pytest.approx(1.2, rel=1e-14)

    def test_eigenvector_is_fixed_point(self):
        pencil = diag_pencil([1.0, 2.0, 4.0])
        e1 = np.array([1.0, 0.0, 0.0])
        res = pinvit1_step(pencil, np.eye(3), e1)
        assert res.converged
        np.testing.assert_array_equal(res.x, e1)

    def test_fixed_step_bound_single_steps(self):
        rng = np.random.default_rng(21)
        for trial in range(50):
            gamma = float(rng.choice([0.0, 0.3, 0.6, 0.9]))
            pencil, t, x = random_instance(rng, 8, gamma, seed=trial)
            spectrum = diagonalize(pencil).spectrum()
            form = diagonalize(pencil)
            z = form.to_diagonal(x)
            res = pinvit1_step(form.diagonal_pencil(), t, z)
            check = bounds.certify_step(
                spectrum, gamma, rayleigh(pencil, x), res.rho, kind="pinvit1"
            )
            assert check.verdict != bounds.VIOLATED


class TestPsdStep:
    def test_invariant_subspace_one_step(self):
        pencil = diag_pencil([1.0, 2.0, 4.0])
        res = psd_step(pencil, np.eye(3), np.array([1.0, 1.0, 0.0]))
        assert res.rho.rho == pytest.approx(1.0, abs=1e-14)

    def test_scaled_preconditioner_same_step(self):
        pencil = diag_pencil([1.0, 2.0, 4.0, 9.0])
        rng = np.random.default_rng(2)
        x = rng.standard_normal(4)
        t = np.eye(4) * 0.7
        base = psd_step(pencil, t, x)
        scaled = psd_step(pencil, 10.0 * t, x)
        np.testing.assert_allclose(scaled.x, base.x, atol=1e-13)
        assert scaled.rho.rho == pytest.approx(base.rho.rho, rel=1e-13)

    def test_dominates_fixed_step(self):
        rng = np.random.default_rng(3)
        for trial in range(100):
            gamma = float(rng.uniform(0.0, 0.95))
            pencil, t, x = random_instance(rng, 7, gamma, seed=1000 + trial)
            form = diagonalize(pencil)
            z = form.to_diagonal(x)
            mu_pencil = form.diagonal_pencil()
            rho_psd = psd_step(mu_pencil, t, z).rho.rho
            rho_fixed = pinvit1_step(mu_pencil, t, z).rho.rho
            assert rho_psd <= rho_fixed + 1e-12 * abs(rho_fixed)

    def test_ritz_optimality_against_line_samples(self):
        # no sampled step length beats the implicit optimum
        rng = np.random.default_rng(4)
        pencil, t, x = random_instance(rng, 6, 0.5, seed=11)
        form = diagonalize(pencil)
        z = form.to_diagonal(x)
        mu_pencil = form.diagonal_pencil()
        value = rayleigh(mu_pencil, z)
        r_mu = mu_pencil.b @ z - value.mu * z
        d = t.matrix @ r_mu
        best = psd_step(mu_pencil, t, z).rho.rho
        thetas = np.concatenate([-np.logspace(-3, 3, 25), np.logspace(-3, 3, 25)])
        for theta in thetas:
            candidate = value.mu * z + theta * d
            assert best <= rayleigh(mu_pencil, candidate).rho + 1e-12

    def test_theta_opt_reproduces_iterate(self):
        pencil = diag_pencil([1.0, 3.0, 5.0, 11.0])
        rng = np.random.default_rng(5)
        x = rng.standard_normal(4)
        t = 0.9 * np.eye(4)
        res = psd_step(pencil, t, x)
        assert np.isfinite(res.theta_opt)
        value = rayleigh(pencil, x)
        r = pencil.a @ x - value.rho * (pencil.b @ x)
        manual = x - res.theta_opt * (t @ r)
        assert rayleigh(pencil, manual).rho == pytest.approx(res.rho.rho, rel=1e-12)

    def test_stationary_direction_returns_converged(self):
        pencil = diag_pencil([1.0, 2.0, 4.0])
        x = np.array([1.0, 1.0, 0.0])
        value = rayleigh(pencil, x)
        r = pencil.a @ x - value.rho * (pencil.b @ x)
        # rank-one preconditioner-like map sending r onto x (degenerate span)
        t = np.outer(x, r) / (r @ r)
        res = psd_step(pencil, t, x)
        assert res.converged
        np.testing.assert_allclose(res.x, x / np.linalg.norm(x), atol=1e-15)


class TestInvitSteps:
    def test_invit1_matches_pinvit1_with_exact_inverse(self):
        pencil = diag_pencil([1.0, 2.0])
        res = invit1_step(pencil, np.array([1.0, 1.0]))
        t = exact_inverse_preconditioner(pencil)
        ref = pinvit1_step(pencil, t, np.array([1.0, 1.0]))
        np.testing.assert_allclose(res.x, ref.x, rtol=1e-14)
        assert res.rho.rho == pytest.approx(1.2, rel=1e-14)

    def test_invit1_fixed_point(self):
        pencil = diag_pencil([1.0, 2.0, 4.0])
        res = invit1_step(pencil, np.array([1.0, 0.0, 0.0]))
        assert res.converged

    def test_invit1_asymptotic_factor(self):
        # delta-ratio per step bounded by (lambda_1 / lambda_2)^2 near
        # lambda_1, attained when the error concentrates on e_2
        lam = np.array([1.0, 2.0, 4.0])
        pencil = diag_pencil(lam)
        spectrum = Spectrum(lambdas=lam)
        for x, attained in ((np.array([1.0, 1e-4, 1e-4]), False),
                            (np.array([1.0, 1e-4, 0.0]), True)):
            rho = rayleigh(pencil, x).rho
            res = invit1_step(pencil, x)
            ratio = (bounds.delta(spectrum, 0, res.rho.rho)
                     / bounds.delta(spectrum, 0, rho))
            assert ratio <= 0.25 * (1.0 + 1e-6)
            if attained:
                assert ratio == pytest.approx(0.25, rel=1e-6)

    def test_invit2_equals_psd_with_exact_inverse(self):
        rng = np.random.default_rng(6)
        pencil = SymmetricPencil(
            np.diag([1.0, 2.0, 4.0, 8.0]), np.eye(4)
        )
        x = rng.standard_normal(4)
        t = exact_inverse_preconditioner(pencil)
        res = invit2_step(pencil, x)
        ref = psd_step(pencil, t, x)
        np.testing.assert_allclose(res.x, ref.x, atol=1e-13)
        assert res.rho.rho == pytest.approx(ref.rho.rho, rel=1e-13)


class TestRun:
    def test_psd_exact_preconditioner_converges(self):
        rng = np.random.default_rng(7)
        lam = np.sort(rng.uniform(0.5, 30.0, size=10))
        pencil = diag_pencil(lam)
        form = diagonalize(pencil)
        t = synthetic_gamma_preconditioner(form, 0.0, seed=1)
        result = run(pencil, t, rng.standard_normal(10), SolverKind.PSD,
                     max_steps=200)
        assert result.status == "converged"
        assert result.final.rho.rho == pytest.approx(lam[0], abs=1e-10 * lam[0])
        assert not result.violations()

    def test_eigenvector_start_terminates_immediately(self):
        pencil = diag_pencil([1.0, 2.0, 4.0])
        x0 = np.array([0.0, 1.0, 0.0])
        t = synthetic_gamma_preconditioner(diagonalize(pencil), 0.0, seed=0)
        result = run(pencil, t, x0, SolverKind.PSD)
        assert result.status == "converged"
        assert result.final.rho.rho == pytest.approx(2.0, abs=1e-12)
        assert result.final.step_index <= 1

    def test_rho_monotone_along_records(self):
        rng = np.random.default_rng(8)
        for kind in SolverKind:
            pencil, t, x0 = random_instance(rng, 9, 0.6, seed=77)
            result = run(pencil, t, x0, kind, max_steps=60)
            rhos = [rec.rho.rho for rec in result.records]
            for a, b in zip(rhos, rhos[1:]):
                assert b <= a * (1.0 + 1e-12)

    def test_fixed_step_slower_than_psd_at_high_gamma(self):
        rng = np.random.default_rng(9)
        pencil, t, x0 = random_instance(rng, 12, 0.9, seed=5)
        kwargs = dict(max_steps=500, delta_tol=1e-8, residual_tol=0.0)
        steps_psd = run(pencil, t, x0, SolverKind.PSD, **kwargs).final.step_index
        steps_fixed = run(pencil, t, x0, SolverKind.PINVIT1, **kwargs).final.step_index
        assert steps_fixed > steps_psd

    def test_eigenvector_stationary_for_further_steps(self):
        pencil = diag_pencil([1.0, 2.0, 4.0])
        x = np.array([0.0, 0.0, 1.0])
        for _ in range(5):
            res = psd_step(pencil, np.eye(3), x)
            assert res.converged
            x = res.x
        assert rayleigh(pencil, x).rho == pytest.approx(4.0)

    def test_certification_skipped_for_unscaled_fixed_step(self):
        pencil = generate_problem("laplacian1d", n=12)
        form = diagonalize(pencil)
        t = synthetic_gamma_preconditioner(form, 0.3, seed=2).scaled(4.0)
        rng = np.random.default_rng(11)
        result = run(pencil, t, rng.standard_normal(12), SolverKind.PINVIT1,
                     max_steps=50)
        assert not result.certified
        assert "quality mismatch" in result.certify_note
        assert all(rec.bound is None for rec in result.records)

    def test_psd_certifies_despite_scaling(self):
        pencil = generate_problem("laplacian1d", n=12)
        form = diagonalize(pencil)
        t = synthetic_gamma_preconditioner(form, 0.3, seed=2).scaled(4.0)
        rng = np.random.default_rng(11)
        result = run(pencil, t, rng.standard_normal(12), SolverKind.PSD,
                     max_steps=50)
        assert result.certified
        assert result.certify_gamma == pytest.approx(0.3, abs=1e-12)
        assert not result.violations()

    def test_invit_kinds_need_no_preconditioner(self):
        pencil = diag_pencil([1.0, 2.0, 4.0, 7.0])
        rng = np.random.default_rng(12)
        result = run(pencil, None, rng.standard_normal(4), SolverKind.INVIT2)
        assert result.status == "converged"
        assert result.final.rho.rho == pytest.approx(1.0, abs=1e-10)

    def test_general_pencil_run_maps_back(self):
        rng = np.random.default_rng(13)
        q, _ = np.linalg.qr(rng.standard_normal((6, 6)))
        a = (q * np.linspace(1.0, 5.0, 6)) @ q.T
        a = (a + a.T) / 2.0
        b = np.diag(rng.uniform(0.5, 2.0, size=6))
        pencil = SymmetricPencil(a, b)
        result = run(pencil, None, rng.standard_normal(6), SolverKind.INVIT2)
        assert result.status == "converged"
        lam1 = diagonalize(pencil).spectrum().lambdas[0]
        assert result.final.rho.rho == pytest.approx(lam1, rel=1e-10)
        # reported iterate reproduces the reported Rayleigh quotient
        assert rayleigh(pencil, result.final.x).rho == pytest.approx(
            result.final.rho.rho, rel=1e-12
        )

    def test_max_steps_status(self):
        rng = np.random.default_rng(14)
        pencil, t, x0 = random_instance(rng, 10, 0.9, seed=3)
        result = run(pencil, t, x0, SolverKind.PINVIT1, max_steps=3)
        assert result.status == "max_steps"
        assert result.final.step_index == 3
