import math
from dataclasses import replace

import numpy as np
import pytest

from saddle_lab import dynamics, games, predict, spectral, verify
from saddle_lab.dynamics import Algo, IterateState
from saddle_lab.games import BilinearGame
from saddle_lab.verify import OutcomeKind

PENNIES = BilinearGame.zero_sum_game([[1.0]])


def wgan_setup(eta=0.3):
    game = BilinearGame.zero_sum_game(-np.eye(2), b=[3.0, 4.0])
    init = IterateState.at([0.0, 0.0], [0.0, 0.0])
    traj = dynamics.run(game, Algo.OGDA, eta, init, max_steps=20000)
    report = spectral.rate_report(game, eta)
    pred = predict.predict_limit(game, Algo.OGDA, eta, init)
    return game, init, traj, report, pred


class TestEstimateRate:
    def test_wgan_rate(self):
        _, _, traj, _, pred = wgan_setup()
        fit = verify.estimate_rate(traj, pred)
        assert fit.fitted_ratio == pytest.approx(3 / math.sqrt(10), rel=0.02)
        assert 0.0 <= fit.r_squared <= 1.0

    def test_witness_rate_within_half_percent(self):
        w = predict.tight_witness(PENNIES, 0.3)
        traj = dynamics.run(PENNIES, Algo.OGDA, 0.3, w, max_steps=500)
        pred = predict.predict_limit(PENNIES, Algo.OGDA, 0.3, w)
        fit = verify.estimate_rate(traj, pred)
        assert fit.fitted_ratio == pytest.approx(math.sqrt(0.9), rel=5e-3)

    def test_constant_trajectory_insufficient(self):
        traj = dynamics.run(PENNIES, Algo.OGDA, 0.3,
                            IterateState.at([0.0], [0.0]), max_steps=100)
        pred = predict.predict_limit(PENNIES, Algo.OGDA, 0.3,
                                     IterateState.at([0.0], [0.0]))
        with pytest.raises(verify.InsufficientDataError):
            verify.estimate_rate(traj, pred)

    def test_diverged_rejected(self):
        traj = dynamics.run(PENNIES, Algo.GDA, 0.3,
                            IterateState.at([1.0], [1.0]), max_steps=3000)
        pred = predict.predict_limit(PENNIES, Algo.OGDA, 0.3,
                                     IterateState.at([1.0], [1.0]))
        with pytest.raises(verify.NotConvergedError):
            verify.estimate_rate(traj, pred)


class TestClassify:
    def test_common_payoff_cooperation(self):
        g = BilinearGame.from_matrices([[1.0]], [[1.0]])
        eta = 0.1
        traj = dynamics.run(g, Algo.OGDA, eta,
                            IterateState([1.0], [1.0], [0.0], [0.0]),
                            max_steps=100000)
        out = verify.classify(traj, g)
        assert out.kind is OutcomeKind.COOPERATING
        assert out.growth_ratio >= (1 + eta) ** 2 - 0.01

    def test_zero_sum_convergence(self):
        traj = dynamics.run(PENNIES, Algo.OGDA, 0.3,
                            IterateState.at([1.0], [1.0]), max_steps=2000)
        out = verify.classify(traj, PENNIES)
        assert out.kind is OutcomeKind.CONVERGED
        assert np.allclose(out.limit[0], 0.0, atol=1e-9)

    def test_zero_sum_blowup_is_divergence_not_cooperation(self):
        w = predict.divergence_witness(PENNIES, 0.6)
        traj = dynamics.run(PENNIES, Algo.OGDA, 0.6, w, max_steps=10000)
        out = verify.classify(traj, PENNIES)
        assert out.kind is OutcomeKind.DIVERGED


class TestCheckBound:
    def test_wgan_envelope_holds(self):
        game, init, traj, report, pred = wgan_setup()
        bound = verify.check_bound(traj, report,
                                   predict.distance_to_nash(game, init), pred)
        assert bound.ok and not bound.fitted_constant
        assert bound.worst_ratio <= 1.0 + 1e-9

    def test_tight_witness_envelope_is_snug(self):
        w = predict.tight_witness(PENNIES, 0.3)
        traj = dynamics.run(PENNIES, Algo.OGDA, 0.3, w, max_steps=500)
        report = spectral.rate_report(PENNIES, 0.3)
        pred = predict.predict_limit(PENNIES, Algo.OGDA, 0.3, w)
        bound = verify.check_bound(traj, report,
                                   predict.distance_to_nash(PENNIES, w), pred)
        assert bound.ok
        # tight initialization: envelope within a constant factor of the data
        assert bound.worst_ratio > 1.0 / (report.C * 3.0)

    def test_tiny_constant_fails(self):
        game, init, traj, report, pred = wgan_setup()
        broken = replace(report, C=1e-8)
        bound = verify.check_bound(traj, broken,
                                   predict.distance_to_nash(game, init), pred)
        assert not bound.ok
        assert bound.max_violation > 0

    def test_part3b_fitted_envelope(self):
        w = predict.tight_witness(PENNIES, 0.5)
        traj = dynamics.run(PENNIES, Algo.OGDA, 0.5, w, max_steps=2000)
        report = spectral.rate_report(PENNIES, 0.5)
        pred = predict.predict_limit(PENNIES, Algo.OGDA, 0.5, w)
        bound = verify.check_bound(traj, report,
                                   predict.distance_to_nash(PENNIES, w), pred)
        assert bound.fitted_constant
        assert bound.lambda_used == pytest.approx(report.lambda_max + 0.01)
        assert bound.ok


class TestDogdaBound:
    def test_envelope_holds_for_doubled_runs(self):
        rng = np.random.default_rng(77)
        checked = 0
        while checked < 15:
            n, p = int(rng.integers(1, 4)), int(rng.integers(1, 4))
            g = games.BilinearGame.from_matrices(
                verify.random_matrix(rng, n, p),
                verify.random_matrix(rng, n, p))
            mu_max = max(np.linalg.norm(g.A, 2) ** 2,
                         np.linalg.norm(g.B, 2) ** 2)
            eta = float(rng.uniform(0.4, 0.9)) * 0.5 / math.sqrt(mu_max)
            rep = spectral.rate_report(g, eta, Algo.DOGDA)
            if not rep.applicable or rep.lambda_max > 0.99:
                continue
            init = verify._random_iterate(rng, n, p)
            pred = predict.predict_limit(g, Algo.DOGDA, eta, init)
            if not pred.valid:
                continue
            traj = dynamics.run(g, Algo.DOGDA, eta, init, max_steps=20000)
            bound = verify.check_bound(
                traj, rep, predict.distance_to_nash(g, init), pred)
            assert bound.ok
            checked += 1


class TestOracleReconcile:
    def test_unit_coupling(self):
        rep = verify.oracle_reconcile(PENNIES, 0.3)
        assert rep.counts_match and rep.max_distance < 1e-8

    def test_zero_matrix(self):
        g = BilinearGame.zero_sum_game(np.zeros((1, 1)))
        rep = verify.oracle_reconcile(g, 0.3)
        assert rep.counts_match and rep.max_distance < 1e-12

    def test_rectangular_sweep(self):
        g = BilinearGame.zero_sum_game(
            np.random.default_rng(12).normal(size=(3, 2)))
        for eta in (0.02, 0.05, 0.1, 0.15, 0.2):
            rep = verify.oracle_reconcile(g, eta)
            assert rep.counts_match and rep.max_distance < 1e-7


class TestSuites:
    def test_all_suites_pass(self):
        results = verify.run_all_suites()
        failed = [r.name for r in results if not r.passed]
        assert failed == []

    def test_deterministic(self):
        a = [r.measured for r in verify.run_all_suites(seed=7)]
        b = [r.measured for r in verify.run_all_suites(seed=7)]
        assert a == b

    def test_mutation_is_detected(self, monkeypatch):
        # corrupt the closed-form ratio; the spectrum-based checks must notice
        real = spectral.rate_lambda_star
        monkeypatch.setattr(spectral, "rate_lambda_star",
                            lambda eta, mu: real(eta, mu) * 1.01)
        result = verify.suite_rate_realized_by_spectrum(
            np.random.default_rng(123))
        assert not result.passed
