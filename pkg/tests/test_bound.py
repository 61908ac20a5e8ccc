"""Risk bound: formula exactness, monotonicity, empirical verification machinery."""

import numpy as np
import pytest

from guardrl.bound import (
    BoundInputs,
    RiskReport,
    empirical_discounted_failure,
    risk_bound,
    uniform_random_policy,
    verify_bound,
    write_risk_csv,
)
from guardrl.env import Difficulty, EnvParams, generate_map
from guardrl.guardian import NeverGuardian, NoiseConfig, ScriptedGuardian
from guardrl.guardian.base import AlwaysGuardian

P = EnvParams()


class TestFormula:
    def test_zero_rates_zero_bound(self):
        assert risk_bound(BoundInputs(0.0, 0.0, 3.0, 0.9)) == 0.0

    def test_small_gamma_limit(self):
        b = risk_bound(BoundInputs(0.02, 0.03, 4.0, 1e-9))
        assert b == pytest.approx(0.05, rel=1e-6)

    def test_hand_arithmetic_case(self):
        assert risk_bound(BoundInputs(0.01, 0.05, 2.0, 0.99)) == pytest.approx(7.98, abs=1e-9)

    def test_gamma_one_rejected(self):
        with pytest.raises(ValueError):
            BoundInputs(0.1, 0.1, 1.0, 1.0)

    def test_invalid_rates_rejected(self):
        with pytest.raises(ValueError):
            BoundInputs(-0.1, 0.0, 1.0, 0.9)
        with pytest.raises(ValueError):
            BoundInputs(0.0, 1.5, 1.0, 0.9)
        with pytest.raises(ValueError):
            BoundInputs(0.0, 0.0, -1.0, 0.9)

    def test_monotone_in_every_argument(self):
        eps = [0.0, 0.05, 0.1, 0.2]
        kap = [0.0, 0.05, 0.1, 0.2]
        kp = [0.0, 1.0, 2.0, 4.0]
        gam = [0.5, 0.9, 0.95, 0.99]
        for e in eps:
            for k in kap:
                for kpv in kp:
                    for g in gam:
                        base = risk_bound(BoundInputs(e, k, kpv, g))
                        for e2 in eps:
                            if e2 > e:
                                assert risk_bound(BoundInputs(e2, k, kpv, g)) >= base
                        for k2 in kap:
                            if k2 > k:
                                assert risk_bound(BoundInputs(e, k2, kpv, g)) >= base
                        for kp2 in kp:
                            if kp2 > kpv:
                                assert risk_bound(BoundInputs(e, k, kp2, g)) >= base
                        for g2 in gam:
                            if g2 > g:
                                assert risk_bound(BoundInputs(e, k, kpv, g2)) >= base

    def test_monotone_noise_sweep_bounds_increase(self):
        bounds = [risk_bound(BoundInputs(e, 0.05, 2.0, 0.99)) for e in (0.0, 0.05, 0.1)]
        assert bounds[0] < bounds[1] < bounds[2]


@pytest.fixture(scope="module")
def maps():
    return [generate_map(s) for s in range(4)]


class TestEmpirical:
    def test_safe_guardian_zero_failures(self, maps):
        g = ScriptedGuardian(P)
        est, half = empirical_discounted_failure(
            uniform_random_policy, g, maps, EnvParams(horizon=150), 0.99, 6, np.random.default_rng(0)
        )
        assert est == 0.0

    def test_unguarded_reckless_positive(self, maps):
        def reckless(env, rng):
            return np.array([1.0, 1.0])

        est, _ = empirical_discounted_failure(reckless, None, maps, EnvParams(horizon=150), 0.99, 3, np.random.default_rng(0))
        assert est > 0.0

    def test_estimate_bounded_by_discount_sum(self, maps):
        def reckless(env, rng):
            return rng.uniform(-1, 1, 2)

        est, _ = empirical_discounted_failure(reckless, None, maps, EnvParams(horizon=150), 0.99, 4, np.random.default_rng(1))
        assert 0.0 <= est <= 1.0 / (1.0 - 0.99)


class TestVerify:
    def test_degenerate_always_intervene(self, maps):
        reports = verify_bound(
            lambda: AlwaysGuardian(ScriptedGuardian(P)),
            [NoiseConfig(0.0, 0.0)],
            maps,
            EnvParams(horizon=120),
            n_episodes=4,
            n_states=24,
            n_actions=32,
            seed=3,
        )
        r = reports[0]
        assert r.estimate.k_prime_hat == 0.0
        expected = (r.estimate.epsilon_hat + r.estimate.kappa_hat) / (1.0 - 0.99)
        assert r.bound == pytest.approx(expected, rel=1e-12)

    def test_reports_ordered_and_csv(self, maps, tmp_path):
        reports = verify_bound(
            lambda: ScriptedGuardian(P),
            [NoiseConfig(0.0, 0.0, seed=1), NoiseConfig(0.2, 0.2, seed=2)],
            maps,
            EnvParams(horizon=100),
            n_episodes=3,
            n_states=16,
            n_actions=16,
            seed=0,
        )
        assert reports[0].noise.epsilon == 0.0
        assert reports[1].noise.epsilon == 0.2
        path = tmp_path / "risk.csv"
        write_risk_csv(path, reports)
        lines = path.read_text().strip().splitlines()
        assert lines[0].startswith("epsilon,")
        assert len(lines) == 3

    def test_pass_flag_matches_definition(self, maps):
        est = type("E", (), {"epsilon_hat": 0.0, "kappa_hat": 0.0, "k_prime_hat": 4.0, "csv_row": lambda s: {}})()
        r = RiskReport(NoiseConfig(0, 0), est, bound=1.0, empirical=0.5, half_width=0.4, episodes=10)
        assert r.passed
        r2 = RiskReport(NoiseConfig(0, 0), est, bound=1.0, empirical=0.8, half_width=0.4, episodes=10)
        assert not r2.passed
