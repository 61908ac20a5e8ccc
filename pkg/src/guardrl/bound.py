"""Training-risk bound and its empirical verification.

The bound says the discounted probability of failure of the guardian-mixed
behavior policy is at most

    (1 / (1 - gamma)) * (epsilon + kappa + gamma * epsilon^2 / (1 - gamma) * k_prime)

where epsilon is the guardian's action error rate, kappa its intervention miss
rate, and k_prime its tolerance (the largest measure of the un-intervened
action region over states). The verifier estimates all three by Monte Carlo on
sampled on-policy states, evaluates the formula, and compares it against the
measured discounted failure of a random agent under the same guardian. The
sampled estimates can under-approximate the true state maxima, so the computed
bound is itself an approximation; reports carry the sample sizes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from guardrl.env.dynamics import EnvParams
from guardrl.env.sim import DrivingEnv
from guardrl.env.track import MapSpec
from guardrl.guardian.base import Guardian
from guardrl.guardian.noise import NoiseConfig, apply_noise
from guardrl.guardian.tolerance import ToleranceEstimate, estimate_tolerance


@dataclass(frozen=True)
class BoundInputs:
    epsilon: float
    kappa: float
    k_prime: float
    gamma: float

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")
        if not 0.0 <= self.kappa <= 1.0:
            raise ValueError("kappa must lie in [0, 1]")
        if self.k_prime < 0.0:
            raise ValueError("k_prime must be >= 0")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1); the bound diverges at 1")


def risk_bound(b: BoundInputs) -> float:
    """Exact formula value of the training-risk upper bound."""
    horizon = 1.0 / (1.0 - b.gamma)
    return horizon * (b.epsilon + b.kappa + b.gamma * b.epsilon**2 / (1.0 - b.gamma) * b.k_prime)


@dataclass
class RiskReport:
    noise: NoiseConfig
    estimate: ToleranceEstimate
    bound: float
    empirical: float
    half_width: float
    episodes: int

    @property
    def passed(self) -> bool:
        """Upper confidence of the measured failure stays below the bound."""
        return self.empirical + self.half_width <= self.bound

    def csv_row(self) -> dict:
        return {
            "epsilon": self.noise.epsilon,
            "kappa_lapse": self.noise.kappa_lapse,
            "epsilon_hat": self.estimate.epsilon_hat,
            "kappa_hat": self.estimate.kappa_hat,
            "k_prime_hat": self.estimate.k_prime_hat,
            "bound": self.bound,
            "empirical": self.empirical,
            "half_width": self.half_width,
            "episodes": self.episodes,
            "pass": int(self.passed),
        }


def empirical_discounted_failure(
    policy_fn,
    guardian: Guardian | None,
    maps: list[MapSpec],
    env_params: EnvParams,
    gamma: float,
    n_episodes: int,
    rng: np.random.Generator,
) -> tuple[float, float]:
    """Mean over episodes of sum_t gamma^t * 1[unsafe at t] under the mixed
    behavior policy (agent action unless the guardian overrides). Unsafe means
    an obstacle contact this step or leaving the road. Returns
    (estimate, 95 percent normal-approximation half-width)."""
    if n_episodes < 1:
        raise ValueError("n_episodes must be >= 1")
    env = DrivingEnv(env_params)
    totals = np.zeros(n_episodes)
    for ep in range(n_episodes):
        m = maps[ep % len(maps)]
        env.reset(m)
        if guardian is not None:
            guardian.reset_episode()
        discount = 1.0
        total = 0.0
        while env.active:
            a_n = policy_fn(env, rng)
            if guardian is not None:
                decision = guardian.decide(m, env.state, a_n)
                applied = decision.expert_action if decision.intervene else a_n
            else:
                applied = a_n
            sr = env.step(applied)
            unsafe = (sr.env_cost > 0) or sr.out_of_road
            total += discount * float(unsafe)
            discount *= gamma
        totals[ep] = total
    est = float(totals.mean())
    half = float(1.96 * totals.std(ddof=1) / np.sqrt(n_episodes)) if n_episodes > 1 else 0.0
    return est, half


def uniform_random_policy(env: DrivingEnv, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(-1.0, 1.0, size=2)


def verify_bound(
    base_guardian_factory,
    noise_configs: list[NoiseConfig],
    maps: list[MapSpec],
    env_params: EnvParams,
    gamma: float = 0.99,
    n_episodes: int = 200,
    n_states: int = 200,
    n_actions: int = 256,
    seed: int = 0,
) -> list[RiskReport]:
    """For each noise config: wrap a fresh guardian, estimate its tolerances,
    compute the bound, and measure the discounted failure of a random agent.

    base_guardian_factory() must build a fresh un-noised guardian so noise
    streams never leak between configs; results are deterministic in `seed`
    and ordered like noise_configs.
    """
    reports = []
    for i, cfg in enumerate(noise_configs):
        est_guardian = apply_noise(base_guardian_factory(), cfg)
        rng_est = np.random.default_rng([seed, i, 1])
        est = estimate_tolerance(est_guardian, maps, env_params, n_states, n_actions, rng_est)
        bound = risk_bound(BoundInputs(est.epsilon_hat, est.kappa_hat, est.k_prime_hat, gamma))
        run_guardian = apply_noise(base_guardian_factory(), cfg)
        rng_run = np.random.default_rng([seed, i, 2])
        emp, half = empirical_discounted_failure(
            uniform_random_policy, run_guardian, maps, env_params, gamma, n_episodes, rng_run
        )
        reports.append(RiskReport(cfg, est, bound, emp, half, n_episodes))
    return reports


def write_risk_csv(path: str | Path, reports: list[RiskReport]) -> None:
    rows = [r.csv_row() for r in reports]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
