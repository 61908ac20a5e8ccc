"""Monte Carlo estimates of the three guardian quantities in the risk bound:
expert action error rate, intervention miss rate, and tolerance (the largest
measure of the un-intervened action region across sampled states).

States are sampled on-policy from random-agent rollouts protected by the
guardian; maxima/fractions over those samples approximate the bound's
quantifiers over all states, which is the best a sampler can do.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from guardrl.env.dynamics import EgoState, EnvParams, rollout_constant
from guardrl.env.sim import DrivingEnv
from guardrl.env.track import MapSpec
from guardrl.guardian.base import Guardian

ACTION_VOLUME = 4.0  # Lebesgue measure of [-1,1]^2


@dataclass
class ToleranceEstimate:
    epsilon_hat: float
    kappa_hat: float
    k_prime_hat: float
    n_states: int
    n_action_samples: int
    n_unsafe_actions: int

    def csv_row(self) -> dict:
        return {
            "epsilon_hat": self.epsilon_hat,
            "kappa_hat": self.kappa_hat,
            "k_prime_hat": self.k_prime_hat,
            "n_states": self.n_states,
            "n_action_samples": self.n_action_samples,
            "n_unsafe_actions": self.n_unsafe_actions,
        }


def write_tolerance_csv(path: str | Path, estimates: list[ToleranceEstimate]) -> None:
    rows = [e.csv_row() for e in estimates]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)


def collect_states(
    guardian: Guardian,
    maps: list[MapSpec],
    env_params: EnvParams,
    n_states: int,
    rng: np.random.Generator,
    max_episode_steps: int = 200,
) -> list[tuple[MapSpec, EgoState]]:
    """Roll a uniform-random agent under the guardian, recording visited states."""
    env = DrivingEnv(env_params)
    out: list[tuple[MapSpec, EgoState]] = []
    mi = 0
    while len(out) < n_states:
        m = maps[mi % len(maps)]
        mi += 1
        env.reset(m)
        guardian.reset_episode()
        for _ in range(max_episode_steps):
            out.append((m, env.state.copy()))
            if len(out) >= n_states:
                break
            a_n = rng.uniform(-1.0, 1.0, size=2)
            decision = guardian.decide(m, env.state, a_n)
            applied = decision.expert_action if decision.intervene else a_n
            sr = env.step(applied)
            if sr.terminal:
                break
    return out


def estimate_tolerance(
    guardian: Guardian,
    maps: list[MapSpec],
    env_params: EnvParams,
    n_states: int,
    n_actions: int,
    rng: np.random.Generator,
) -> ToleranceEstimate:
    if n_states < 1 or n_actions < 1:
        raise ValueError("n_states and n_actions must be >= 1")
    states = collect_states(guardian, maps, env_params, n_states, rng)

    expert_unsafe = 0
    unsafe_total = 0
    unsafe_missed = 0
    k_prime = 0.0
    for m, state in states:
        a_h = np.clip(guardian.expert(m, state), -1.0, 1.0)
        one = rollout_constant(m, state, a_h[None, :], 1, env_params)
        if bool(one["off_road"][0] or one["contact"][0]):
            expert_unsafe += 1

        actions = rng.uniform(-1.0, 1.0, size=(n_actions, 2))
        one = rollout_constant(m, state, actions, 1, env_params)
        unsafe = one["off_road"] | one["contact"]
        flagged = guardian.fires_batch(m, state, actions)
        unsafe_total += int(unsafe.sum())
        unsafe_missed += int((unsafe & ~flagged).sum())
        k_prime = max(k_prime, float((~flagged).mean()) * ACTION_VOLUME)

    epsilon_hat = expert_unsafe / len(states)
    kappa_hat = (unsafe_missed / unsafe_total) if unsafe_total else 0.0
    return ToleranceEstimate(
        epsilon_hat=epsilon_hat,
        kappa_hat=kappa_hat,
        k_prime_hat=k_prime,
        n_states=len(states),
        n_action_samples=n_actions * len(states),
        n_unsafe_actions=unsafe_total,
    )
