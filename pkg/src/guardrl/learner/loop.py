"""The guarded training loop.

Per environment step: sample the agent's action, let the guardian decide,
apply whichever action survives, charge the cosine cost at the takeover's
rising edge only, and buffer the transition. Every env_steps_per_iteration
steps, run one training iteration. Episode metrics (takeover rate, episodic
intervention cost) stream through the on_episode callback.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from guardrl.env.sim import DrivingEnv
from guardrl.env.track import MapSpec
from guardrl.guardian.base import Guardian
from guardrl.learner.buffer import ReplayBuffer, Transition
from guardrl.learner.core import LearnerState, TrainConfig, act
from guardrl.learner.costs import intervention_cost, is_degenerate_pair, rising_edge_cost
from guardrl.learner.update import train_iteration


@dataclass
class EpisodeStats:
    episode: int
    map_seed: int
    steps: int
    takeover_steps: int
    intervention_cost: float  # sum of rising-edge costs
    env_violations: int  # collisions + off-road, observed by the harness only
    success: bool
    out_of_road: bool
    env_step_end: int

    @property
    def takeover_rate(self) -> float:
        return self.takeover_steps / max(self.steps, 1)


@dataclass
class TrainingResult:
    buffer: ReplayBuffer
    episodes: list[EpisodeStats] = field(default_factory=list)
    iterations: list[dict] = field(default_factory=list)
    total_env_steps: int = 0
    degenerate_cost_pairs: int = 0

    @property
    def total_violations(self) -> int:
        return sum(e.env_violations for e in self.episodes)


def run_training(
    env: DrivingEnv,
    maps: list[MapSpec],
    guardian: Guardian | None,
    learner: LearnerState,
    cfg: TrainConfig,
    total_steps: int,
    seed: int,
    buffer_capacity: int = 50_000,
    constant_cost: bool = False,
    use_qint: bool = True,
    use_reward: bool = False,
    on_episode=None,
    on_iteration=None,
) -> TrainingResult:
    """Deterministic given (seed, components); the guardian owns its own noise
    stream. use_reward plumbs env reward into the bootstrap target and is only
    ever set by the unguarded baseline; guarded modes never read the reward."""
    rng_action = np.random.default_rng([seed, 0xA5])
    rng_learn = np.random.default_rng([seed, 0x5A])
    buffer = ReplayBuffer(buffer_capacity, learner.obs_dim, learner.act_dim, store_reward=use_reward)
    result = TrainingResult(buffer=buffer)

    episode_idx = 0
    env_step = 0
    while env_step < total_steps:
        m = maps[episode_idx % len(maps)]
        obs = env.reset(m)
        if guardian is not None:
            guardian.reset_episode()
        prev_rejected = False
        ep_takeover = 0
        ep_cost = 0.0
        ep_viol = 0
        ep_steps = 0
        while env.active and env_step < total_steps:
            a_n = act(learner, obs, rng_action)
            if guardian is not None:
                decision = guardian.decide(m, env.state, a_n)
            else:
                decision = None
            intervened = bool(decision.intervene) if decision is not None else False
            rejected = bool(decision.action_rejected) if decision is not None else False
            a_h = decision.expert_action if intervened else None
            applied = a_h if intervened else a_n

            if rejected:
                raw = 1.0 if constant_cost else intervention_cost(a_n, a_h)
                if not constant_cost and is_degenerate_pair(a_n, a_h):
                    result.degenerate_cost_pairs += 1
            else:
                raw = 0.0
            rising = rising_edge_cost(rejected, prev_rejected, raw)

            sr = env.step(applied)
            # only failure terminals mask the bootstrap: zeroing the target at
            # SUCCESS makes finishing forfeit the remaining entropy stream and
            # the policy measurably unlearns reaching the goal; success and
            # horizon end the episode but bootstrap like truncation
            terminal = sr.out_of_road
            buffer.push(
                Transition(
                    obs=obs,
                    act_agent=a_n,
                    act_expert=a_h,
                    intervened=intervened,
                    rising_cost=rising,
                    obs_next=sr.observation,
                    terminal=terminal,
                    rejected=rejected,
                ),
                reward=sr.reward if use_reward else None,
            )

            prev_rejected = rejected
            obs = sr.observation
            env_step += 1
            ep_steps += 1
            ep_takeover += intervened
            ep_cost += rising
            ep_viol += sr.env_cost + (1 if sr.out_of_road else 0)

            if env_step % cfg.env_steps_per_iteration == 0:
                diag = train_iteration(learner, buffer, cfg, rng_learn, use_qint=use_qint, use_reward=use_reward)
                diag["env_step"] = env_step
                result.iterations.append(diag)
                if on_iteration is not None:
                    on_iteration(diag, learner)

        stats = EpisodeStats(
            episode=episode_idx,
            map_seed=m.seed,
            steps=ep_steps,
            takeover_steps=ep_takeover,
            intervention_cost=ep_cost,
            env_violations=ep_viol,
            success=sr.success,
            out_of_road=sr.out_of_road,
            env_step_end=env_step,
        )
        result.episodes.append(stats)
        if on_episode is not None:
            on_episode(stats)
        episode_idx += 1

    result.total_env_steps = env_step
    return result
