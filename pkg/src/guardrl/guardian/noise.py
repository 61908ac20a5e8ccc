"""Noise wrappers degrading a guardian in the two ways the risk bound tracks:
random expert actions (rate epsilon) and missed interventions (rate kappa).

The wrapper only widens failure: a suppressed firing never becomes a new
intervention, and the action noise never alters the predicate itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from guardrl.guardian.base import Guardian


@dataclass(frozen=True)
class NoiseConfig:
    epsilon: float = 0.0  # P(expert emits a uniform action)
    kappa_lapse: float = 0.0  # P(a firing intervention is suppressed)
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.epsilon <= 1.0 and 0.0 <= self.kappa_lapse <= 1.0):
            raise ValueError("noise probabilities must lie in [0, 1]")


class NoisyGuardian(Guardian):
    def __init__(self, base: Guardian, cfg: NoiseConfig):
        super().__init__(base.min_takeover_duration, base.stall)
        self.base = base
        self.cfg = cfg
        self.rng = np.random.default_rng(cfg.seed)

    def fires(self, m, state, agent_action):
        fire = self.base.fires(m, state, agent_action)
        if fire and self.cfg.kappa_lapse > 0.0 and self.rng.uniform() < self.cfg.kappa_lapse:
            return False
        return fire

    def fires_batch(self, m, state, actions):
        flags = self.base.fires_batch(m, state, actions)
        if self.cfg.kappa_lapse > 0.0:
            keep = self.rng.uniform(size=len(flags)) >= self.cfg.kappa_lapse
            flags = flags & keep
        return flags

    def expert(self, m, state):
        if self.cfg.epsilon > 0.0 and self.rng.uniform() < self.cfg.epsilon:
            return self.rng.uniform(-1.0, 1.0, size=2)
        return self.base.expert(m, state)


def apply_noise(guardian: Guardian, cfg: NoiseConfig) -> Guardian:
    """Wrap unless both rates are zero, in which case behavior must be identical."""
    if cfg.epsilon == 0.0 and cfg.kappa_lapse == 0.0:
        return guardian
    return NoisyGuardian(guardian, cfg)
