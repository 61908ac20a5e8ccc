"""Replay buffer with intervention bookkeeping.

Transitions are reward-free by construction: there is no reward (or
environment cost) field anywhere in this module. The reward-shaped baseline
uses a buffer constructed with store_reward=True, which keeps a parallel
reward array outside the Transition type; guarded training never enables it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Transition:
    obs: np.ndarray
    act_agent: np.ndarray
    act_expert: np.ndarray | None  # present iff intervened
    intervened: bool  # guardian override applied this step
    rising_cost: float
    obs_next: np.ndarray
    terminal: bool
    rejected: bool | None = None  # the proposal itself was judged bad; defaults to intervened

    def __post_init__(self) -> None:
        if self.rejected is None:
            self.rejected = self.intervened
        if self.intervened != (self.act_expert is not None):
            raise ValueError("act_expert must be present iff intervened")
        if self.rejected and not self.intervened:
            raise ValueError("rejected requires intervened")
        if not 0.0 <= self.rising_cost <= 2.0:
            raise ValueError(f"rising_cost {self.rising_cost} outside [0, 2]")
        if self.rising_cost > 0.0 and not self.rejected:
            raise ValueError("rising_cost > 0 requires a rejected proposal")


class ReplayBuffer:
    """Bounded FIFO over flat arrays; eviction is strictly oldest-first."""

    def __init__(self, capacity: int, obs_dim: int, act_dim: int = 2, store_reward: bool = False):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.obs = np.zeros((capacity, obs_dim))
        self.act_agent = np.zeros((capacity, act_dim))
        self.act_expert = np.zeros((capacity, act_dim))
        self.intervened = np.zeros(capacity, dtype=bool)
        self.rejected = np.zeros(capacity, dtype=bool)
        self.rising_cost = np.zeros(capacity)
        self.obs_next = np.zeros((capacity, obs_dim))
        self.terminal = np.zeros(capacity, dtype=bool)
        self.reward = np.zeros(capacity) if store_reward else None
        self._next = 0
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def push(self, t: Transition, reward: float | None = None) -> None:
        if (reward is not None) != (self.reward is not None):
            raise ValueError("reward must be supplied exactly when the buffer stores rewards")
        i = self._next
        self.obs[i] = t.obs
        self.act_agent[i] = t.act_agent
        self.act_expert[i] = t.act_expert if t.intervened else 0.0
        self.intervened[i] = t.intervened
        self.rejected[i] = t.rejected
        self.rising_cost[i] = t.rising_cost
        self.obs_next[i] = t.obs_next
        self.terminal[i] = t.terminal
        if self.reward is not None:
            self.reward[i] = reward
        self._next = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample(self, rng: np.random.Generator, batch_size: int) -> dict:
        idx = rng.integers(0, self._size, size=batch_size)
        return self.gather(idx)

    def gather(self, idx: np.ndarray) -> dict:
        executed = np.where(self.intervened[idx, None], self.act_expert[idx], self.act_agent[idx])
        batch = {
            "obs": self.obs[idx],
            "act_agent": self.act_agent[idx],
            "act_expert": self.act_expert[idx],
            "act_exec": executed,
            "intervened": self.intervened[idx],
            "rejected": self.rejected[idx],
            "rising_cost": self.rising_cost[idx],
            "obs_next": self.obs_next[idx],
            "terminal": self.terminal[idx],
        }
        if self.reward is not None:
            batch["reward"] = self.reward[idx]
        return batch

    def intervened_indices(self) -> np.ndarray:
        return np.nonzero(self.intervened[: self._size])[0]

    def tobytes(self) -> bytes:
        """Canonical byte image of the live contents (replay equivalence checks)."""
        n = self._size
        order = (np.arange(n) + (self._next - n)) % self.capacity if n == self.capacity else np.arange(n)
        parts = [
            self.obs[order].tobytes(),
            self.act_agent[order].tobytes(),
            self.act_expert[order].tobytes(),
            self.intervened[order].tobytes(),
            self.rejected[order].tobytes(),
            self.rising_cost[order].tobytes(),
            self.obs_next[order].tobytes(),
            self.terminal[order].tobytes(),
        ]
        return b"".join(parts)
