"""Guardian-free evaluation of a policy checkpoint on held-out maps.

The deterministic policy (tanh of the mean head) is rolled out with no
guardian in the loop; env reward and cost are recorded as test metrics.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from guardrl.env.dynamics import EnvParams
from guardrl.env.sim import DrivingEnv
from guardrl.env.track import MapSpec
from guardrl.harness.metrics import EVAL_COLUMNS, fmt
from guardrl.learner.core import LearnerState, act


@dataclass
class EvalResult:
    rows: list[dict] = field(default_factory=list)  # per (map, episode)
    interventions: int = 0  # must stay 0: evaluation never invokes a guardian

    @property
    def success_rate(self) -> float:
        return float(np.mean([r["success"] for r in self.rows])) if self.rows else 0.0

    @property
    def mean_return(self) -> float:
        return float(np.mean([r["return"] for r in self.rows])) if self.rows else 0.0

    @property
    def mean_safety_violation(self) -> float:
        return float(np.mean([r["safety_violation"] for r in self.rows])) if self.rows else 0.0

    def save_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(",".join(EVAL_COLUMNS) + "\n")
            for r in self.rows:
                fh.write(",".join(fmt(r[c]) for c in EVAL_COLUMNS) + "\n")


def evaluate_policy(
    policy_fn,
    maps: list[MapSpec],
    env_params: EnvParams,
    episodes_per_map: int = 2,
) -> EvalResult:
    """policy_fn(obs) -> action; rolled out deterministically, no guardian."""
    env = DrivingEnv(env_params)
    result = EvalResult()
    for m in maps:
        for ep in range(episodes_per_map):
            obs = env.reset(m)
            ret = 0.0
            viol = 0
            while env.active:
                sr = env.step(policy_fn(obs))
                obs = sr.observation
                ret += sr.reward
                viol += sr.env_cost + (1 if sr.out_of_road else 0)
            result.rows.append(
                {
                    "map_seed": m.seed,
                    "episode": ep,
                    "return": ret,
                    "safety_violation": viol,
                    "success": sr.success,
                }
            )
    return result


def evaluate_learner(
    learner: LearnerState,
    maps: list[MapSpec],
    env_params: EnvParams,
    episodes_per_map: int = 2,
) -> EvalResult:
    return evaluate_policy(
        lambda obs: act(learner, obs, deterministic=True),
        maps,
        env_params,
        episodes_per_map,
    )
