"""Expert demonstration recording for the behavior-cloning baseline.

Log format: line-delimited JSON with a header record, then one record per
step: {"obs": [...], "act": [steer, throttle], "map_seed": int}.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from guardrl.env.dynamics import EnvParams
from guardrl.env.sim import DrivingEnv
from guardrl.env.track import MapSpec
from guardrl.errors import ConfigError
from guardrl.guardian.base import Guardian

DEMO_FORMAT = "guardrl-demos"
DEMO_VERSION = 1


def record_demonstrations(
    guardian: Guardian,
    maps: list[MapSpec],
    env_params: EnvParams,
    n_steps: int,
    path: str | Path,
) -> int:
    """The guardian's expert drives alone; (observation, action) pairs are
    appended until n_steps records exist. Returns the row count."""
    env = DrivingEnv(env_params)
    written = 0
    with open(path, "w") as fh:
        fh.write(json.dumps({"format": DEMO_FORMAT, "version": DEMO_VERSION, "obs_dim": None}) + "\n")
        mi = 0
        while written < n_steps:
            m = maps[mi % len(maps)]
            mi += 1
            obs = env.reset(m)
            while env.active and written < n_steps:
                a = np.clip(guardian.expert(m, env.state), -1.0, 1.0)
                fh.write(
                    json.dumps(
                        {"obs": [round(float(v), 9) for v in obs], "act": [float(a[0]), float(a[1])], "map_seed": m.seed}
                    )
                    + "\n"
                )
                written += 1
                obs = env.step(a).observation
    return written


def load_demonstrations(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    with open(path) as fh:
        header = json.loads(fh.readline())
        if header.get("format") != DEMO_FORMAT or header.get("version") != DEMO_VERSION:
            raise ConfigError(f"{path}: not a version-{DEMO_VERSION} demonstration log")
        obs, act = [], []
        for line in fh:
            rec = json.loads(line)
            obs.append(rec["obs"])
            act.append(rec["act"])
    if not obs:
        return np.zeros((0, 0)), np.zeros((0, 2))
    return np.array(obs), np.array(act)
