"""Proxy-value heatmap export: place the car across a map grid, query the
policy's mean action and the min-twin value, and emit a CSV."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from guardrl.env.dynamics import EgoState, EnvParams
from guardrl.env.sim import build_observation
from guardrl.env.track import MapSpec, project
from guardrl.harness.metrics import fmt
from guardrl.learner.core import LearnerState, act, q_pair

HEATMAP_COLUMNS = ("x", "y", "q_value", "policy_steer", "policy_throttle")


def export_q_heatmap(
    learner: LearnerState,
    m: MapSpec,
    env_params: EnvParams,
    path: str | Path,
    grid_rows: int = 40,
    grid_cols: int = 40,
    speed: float = 5.0,
) -> int:
    """One row per grid cell over the map's bounding box (rows * cols total).

    Each cell poses the car lane-aligned at the given cruise speed, computes
    the observation, queries the deterministic policy, and records the
    twin-average value of that (state, action). Returns the row count.
    """
    pad = 2.0
    xs = np.linspace(m.cl_xy[:, 0].min() - pad, m.cl_xy[:, 0].max() + pad, grid_cols)
    ys = np.linspace(m.cl_xy[:, 1].min() - pad, m.cl_xy[:, 1].max() + pad, grid_rows)
    count = 0
    with open(path, "w", newline="") as fh:
        fh.write(",".join(HEATMAP_COLUMNS) + "\n")
        for y in ys:
            for x in xs:
                _, _, _, tangent = project(m, np.array([x, y]))
                state = EgoState(float(x), float(y), tangent, speed)
                obs = build_observation(m, state, env_params)
                action = act(learner, obs, deterministic=True)
                q = float(q_pair(learner, obs[None, :], action[None, :])[0])
                fh.write(
                    ",".join(fmt(v) for v in (float(x), float(y), q, float(action[0]), float(action[1]))) + "\n"
                )
                count += 1
    return count
