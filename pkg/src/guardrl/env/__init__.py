"""Procedurally generated 2D driving environment."""

from guardrl.env.dynamics import (
    EgoState,
    EnvParams,
    bicycle_step,
    contact_indices,
    one_step_unsafe,
    rollout_constant,
    time_to_collision,
    wrap_angle,
)
from guardrl.env.lidar import lidar_scan
from guardrl.env.sim import DrivingEnv, StepResult, build_observation, observation_dim
from guardrl.env.track import (
    Difficulty,
    MapSpec,
    generate_map,
    load_map,
    point_at,
    project,
    save_map,
)

__all__ = [
    "Difficulty",
    "DrivingEnv",
    "EgoState",
    "EnvParams",
    "MapSpec",
    "StepResult",
    "bicycle_step",
    "build_observation",
    "contact_indices",
    "generate_map",
    "lidar_scan",
    "load_map",
    "observation_dim",
    "one_step_unsafe",
    "point_at",
    "project",
    "rollout_constant",
    "save_map",
    "time_to_collision",
    "wrap_angle",
]
