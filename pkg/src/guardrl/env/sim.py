"""Episode-level driving environment.

Reward exists for evaluation and reward-shaped baselines only; the guarded
learner never sees it. Collisions do not terminate: each new obstacle contact
adds +1 to env_cost and halves the speed, while leaving the road ends the
episode as a failure.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from guardrl.env.dynamics import EgoState, EnvParams, bicycle_step, contact_indices, wrap_angle
from guardrl.env.lidar import lidar_scan
from guardrl.env.track import MapSpec, point_at, project

log = logging.getLogger(__name__)

EGO_SCALARS = 6
NAV_SCALARS = 2


def observation_dim(p: EnvParams) -> int:
    return EGO_SCALARS + NAV_SCALARS + p.lidar_rays


@dataclass
class StepResult:
    observation: np.ndarray
    reward: float
    env_cost: int  # new obstacle contacts this step
    success: bool
    out_of_road: bool
    horizon: bool
    info: dict = field(default_factory=dict)

    @property
    def terminal(self) -> bool:
        return self.success or self.out_of_road or self.horizon


def build_observation(m: MapSpec, state: EgoState, p: EnvParams, hint: int | None = None) -> np.ndarray:
    """Fixed-length observation; every component is bounded as documented.

    layout (d = 6 + 2 + lidar_rays):
      [0] speed / v_max                        in [0, 1]
      [1] last steering command                in [-1, 1]
      [2] heading error vs lane tangent / pi   in [-1, 1]
      [3] lateral offset / half width, clipped in [-1, 1]  (positive = left)
      [4] distance to left edge / lane width   in [0, 1]
      [5] distance to right edge / lane width  in [0, 1]
      [6] remaining distance / track length    in [0, 1]
      [7] bearing to checkpoint ahead / pi     in [-1, 1]
      [8:] lidar distances                     in [0, 1]
    """
    s, lat, idx, tangent = project(m, state.xy, hint=hint)
    half = m.half_width
    heading_err = wrap_angle(state.heading - tangent) / np.pi
    chk_xy, _ = point_at(m, s + p.checkpoint_ahead)
    to_chk = chk_xy - state.xy
    bearing = wrap_angle(np.arctan2(to_chk[1], to_chk[0]) - state.heading) / np.pi
    ego = np.array(
        [
            state.speed / p.v_max,
            state.last_steer,
            heading_err,
            np.clip(lat / half, -1.0, 1.0),
            np.clip((half - lat) / m.lane_width, 0.0, 1.0),
            np.clip((half + lat) / m.lane_width, 0.0, 1.0),
        ]
    )
    nav = np.array(
        [
            np.clip((m.destination_s - s) / m.total_length, 0.0, 1.0),
            bearing,
        ]
    )
    rays = lidar_scan(m, state.xy, state.heading, p.lidar_rays, p.lidar_range)
    return np.concatenate([ego, nav, rays])


class DrivingEnv:
    """Single-threaded episode simulator bound to one MapSpec at a time."""

    def __init__(self, params: EnvParams = EnvParams()):
        self.params = params
        self.map: MapSpec | None = None
        self.state: EgoState | None = None
        self.active = False
        self._step_count = 0
        self._progress = 0.0
        self._hint = 0
        self._in_contact: tuple[int, ...] = ()

    def reset(self, map_spec: MapSpec) -> np.ndarray:
        self.map = map_spec
        xy, heading = point_at(map_spec, 1.0)
        self.state = EgoState(float(xy[0]), float(xy[1]), heading, 0.0)
        self.active = True
        self._step_count = 0
        self._progress = 1.0
        self._hint = 0
        self._in_contact = ()
        return build_observation(map_spec, self.state, self.params, hint=self._hint)

    def step(self, action: np.ndarray) -> StepResult:
        if not self.active:
            raise RuntimeError("episode is not active; call reset() first")
        p = self.params
        m = self.map
        action = np.asarray(action, dtype=np.float64)
        if action.shape != (2,):
            raise ValueError(f"action must have shape (2,), got {action.shape}")
        if np.abs(action).max() > 1.0:
            log.warning("action %s outside [-1,1]^2, clamped", action)
            action = np.clip(action, -1.0, 1.0)

        self.state = bicycle_step(self.state, action, p)
        s, lat, idx, _ = project(m, self.state.xy, hint=self._hint)
        self._hint = idx

        contacts = contact_indices(m, self.state.xy, p.car_radius)
        new_contacts = tuple(i for i in contacts if i not in self._in_contact)
        if new_contacts:
            self.state.speed *= p.contact_damping
        self._in_contact = contacts
        env_cost = len(new_contacts)

        out_of_road = abs(lat) > m.half_width
        success = (not out_of_road) and s >= m.destination_s
        self._step_count += 1
        horizon = (not out_of_road) and (not success) and self._step_count >= p.horizon

        d_progress = s - self._progress
        self._progress = s
        reward = p.progress_weight * d_progress + p.speed_weight * self.state.speed / p.v_max
        if success:
            reward += p.success_bonus

        if success or out_of_road or horizon:
            self.active = False

        obs = build_observation(m, self.state, p, hint=self._hint)
        return StepResult(
            observation=obs,
            reward=float(reward),
            env_cost=env_cost,
            success=bool(success),
            out_of_road=bool(out_of_road),
            horizon=bool(horizon),
            info={
                "progress": s,
                "speed": self.state.speed,
                "lateral": lat,
                "step": self._step_count,
                "position": (self.state.x, self.state.y),
            },
        )
