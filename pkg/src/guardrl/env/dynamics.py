"""Kinematic bicycle dynamics and hazard geometry, as pure functions.

Steering sign convention: positive steering turns the car RIGHT (heading
decreases); an ego displaced left of the centerline is corrected with
positive steering. Update order per step (sequential assignments):
    heading <- wrap(heading - (v / wheelbase) * tan(steer * steer_max) * dt)
    position <- position + v * (cos(heading), sin(heading)) * dt
    v <- clamp(v + throttle * accel_max * dt, 0, v_max)
so the position step uses the freshly updated heading and the pre-update speed.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from guardrl.env.track import MapSpec, project, project_batch


@dataclass(frozen=True)
class EnvParams:
    dt: float = 0.1
    wheelbase: float = 2.5
    v_max: float = 10.0
    steer_max: float = 0.8  # radians at |steer| = 1
    accel_max: float = 3.0  # m/s^2 at |throttle| = 1
    car_radius: float = 0.8
    lidar_rays: int = 24
    lidar_range: float = 30.0
    horizon: int = 800
    progress_weight: float = 1.0
    speed_weight: float = 0.1
    success_bonus: float = 20.0
    contact_damping: float = 0.5
    checkpoint_ahead: float = 10.0


@dataclass
class EgoState:
    x: float
    y: float
    heading: float  # wrapped to (-pi, pi]
    speed: float
    last_steer: float = 0.0
    last_throttle: float = 0.0

    @property
    def xy(self) -> np.ndarray:
        return np.array([self.x, self.y])

    def copy(self) -> "EgoState":
        return replace(self)


def wrap_angle(a):
    return (a + np.pi) % (2.0 * np.pi) - np.pi


def bicycle_step(state: EgoState, action: np.ndarray, p: EnvParams) -> EgoState:
    steer = float(np.clip(action[0], -1.0, 1.0))
    throttle = float(np.clip(action[1], -1.0, 1.0))
    heading = wrap_angle(state.heading - (state.speed / p.wheelbase) * np.tan(steer * p.steer_max) * p.dt)
    x = state.x + state.speed * np.cos(heading) * p.dt
    y = state.y + state.speed * np.sin(heading) * p.dt
    speed = float(np.clip(state.speed + throttle * p.accel_max * p.dt, 0.0, p.v_max))
    return EgoState(x, y, float(heading), speed, steer, throttle)


def contact_indices(m: MapSpec, xy: np.ndarray, car_radius: float) -> tuple[int, ...]:
    """Obstacle indices currently overlapping the car disc, ascending."""
    if len(m.obs_r) == 0:
        return ()
    d = np.sqrt(((m.obs_xy - xy) ** 2).sum(axis=1))
    hit = np.nonzero(d <= m.obs_r + car_radius)[0]
    return tuple(int(i) for i in hit)


def time_to_collision(
    m: MapSpec, state: EgoState, car_radius: float, horizon_s: float = 10.0, v_floor: float = 1.0
) -> float:
    """Seconds until the car disc would first touch an obstacle along its
    current heading; horizon_s when nothing is hit. Speed is floored at
    v_floor so the measure degrades into a distance gate when crawling
    (otherwise a creeping car could slip arbitrarily close unnoticed)."""
    if len(m.obs_r) == 0:
        return horizon_s
    d = np.array([np.cos(state.heading), np.sin(state.heading)])
    rel = m.obs_xy - state.xy
    along = rel @ d
    perp2 = (rel ** 2).sum(axis=1) - along ** 2
    radius = m.obs_r + car_radius
    reach2 = radius ** 2 - perp2
    mask = (reach2 > 0.0) & (along > 0.0)
    if not mask.any():
        return horizon_s
    dist = along[mask] - np.sqrt(reach2[mask])
    dist = np.clip(dist, 0.0, None)
    return float(min(horizon_s, dist.min() / max(state.speed, v_floor)))


def nearest_obstacle_gap(m: MapSpec, xy: np.ndarray, car_radius: float) -> float:
    """Smallest clearance between the car disc rim and any obstacle rim; inf if none."""
    if len(m.obs_r) == 0:
        return float("inf")
    d = np.sqrt(((m.obs_xy - xy) ** 2).sum(axis=1)) - (m.obs_r + car_radius)
    return float(d.min())


def rollout_constant(
    m: MapSpec,
    state: EgoState,
    actions: np.ndarray,
    n_steps: int,
    p: EnvParams,
    hint: int | None = None,
) -> dict:
    """Hold each action fixed for n_steps from `state`; vectorized over actions.

    Returns per-action worst-case flags: whether any step leaves the road or
    touches an obstacle, plus the max |lateral| reached. Projection uses
    vertex resolution over a window around the start, wide enough for the
    reachable envelope.
    """
    acts = np.atleast_2d(np.asarray(actions, dtype=np.float64))
    n = acts.shape[0]
    steer = np.clip(acts[:, 0], -1.0, 1.0)
    throttle = np.clip(acts[:, 1], -1.0, 1.0)
    x = np.full(n, state.x)
    y = np.full(n, state.y)
    heading = np.full(n, state.heading)
    v = np.full(n, state.speed)
    if hint is None:
        _, _, hint, _ = project(m, state.xy)
    reach = (p.v_max * n_steps * p.dt) / 0.5 + 12  # centerline points, plus slack
    lo = max(0, hint - int(reach))
    hi = min(len(m.cl_s), hint + int(reach) + 1)
    half = m.half_width
    off_road = np.zeros(n, dtype=bool)
    contact = np.zeros(n, dtype=bool)
    max_abs_lat = np.zeros(n)
    for _ in range(n_steps):
        heading = wrap_angle(heading - (v / p.wheelbase) * np.tan(steer * p.steer_max) * p.dt)
        x = x + v * np.cos(heading) * p.dt
        y = y + v * np.sin(heading) * p.dt
        v = np.clip(v + throttle * p.accel_max * p.dt, 0.0, p.v_max)
        xy = np.stack([x, y], axis=1)
        _, lat, _, _ = project_batch(m, xy, lo, hi)
        max_abs_lat = np.maximum(max_abs_lat, np.abs(lat))
        off_road |= np.abs(lat) > half
        if len(m.obs_r):
            d2 = ((xy[:, None, :] - m.obs_xy[None, :, :]) ** 2).sum(axis=2)
            contact |= (d2 <= (m.obs_r + p.car_radius) ** 2).any(axis=1)
    return {"off_road": off_road, "contact": contact, "max_abs_lateral": max_abs_lat}


def one_step_unsafe(m: MapSpec, state: EgoState, action: np.ndarray, p: EnvParams) -> bool:
    """Ground-truth hazard indicator: does applying `action` once from `state`
    land in an unsafe state (off road or touching an obstacle)?"""
    nxt = bicycle_step(state, np.asarray(action, dtype=np.float64), p)
    _, lat, _, _ = project(m, nxt.xy)
    if abs(lat) > m.half_width:
        return True
    return len(contact_indices(m, nxt.xy, p.car_radius)) > 0
