"""Scripted driving expert: pure-pursuit steering with obstacle dodging.

Steering sign convention follows the dynamics module: positive steering turns
right, so an ego displaced left of the centerline receives positive steering
to come back. The controller is pure given (state, map).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from guardrl.env.dynamics import EgoState, EnvParams, wrap_angle
from guardrl.env.track import MapSpec, point_at, project


@dataclass(frozen=True)
class ExpertParams:
    cruise_speed: float = 6.0
    lookahead_gain: float = 0.8  # seconds of travel
    lookahead_min: float = 3.0
    lookahead_max: float = 9.0
    dodge_clearance: float = 1.1  # lateral clearance to keep from obstacle rim
    dodge_window: float = 14.0  # meters ahead considered for dodging
    brake_ttc: float = 1.2  # seconds
    curve_slowdown: float = 9.0  # m/s of slowdown per rad of lookahead bend
    speed_gain: float = 1.2


def expert_action(state: EgoState, m: MapSpec, p: EnvParams, xp: ExpertParams = ExpertParams()) -> np.ndarray:
    """Clamped (steering, throttle) driving toward the centerline lookahead point."""
    s, lat, _, _ = project(m, state.xy)
    lookahead = float(np.clip(xp.lookahead_gain * max(state.speed, 2.0), xp.lookahead_min, xp.lookahead_max))
    target_s = s + lookahead
    target_xy, target_theta = point_at(m, target_s)

    dodge = _dodge_offset(m, s, lat, xp)
    if dodge != 0.0:
        nvec = np.array([-np.sin(target_theta), np.cos(target_theta)])
        target_xy = target_xy + dodge * nvec

    rel = target_xy - state.xy
    dist = float(np.hypot(rel[0], rel[1]))
    alpha = wrap_angle(np.arctan2(rel[1], rel[0]) - state.heading)
    if dist > 1e-6:
        curvature = 2.0 * np.sin(alpha) / dist
    else:
        curvature = 0.0
    steer_angle = np.arctan(curvature * p.wheelbase)
    # positive steering turns right (heading decreases), so negate the
    # math-convention (counterclockwise-positive) pursuit curvature
    steer = float(np.clip(-steer_angle / p.steer_max, -1.0, 1.0))

    bend = abs(wrap_angle(target_theta - state.heading))
    v_ref = xp.cruise_speed - xp.curve_slowdown * bend
    if dodge != 0.0:
        v_ref = min(v_ref, 0.6 * xp.cruise_speed)
    v_ref = float(np.clip(v_ref, 1.5, p.v_max))
    throttle = float(np.clip(xp.speed_gain * (v_ref - state.speed) / max(p.accel_max * p.dt, 1e-9) * p.dt, -1.0, 1.0))

    ttc = _expert_ttc(m, state, p)
    if ttc < xp.brake_ttc and state.speed > 0.15:
        throttle = -1.0

    # final self-check: never emit an action whose own short rollout collides
    from guardrl.env.dynamics import rollout_constant

    action = np.array([steer, throttle])
    sim = rollout_constant(m, state, action[None, :], 8, p)
    if sim["contact"][0] or sim["off_road"][0]:
        action[1] = -1.0
    return action


def _dodge_offset(m: MapSpec, s: float, lat: float, xp: ExpertParams) -> float:
    """Lateral target shift that clears the nearest obstacle ahead, 0 if clear."""
    if len(m.obs_r) == 0:
        return 0.0
    best = None
    for i in range(len(m.obs_r)):
        os_, olat, _, _ = project(m, m.obs_xy[i])
        ahead = os_ - s
        # include obstacles slightly behind the projection; their disc can
        # still overlap the path ahead
        if -2.5 <= ahead <= xp.dodge_window:
            if best is None or ahead < best[0]:
                best = (ahead, olat, m.obs_r[i])
    if best is None:
        return 0.0
    _, olat, orad = best
    # pass on the side with more room; road is clear about the centerline by construction
    side = -1.0 if olat > 0.0 else 1.0
    needed = orad + xp.dodge_clearance
    edge = olat + side * needed  # lateral of the clearance rim on the passing side
    if side > 0:
        return max(0.0, edge)
    return min(0.0, edge)


def _expert_ttc(m: MapSpec, state: EgoState, p: EnvParams) -> float:
    from guardrl.env.dynamics import time_to_collision

    return time_to_collision(m, state, p.car_radius)
