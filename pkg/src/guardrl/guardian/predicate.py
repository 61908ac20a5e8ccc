"""Intervention predicate: lookahead rollout plus instantaneous safety margins.

Fires iff holding the agent's action constant for `lookahead_steps` predicts
leaving the road or touching an obstacle, or the current state already
violates a margin (lateral offset beyond a fraction of the half width, or
time-to-collision under a threshold). Pure given (state, action, map).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from guardrl.env.dynamics import (
    EgoState,
    EnvParams,
    nearest_obstacle_gap,
    rollout_constant,
    time_to_collision,
)
from guardrl.env.track import MapSpec, project


@dataclass(frozen=True)
class InterventionParams:
    lookahead_steps: int = 10
    lateral_margin_frac: float = 0.55
    ttc_threshold: float = 1.0  # seconds
    proximity_margin: float = 0.6  # meters of rim-to-rim clearance


def should_intervene(
    state: EgoState,
    agent_action: np.ndarray,
    m: MapSpec,
    p: EnvParams,
    ip: InterventionParams = InterventionParams(),
) -> bool:
    if _margin_violated(state, m, p, ip):
        return True
    _, _, hint, _ = project(m, state.xy)
    sim = rollout_constant(m, state, np.asarray(agent_action, dtype=np.float64)[None, :], ip.lookahead_steps, p, hint=hint)
    return bool(sim["off_road"][0] or sim["contact"][0])


def _margin_violated(state: EgoState, m: MapSpec, p: EnvParams, ip: InterventionParams) -> bool:
    """Instantaneous margins: lateral corridor, heading-ray TTC, and a
    proximity gate (zero-speed TTC degenerate) that catches tangential grazing."""
    _, lat, _, _ = project(m, state.xy)
    if abs(lat) > ip.lateral_margin_frac * m.half_width:
        return True
    if time_to_collision(m, state, p.car_radius) < ip.ttc_threshold:
        return True
    return nearest_obstacle_gap(m, state.xy, p.car_radius) < ip.proximity_margin


def flag_actions(
    state: EgoState,
    actions: np.ndarray,
    m: MapSpec,
    p: EnvParams,
    ip: InterventionParams = InterventionParams(),
) -> np.ndarray:
    """Vectorized should_intervene over an (N, 2) action batch at one state."""
    n = len(actions)
    if _margin_violated(state, m, p, ip):
        return np.ones(n, dtype=bool)
    _, _, hint, _ = project(m, state.xy)
    sim = rollout_constant(m, state, actions, ip.lookahead_steps, p, hint=hint)
    return sim["off_road"] | sim["contact"]
