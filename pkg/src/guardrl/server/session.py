"""Transport-independent copilot session engine.

One tick = one environment step under live human guardianship: the freshest
InputMsg decides takeover, the learner proposes and learns exactly as in
scripted training (same transition layout, same rising-edge bookkeeping).
Learner updates are scheduled between ticks; the number actually run per tick
is recorded in the session log so a replay can reproduce parameters bit for
bit even when a live session deferred work under its time budget.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from guardrl.env.sim import DrivingEnv, observation_dim
from guardrl.errors import ConfigError
from guardrl.harness.config import RunConfig
from guardrl.harness.runner import build_maps
from guardrl.learner.buffer import ReplayBuffer, Transition
from guardrl.learner.core import LearnerState, act, make_learner
from guardrl.learner.costs import intervention_cost, rising_edge_cost
from guardrl.learner.update import gradient_step
from guardrl.server.protocol import PROTOCOL_VERSION, frame_digest, parse_input

SESSION_FORMAT = "guardrl-session"
SESSION_VERSION = 1

VIEW_DECIMATE = 4  # centerline/edge points sent every N samples (2 m spacing)
VIEW_SPAN = 120  # samples each side of the ego (60 m)


def _pts(arr: np.ndarray) -> list[list[float]]:
    return [[round(float(x), 3), round(float(y), 3)] for x, y in arr]


@dataclass
class SessionStats:
    episode: int = 0
    step: int = 0
    env_step: int = 0
    takeover_steps: int = 0
    episodic_cost: float = 0.0

    @property
    def takeover_rate(self) -> float:
        return self.takeover_steps / max(self.step, 1)


class CopilotSession:
    """Drives Algorithm-style bookkeeping with a human (or scripted console)
    supplying takeover decisions through InputMsgs."""

    def __init__(self, cfg: RunConfig, log_path: str | Path | None = None, update_budget_s: float | None = None):
        self.cfg = cfg
        self.maps = build_maps(cfg.train_map_seeds, cfg.difficulty, cfg.lane_width)
        self.env = DrivingEnv(cfg.env)
        self.learner: LearnerState = make_learner(
            np.random.default_rng([cfg.seed, 0x11]), observation_dim(cfg.env), 2, cfg.train
        )
        self.buffer = ReplayBuffer(cfg.buffer_capacity, self.learner.obs_dim, 2)
        self.rng_action = np.random.default_rng([cfg.seed, 0xA5])
        self.rng_learn = np.random.default_rng([cfg.seed, 0x5A])
        self.update_budget_s = update_budget_s
        self.external_updates = False  # replay drives updates from the recorded schedule
        self.paused = False
        self.tick_index = 0
        self.stats = SessionStats()
        self._prev_intervened = False
        self._takeover = False
        self._steer = 0.0
        self._throttle = 0.0
        self._last_ack = -1
        self.stale_inputs = 0
        self._pending_grad_steps = 0
        self._obs = self.env.reset(self.maps[0])
        self._log_fh = None
        if log_path is not None:
            self._log_fh = open(log_path, "w")
            header = {
                "format": SESSION_FORMAT,
                "version": SESSION_VERSION,
                "config_hash": cfg.config_hash(),
                "protocol": PROTOCOL_VERSION,
            }
            self._log_fh.write(json.dumps(header, sort_keys=True) + "\n")

    # -- input handling -------------------------------------------------

    def ingest(self, msg: dict | None) -> None:
        """Apply the freshest InputMsg; stale or malformed messages are dropped
        and the previous takeover state persists."""
        if msg is None:
            return
        parsed = parse_input(msg)
        if parsed is None:
            return
        if parsed["ack_tick"] < self._last_ack:
            self.stale_inputs += 1
            return
        self._last_ack = parsed["ack_tick"]
        self._takeover = parsed["takeover"]
        self._steer = parsed["steering"]
        self._throttle = parsed["throttle"]

    # -- main loop ------------------------------------------------------

    def tick(self, input_msg: dict | None = None) -> dict:
        """One tick: ingest input, step environment (unless paused), learn,
        emit the next frame. Returns the FrameMsg dict."""
        self.ingest(input_msg)
        raw_input = input_msg
        if self.paused:
            frame = self._build_frame(agent_action=np.zeros(2))
            self._log(frame, raw_input, None, False, 0.0, 0)
            self.tick_index += 1
            return frame

        m = self.maps[self.stats.episode % len(self.maps)]
        a_n = act(self.learner, self._obs, self.rng_action)
        intervened = self._takeover
        a_h = np.array([self._steer, self._throttle]) if intervened else None
        applied = a_h if intervened else a_n
        raw_cost = intervention_cost(a_n, a_h) if intervened else 0.0
        rising = rising_edge_cost(intervened, self._prev_intervened, raw_cost)

        sr = self.env.step(applied)
        terminal = sr.out_of_road  # failure-only terminal, as in the scripted loop
        self.buffer.push(
            Transition(
                obs=self._obs,
                act_agent=a_n,
                act_expert=a_h,
                intervened=intervened,
                rising_cost=rising,
                obs_next=sr.observation,
                terminal=terminal,
            )
        )
        self._prev_intervened = intervened
        self._obs = sr.observation
        self.stats.step += 1
        self.stats.env_step += 1
        self.stats.takeover_steps += intervened
        self.stats.episodic_cost += rising

        episode_done = sr.terminal
        if episode_done:
            self.stats = SessionStats(episode=self.stats.episode + 1, env_step=self.stats.env_step)
            self._prev_intervened = False
            nxt = self.maps[self.stats.episode % len(self.maps)]
            self._obs = self.env.reset(nxt)

        if (
            self.stats.env_step % self.cfg.train.env_steps_per_iteration == 0
            and len(self.buffer) >= self.cfg.train.steps_before_learning
        ):
            self._pending_grad_steps += self.cfg.train.gradient_steps_per_iteration
        updates_run = 0 if self.external_updates else self._run_updates()

        frame = self._build_frame(agent_action=a_n)
        self._log(frame, raw_input, applied, intervened, rising, updates_run, episode_done)
        self.tick_index += 1
        return frame

    def _run_updates(self) -> int:
        ran = 0
        deadline = None if self.update_budget_s is None else time.perf_counter() + self.update_budget_s
        while self._pending_grad_steps > 0:
            if deadline is not None and time.perf_counter() >= deadline:
                break
            gradient_step(self.learner, self.buffer, self.cfg.train, self.rng_learn)
            self._pending_grad_steps -= 1
            ran += 1
        return ran

    def run_recorded_updates(self, n: int) -> None:
        for _ in range(n):
            gradient_step(self.learner, self.buffer, self.cfg.train, self.rng_learn)

    # -- frame / log ----------------------------------------------------

    def _build_frame(self, agent_action: np.ndarray) -> dict:
        m = self.maps[self.stats.episode % len(self.maps)]
        state = self.env.state
        from guardrl.env.lidar import lidar_scan
        from guardrl.env.track import point_at, project

        _, _, idx, _ = project(m, state.xy)
        lo = max(0, idx - VIEW_SPAN)
        hi = min(len(m.cl_s), idx + VIEW_SPAN)
        sl = slice(lo, hi, VIEW_DECIMATE)

        rays = lidar_scan(m, state.xy, state.heading, self.cfg.env.lidar_rays, self.cfg.env.lidar_range)
        angles = state.heading + 2.0 * np.pi * np.arange(self.cfg.env.lidar_rays) / self.cfg.env.lidar_rays
        ends = state.xy[None, :] + (rays * self.cfg.env.lidar_range)[:, None] * np.stack(
            [np.cos(angles), np.sin(angles)], axis=1
        )
        dest_xy, _ = point_at(m, m.destination_s)
        return {
            "v": PROTOCOL_VERSION,
            "type": "frame",
            "tick": self.tick_index,
            "paused": self.paused,
            "ego": {
                "x": round(float(state.x), 4),
                "y": round(float(state.y), 4),
                "heading": round(float(state.heading), 5),
                "speed": round(float(state.speed), 4),
            },
            "view": {
                "centerline": _pts(m.cl_xy[sl]),
                "left": _pts(m.left_xy[sl]),
                "right": _pts(m.right_xy[sl]),
                "obstacles": [[round(float(x), 3), round(float(y), 3), round(float(r), 3)] for (x, y), r in zip(m.obs_xy, m.obs_r)],
                "destination": [round(float(dest_xy[0]), 3), round(float(dest_xy[1]), 3)],
            },
            "lidar": _pts(ends),
            "agent_action": [round(float(np.clip(agent_action[0], -1, 1)), 5), round(float(np.clip(agent_action[1], -1, 1)), 5)],
            "takeover": bool(self._takeover),
            "stats": {
                "episode": self.stats.episode,
                "step": self.stats.step,
                "env_step": self.stats.env_step,
                "takeover_rate": round(self.stats.takeover_rate, 6),
                "episodic_cost": round(self.stats.episodic_cost, 6),
            },
        }

    def _log(self, frame, raw_input, applied, intervened, rising, updates, episode_done=False) -> None:
        if self._log_fh is None:
            return
        entry = {
            "type": "tick",
            "tick": frame["tick"],
            "paused": frame["paused"],
            "frame_digest": frame_digest(frame),
            "input": raw_input,
            "applied": None if applied is None else [float(applied[0]), float(applied[1])],
            "intervened": bool(intervened),
            "rising_cost": float(rising),
            "updates": int(updates),
            "episode_done": bool(episode_done),
        }
        self._log_fh.write(json.dumps(entry, sort_keys=True) + "\n")

    def close(self) -> None:
        if self._log_fh is not None:
            self._log_fh.flush()
            self._log_fh.close()
            self._log_fh = None


class ScriptedConsole:
    """Drives the console side of the protocol from a scripted guardian: reads
    each FrameMsg like a human would and answers with an InputMsg."""

    def __init__(self, guardian, maps, env_params):
        self.guardian = guardian
        self.maps = maps
        self.env_params = env_params

    def respond(self, frame: dict) -> dict:
        from guardrl.env.dynamics import EgoState
        from guardrl.server.protocol import make_input

        m = self.maps[frame["stats"]["episode"] % len(self.maps)]
        ego = frame["ego"]
        state = EgoState(ego["x"], ego["y"], ego["heading"], ego["speed"])
        decision = self.guardian.decide(m, state, np.array(frame["agent_action"]))
        if decision.intervene:
            a = np.clip(decision.expert_action, -1.0, 1.0)
            return make_input(frame["tick"], True, float(a[0]), float(a[1]))
        return make_input(frame["tick"], False, 0.0, 0.0)


def read_session_log(path: str | Path) -> tuple[dict, list[dict]]:
    with open(path) as fh:
        header = json.loads(fh.readline())
        if header.get("format") != SESSION_FORMAT or header.get("version") != SESSION_VERSION:
            raise ConfigError(f"{path}: not a version-{SESSION_VERSION} session log")
        entries = [json.loads(line) for line in fh if line.strip()]
    return header, entries
