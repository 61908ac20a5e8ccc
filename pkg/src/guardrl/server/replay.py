"""Deterministic session replay.

Feeds a recorded input stream back through a fresh CopilotSession built from
the same config, re-running the recorded number of gradient steps per tick.
Frame digests must match tick for tick; the result carries the reconstructed
replay buffer and learner, which must equal the live session's byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from guardrl.errors import ConfigError
from guardrl.harness.config import RunConfig
from guardrl.learner.buffer import ReplayBuffer
from guardrl.learner.core import LearnerState
from guardrl.server.protocol import frame_digest
from guardrl.server.session import CopilotSession, read_session_log


@dataclass
class ReplayResult:
    buffer: ReplayBuffer
    learner: LearnerState
    ticks: int
    env_steps: int


def replay_session(log_path: str | Path, cfg: RunConfig) -> ReplayResult:
    """Raises ConfigError on config-hash mismatch or any frame divergence."""
    header, entries = read_session_log(log_path)
    if header["config_hash"] != cfg.config_hash():
        raise ConfigError(
            f"session log config hash {header['config_hash']} does not match supplied config {cfg.config_hash()}"
        )
    session = CopilotSession(cfg, log_path=None, update_budget_s=None)
    session.external_updates = True  # updates are driven by the recorded schedule
    env_steps = 0
    for entry in entries:
        if entry.get("type") != "tick":
            continue
        session.paused = bool(entry.get("paused", False))
        frame = session.tick(entry["input"])
        if frame_digest(frame) != entry["frame_digest"]:
            raise ConfigError(f"replay diverged at tick {entry['tick']}")
        session.run_recorded_updates(int(entry["updates"]))
        if not entry.get("paused", False):
            env_steps += 1
    return ReplayResult(buffer=session.buffer, learner=session.learner, ticks=len(entries), env_steps=env_steps)
