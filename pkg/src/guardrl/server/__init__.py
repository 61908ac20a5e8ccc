"""Live copilot session server: protocol, session engine, replay, transport."""

from guardrl.server.protocol import (
    BYE_SCHEMA,
    FRAME_SCHEMA,
    HELLO_SCHEMA,
    INPUT_SCHEMA,
    PROTOCOL_VERSION,
    frame_digest,
    make_input,
    parse_input,
)
from guardrl.server.replay import ReplayResult, replay_session
from guardrl.server.session import CopilotSession, ScriptedConsole, SessionStats, read_session_log

__all__ = [
    "BYE_SCHEMA",
    "CopilotSession",
    "FRAME_SCHEMA",
    "HELLO_SCHEMA",
    "INPUT_SCHEMA",
    "PROTOCOL_VERSION",
    "ReplayResult",
    "ScriptedConsole",
    "SessionStats",
    "frame_digest",
    "make_input",
    "parse_input",
    "read_session_log",
    "replay_session",
]
