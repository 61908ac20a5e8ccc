"""Wire protocol for the copilot console: line-delimited JSON over a websocket.

Every message carries {"v": 1, "type": "frame" | "input" | "hello" | "bye"}.
Full field documentation lives in docs/protocol.md; the JSON Schemas below are
the machine-readable contract and are what conformance tests validate against.
"""

from __future__ import annotations

import hashlib
import json

PROTOCOL_VERSION = 1

_XY = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_UNIT = {"type": "number", "minimum": -1.0, "maximum": 1.0}

HELLO_SCHEMA = {
    "type": "object",
    "required": ["v", "type", "client"],
    "properties": {
        "v": {"const": PROTOCOL_VERSION},
        "type": {"const": "hello"},
        "client": {"type": "string"},
    },
    "additionalProperties": False,
}

BYE_SCHEMA = {
    "type": "object",
    "required": ["v", "type"],
    "properties": {"v": {"const": PROTOCOL_VERSION}, "type": {"const": "bye"}},
    "additionalProperties": False,
}

INPUT_SCHEMA = {
    "type": "object",
    "required": ["v", "type", "ack_tick", "takeover", "steering", "throttle"],
    "properties": {
        "v": {"const": PROTOCOL_VERSION},
        "type": {"const": "input"},
        "ack_tick": {"type": "integer", "minimum": -1},
        "takeover": {"type": "boolean"},
        "steering": _UNIT,
        "throttle": _UNIT,
    },
    "additionalProperties": False,
}

FRAME_SCHEMA = {
    "type": "object",
    "required": [
        "v",
        "type",
        "tick",
        "paused",
        "ego",
        "view",
        "lidar",
        "agent_action",
        "takeover",
        "stats",
    ],
    "properties": {
        "v": {"const": PROTOCOL_VERSION},
        "type": {"const": "frame"},
        "tick": {"type": "integer", "minimum": 0},
        "paused": {"type": "boolean"},
        "ego": {
            "type": "object",
            "required": ["x", "y", "heading", "speed"],
            "properties": {
                "x": {"type": "number"},
                "y": {"type": "number"},
                "heading": {"type": "number"},
                "speed": {"type": "number", "minimum": 0},
            },
            "additionalProperties": False,
        },
        "view": {
            "type": "object",
            "required": ["centerline", "left", "right", "obstacles", "destination"],
            "properties": {
                "centerline": {"type": "array", "items": _XY},
                "left": {"type": "array", "items": _XY},
                "right": {"type": "array", "items": _XY},
                "obstacles": {
                    "type": "array",
                    "items": {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3},
                },
                "destination": _XY,
            },
            "additionalProperties": False,
        },
        "lidar": {"type": "array", "items": _XY},
        "agent_action": {"type": "array", "items": _UNIT, "minItems": 2, "maxItems": 2},
        "takeover": {"type": "boolean"},
        "stats": {
            "type": "object",
            "required": ["episode", "step", "env_step", "takeover_rate", "episodic_cost"],
            "properties": {
                "episode": {"type": "integer", "minimum": 0},
                "step": {"type": "integer", "minimum": 0},
                "env_step": {"type": "integer", "minimum": 0},
                "takeover_rate": {"type": "number", "minimum": 0, "maximum": 1},
                "episodic_cost": {"type": "number", "minimum": 0},
            },
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}


def make_input(ack_tick: int, takeover: bool, steering: float, throttle: float) -> dict:
    return {
        "v": PROTOCOL_VERSION,
        "type": "input",
        "ack_tick": int(ack_tick),
        "takeover": bool(takeover),
        "steering": float(max(-1.0, min(1.0, steering))),
        "throttle": float(max(-1.0, min(1.0, throttle))),
    }


def parse_input(msg: dict) -> dict | None:
    """Light server-side validation; returns a clamped copy or None if malformed."""
    if not isinstance(msg, dict) or msg.get("v") != PROTOCOL_VERSION or msg.get("type") != "input":
        return None
    try:
        return make_input(msg["ack_tick"], msg["takeover"], float(msg["steering"]), float(msg["throttle"]))
    except (KeyError, TypeError, ValueError):
        return None


def frame_digest(frame: dict) -> str:
    """Stable digest of a frame (sorted-key JSON); session logs store it so a
    replay can prove it reconstructed the identical stream."""
    blob = json.dumps(frame, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha1(blob).hexdigest()[:16]
