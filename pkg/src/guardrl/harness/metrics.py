"""Append-only CSV metrics with a schema stable across run modes.

Floats are formatted with repr-faithful %.17g so identical runs produce
byte-identical files.
"""

from __future__ import annotations

from pathlib import Path

METRICS_COLUMNS = (
    "env_step",
    "episode",
    "map_seed",
    "episode_steps",
    "takeover_rate",
    "episodic_intervention_cost",
    "cumulative_env_safety_violations",
    "success",
    "out_of_road",
    "proxy_q_loss",
    "qint_loss",
    "policy_loss",
    "alpha",
    "entropy",
    "q_gap",
)

EVAL_COLUMNS = ("map_seed", "episode", "return", "safety_violation", "success")


def fmt(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


class CsvWriter:
    """Single-writer append-only CSV file."""

    def __init__(self, path: str | Path, columns: tuple[str, ...]):
        self.path = Path(path)
        self.columns = columns
        self._fh = open(self.path, "w", newline="")
        self._fh.write(",".join(columns) + "\n")
        self._fh.flush()

    def write(self, row: dict) -> None:
        self._fh.write(",".join(fmt(row.get(c, "")) for c in self.columns) + "\n")
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
