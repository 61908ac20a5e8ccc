"""Intervention cost: cosine dissimilarity, charged only at a takeover's rising edge."""

from __future__ import annotations

import numpy as np

DEGENERATE_NORM = 1e-8


def intervention_cost(act_agent: np.ndarray, act_expert: np.ndarray) -> float:
    """1 - cos(angle between agent and expert action), in [0, 2].

    Either vector having near-zero norm makes the cosine undefined; the cost is
    then defined as 1 (orthogonality convention). Use `is_degenerate_pair` to
    flag such pairs in diagnostics.
    """
    a = np.asarray(act_agent, dtype=np.float64)
    h = np.asarray(act_expert, dtype=np.float64)
    na = float(np.linalg.norm(a))
    nh = float(np.linalg.norm(h))
    if na < DEGENERATE_NORM or nh < DEGENERATE_NORM:
        return 1.0
    return float(np.clip(1.0 - float(a @ h) / (na * nh), 0.0, 2.0))


def is_degenerate_pair(act_agent: np.ndarray, act_expert: np.ndarray) -> bool:
    return (
        float(np.linalg.norm(act_agent)) < DEGENERATE_NORM
        or float(np.linalg.norm(act_expert)) < DEGENERATE_NORM
    )


def rising_edge_cost(intervened_now: bool, intervened_prev: bool, raw_cost: float) -> float:
    """raw_cost at the first step of a takeover run, 0 everywhere else."""
    if not 0.0 <= raw_cost <= 2.0:
        raise ValueError(f"raw_cost {raw_cost} outside [0, 2]")
    return raw_cost if (intervened_now and not intervened_prev) else 0.0
