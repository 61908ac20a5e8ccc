"""Shared test oracles and fixtures helpers.

The finite-difference oracle here is the independent check for every analytic
gradient in the package: it only ever calls loss *values*, never the gradient
code under test.
"""

from __future__ import annotations

import numpy as np

from guardrl.numeric.mlp import ParamSet, flatten_params, unflatten_params


def finite_difference_grad(loss_of_params, params: ParamSet, step: float = 1e-6) -> ParamSet:
    """Central finite differences of a scalar loss over a ParamSet."""
    flat = flatten_params(params)
    g = np.zeros_like(flat)
    for i in range(flat.size):
        up = flat.copy()
        up[i] += step
        dn = flat.copy()
        dn[i] -= step
        g[i] = (loss_of_params(unflatten_params(params, up)) - loss_of_params(unflatten_params(params, dn))) / (
            2.0 * step
        )
    return unflatten_params(params, g)


def relative_error(analytic: ParamSet, numeric: ParamSet) -> float:
    a = flatten_params(analytic)
    n = flatten_params(numeric)
    denom = max(np.linalg.norm(a), np.linalg.norm(n), 1e-12)
    return float(np.linalg.norm(a - n) / denom)


def random_batch(rng: np.random.Generator, n: int, obs_dim: int, act_dim: int = 2, p_intervene: float = 0.5) -> dict:
    intervened = rng.uniform(size=n) < p_intervene
    act_agent = rng.uniform(-0.95, 0.95, size=(n, act_dim))
    act_expert = np.where(intervened[:, None], rng.uniform(-0.95, 0.95, size=(n, act_dim)), 0.0)
    rising = np.where(intervened, rng.uniform(0.0, 2.0, size=n), 0.0)
    # rising cost only on a subset of intervened steps (edges)
    rising *= rng.uniform(size=n) < 0.5
    return {
        "obs": rng.normal(size=(n, obs_dim)),
        "act_agent": act_agent,
        "act_expert": act_expert,
        "act_exec": np.where(intervened[:, None], act_expert, act_agent),
        "intervened": intervened,
        "rising_cost": rising,
        "obs_next": rng.normal(size=(n, obs_dim)),
        "terminal": rng.uniform(size=n) < 0.2,
    }
