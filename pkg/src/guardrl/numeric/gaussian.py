"""Tanh-squashed diagonal Gaussian policy head.

A raw policy-net output of width 2d is split into a mean vector and a log-std
vector; log-std is clamped to [LOG_STD_MIN, LOG_STD_MAX]. Sampling squashes
u = mean + exp(log_std) * noise through tanh, and the log-density carries the
change-of-variables correction  -sum log(1 - tanh(u)^2 + SQUASH_EPS).

The gradient helpers below cover the two ways the log-density is differentiated
downstream: through a reparameterized sample (noise held fixed) and at a fixed
action (behavior-cloning likelihood).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from guardrl.errors import ShapeError

LOG_STD_MIN = -20.0
LOG_STD_MAX = 2.0
SQUASH_EPS = 1e-6


@dataclass
class PolicyOutput:
    """One squashed-Gaussian draw (batched): action in (-1,1)^d, its log-prob,
    the pre-squash mean / clamped log-std, and the pre-squash sample u."""

    action: np.ndarray
    log_prob: np.ndarray
    mean: np.ndarray
    log_std: np.ndarray
    pre_squash: np.ndarray


def split_policy_head(raw: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split raw net output into (mean, clamped log_std, clamp pass-through mask)."""
    raw = np.atleast_2d(np.asarray(raw, dtype=np.float64))
    if raw.shape[1] % 2 != 0:
        raise ShapeError(f"policy head width {raw.shape[1]} is not 2*d")
    d = raw.shape[1] // 2
    mean = raw[:, :d]
    raw_log_std = raw[:, d:]
    log_std = np.clip(raw_log_std, LOG_STD_MIN, LOG_STD_MAX)
    inside = ((raw_log_std > LOG_STD_MIN) & (raw_log_std < LOG_STD_MAX)).astype(np.float64)
    return mean, log_std, inside


def sample_squashed_gaussian(mean: np.ndarray, log_std: np.ndarray, noise: np.ndarray) -> PolicyOutput:
    """action = tanh(mean + exp(log_std) * noise), with the corrected log-density.

    All arrays must share one shape; a single vector or a (batch, d) block.
    """
    mean = np.asarray(mean, dtype=np.float64)
    log_std = np.asarray(log_std, dtype=np.float64)
    noise = np.asarray(noise, dtype=np.float64)
    if mean.shape != log_std.shape or mean.shape != noise.shape:
        raise ShapeError(f"mean {mean.shape}, log_std {log_std.shape}, noise {noise.shape} must match")
    squeeze = mean.ndim == 1
    m = np.atleast_2d(mean)
    ls = np.atleast_2d(log_std)
    z = np.atleast_2d(noise)
    std = np.exp(ls)
    u = m + std * z
    a = np.tanh(u)
    gauss = -0.5 * np.log(2.0 * np.pi) - ls - 0.5 * z * z
    corr = np.log(1.0 - a * a + SQUASH_EPS)
    logp = (gauss - corr).sum(axis=1)
    if squeeze:
        return PolicyOutput(a[0], logp[0], m[0], ls[0], u[0])
    return PolicyOutput(a, logp, m, ls, u)


def log_prob_of_action(mean: np.ndarray, log_std: np.ndarray, action: np.ndarray) -> np.ndarray:
    """Log-density of a given squashed action (clipped slightly inside (-1,1))."""
    a = np.clip(np.atleast_2d(action), -1.0 + 1e-9, 1.0 - 1e-9)
    u = np.arctanh(a)
    m = np.atleast_2d(mean)
    ls = np.atleast_2d(log_std)
    z = (u - m) / np.exp(ls)
    gauss = -0.5 * np.log(2.0 * np.pi) - ls - 0.5 * z * z
    corr = np.log(1.0 - a * a + SQUASH_EPS)
    return (gauss - corr).sum(axis=1)


def dlogp_du(out: PolicyOutput) -> np.ndarray:
    """d log_prob / d u for a reparameterized sample, elementwise.

    Only the tanh correction depends on u once noise is fixed:
    d/du [-log(1 - tanh(u)^2 + eps)] = 2 tanh(u) (1 - tanh(u)^2) / (1 - tanh(u)^2 + eps).
    """
    a = np.atleast_2d(out.action)
    return 2.0 * a * (1.0 - a * a) / (1.0 - a * a + SQUASH_EPS)


def reparam_logp_grads(out: PolicyOutput) -> tuple[np.ndarray, np.ndarray]:
    """(d log_prob / d mean, d log_prob / d log_std) with the sampling noise fixed.

    u = mean + exp(log_std) * noise, so du/dmean = 1 and du/dlog_std = u - mean;
    the Gaussian term contributes -1 per component to the log_std derivative.
    """
    g_u = dlogp_du(out)
    u = np.atleast_2d(out.pre_squash)
    m = np.atleast_2d(out.mean)
    d_mean = g_u
    d_log_std = -1.0 + g_u * (u - m)
    return d_mean, d_log_std


def action_grad_to_head(out: PolicyOutput, d_action: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Push a gradient w.r.t. the squashed action back to (mean, log_std).

    da/du = 1 - tanh(u)^2; du/dmean = 1; du/dlog_std = u - mean.
    """
    a = np.atleast_2d(out.action)
    u = np.atleast_2d(out.pre_squash)
    m = np.atleast_2d(out.mean)
    g_u = np.atleast_2d(d_action) * (1.0 - a * a)
    return g_u, g_u * (u - m)


def fixed_action_logp_grads(mean: np.ndarray, log_std: np.ndarray, action: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(d log_prob / d mean, d log_prob / d log_std) holding the action fixed."""
    a = np.clip(np.atleast_2d(action), -1.0 + 1e-9, 1.0 - 1e-9)
    u = np.arctanh(a)
    m = np.atleast_2d(mean)
    ls = np.atleast_2d(log_std)
    z = (u - m) / np.exp(ls)
    d_mean = z / np.exp(ls)
    d_log_std = z * z - 1.0
    return d_mean, d_log_std
