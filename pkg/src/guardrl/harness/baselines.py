"""Behavior-cloning baseline: maximum-likelihood fit of the squashed-Gaussian
policy on recorded expert demonstrations."""

from __future__ import annotations

import numpy as np

from guardrl.learner.core import LearnerState, TrainConfig, make_learner
from guardrl.numeric.adam import adam_step
from guardrl.numeric.gaussian import fixed_action_logp_grads, log_prob_of_action, split_policy_head
from guardrl.numeric.mlp import backward, forward_cached


def bc_loss_and_grads(learner: LearnerState, obs: np.ndarray, actions: np.ndarray):
    """Negative mean log-likelihood of demo actions, with policy gradients."""
    n = len(obs)
    raw, cache = forward_cached(learner.policy, obs)
    mean, log_std, inside = split_policy_head(raw)
    logp = log_prob_of_action(mean, log_std, actions)
    loss = float(-np.mean(logp))
    d_mean, d_log_std = fixed_action_logp_grads(mean, log_std, actions)
    d_raw = np.concatenate([-d_mean / n, (-d_log_std / n) * inside], axis=1)
    grads, _ = backward(learner.policy, cache, d_raw)
    return loss, grads


def fit_behavior_cloning(
    obs: np.ndarray,
    actions: np.ndarray,
    cfg: TrainConfig,
    seed: int,
    epochs: int = 50,
) -> tuple[LearnerState, list[float]]:
    """Adam minibatch training; value networks stay at their init (unused)."""
    rng = np.random.default_rng([seed, 0xBC])
    learner = make_learner(np.random.default_rng([seed, 0x1]), obs.shape[1], actions.shape[1], cfg)
    n = len(obs)
    losses = []
    for _ in range(epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        batches = 0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            loss, grads = bc_loss_and_grads(learner, obs[idx], actions[idx])
            adam_step(learner.policy, grads, learner.policy_opt, cfg.learning_rate)
            epoch_loss += loss
            batches += 1
        losses.append(epoch_loss / max(batches, 1))
    return learner, losses
