"""Gradient-step execution: one step, and the per-iteration batch of steps."""

from __future__ import annotations

import logging

import numpy as np

from guardrl.errors import NonFiniteError
from guardrl.learner.buffer import ReplayBuffer
from guardrl.learner.core import LearnerState, TrainConfig
from guardrl.learner.losses import (
    alpha_gradient,
    policy_loss_and_grads,
    proxy_q_loss_and_grads,
    proxy_q_target,
    qint_loss_and_grads,
    qint_target,
)
from guardrl.numeric.adam import adam_step, adam_step_scalar, polyak

log = logging.getLogger(__name__)


def gradient_step(
    learner: LearnerState,
    buffer: ReplayBuffer,
    cfg: TrainConfig,
    rng: np.random.Generator,
    use_qint: bool = True,
    use_reward: bool = False,
) -> dict:
    """One full update: proxy twins, intervention value, policy, temperature,
    and polyak target blends, in that order. Mutates learner in place."""
    batch = buffer.sample(rng, cfg.batch_size)
    rewards = batch["reward"] if use_reward else None

    y = proxy_q_target(learner, batch, cfg, rng, rewards=rewards)
    q_loss, g1, g2, q_stats = proxy_q_loss_and_grads(
        learner, batch, y, cfg.conservative_weight, margin=cfg.conservative_margin
    )
    adam_step(learner.q1, g1, learner.q1_opt, cfg.learning_rate)
    adam_step(learner.q2, g2, learner.q2_opt, cfg.learning_rate)

    t_int = qint_target(learner, batch, cfg, rng)
    qi_loss, gi, qi_stats = qint_loss_and_grads(learner, batch, t_int)
    adam_step(learner.qint, gi, learner.qint_opt, cfg.learning_rate)

    pi_loss, gp, pi_stats = policy_loss_and_grads(learner, batch, cfg, rng, use_qint=use_qint)
    adam_step(learner.policy, gp, learner.policy_opt, cfg.learning_rate)

    target_h = cfg.effective_target_entropy(learner.act_dim)
    a_grad = alpha_gradient(learner.log_alpha, pi_stats["mean_log_prob"], target_h)
    learner.log_alpha = adam_step_scalar(learner.log_alpha, a_grad, learner.alpha_opt, cfg.learning_rate)

    learner.q1_target = polyak(learner.q1_target, learner.q1, cfg.tau)
    learner.q2_target = polyak(learner.q2_target, learner.q2, cfg.tau)
    if learner.qint_target is not None:
        learner.qint_target = polyak(learner.qint_target, learner.qint, cfg.tau)
    learner.updates += 1

    if not (np.isfinite(q_loss) and np.isfinite(qi_loss) and np.isfinite(pi_loss)):
        raise NonFiniteError("non-finite loss in gradient step")
    return {
        "proxy_q_loss": q_loss,
        "qint_loss": qi_loss,
        "policy_loss": pi_loss,
        "alpha": learner.alpha,
        "entropy": pi_stats["entropy_estimate"],
        "conservative_term": q_stats["conservative_term"],
        "n_intervened": q_stats["n_intervened"],
        "qint_target_mean": qi_stats["qint_target_mean"],
        "q_gap": _batch_q_gap(learner, batch),
    }


def train_iteration(
    learner: LearnerState,
    buffer: ReplayBuffer,
    cfg: TrainConfig,
    rng: np.random.Generator,
    use_qint: bool = True,
    use_reward: bool = False,
) -> dict:
    """cfg.gradient_steps_per_iteration updates in place on `learner`.

    Below the warm-up threshold this is a no-op. A non-finite loss anywhere
    aborts the whole iteration and restores the pre-iteration state, so a
    checkpoint taken afterwards is never poisoned.
    """
    if len(buffer) < cfg.steps_before_learning:
        return {"status": "warming-up", "buffer_size": len(buffer)}

    backup = learner.snapshot()
    diag: dict = {}
    try:
        for _ in range(cfg.gradient_steps_per_iteration):
            diag = gradient_step(learner, buffer, cfg, rng, use_qint=use_qint, use_reward=use_reward)
    except NonFiniteError as exc:
        learner.restore(backup)
        log.error("train_iteration aborted, state restored: %s", exc)
        return {"status": "aborted", "reason": str(exc)}
    diag["status"] = "ok"
    return diag


def _batch_q_gap(learner: LearnerState, batch: dict) -> float:
    """Mean min-twin Q(s, a_expert) - Q(s, a_agent) over the batch's intervened
    samples; nan when the batch has none."""
    idx = np.nonzero(batch.get("rejected", batch["intervened"]))[0]
    if len(idx) == 0:
        return float("nan")
    from guardrl.learner.core import q_gap

    return q_gap(learner, batch["obs"][idx], batch["act_agent"][idx], batch["act_expert"][idx])
