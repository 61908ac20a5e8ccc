"""Training objectives and their analytic gradients.

Three parameterized objectives, all hand-chained through the MLP backward
pass (no graph autodiff):

* proxy value: squared TD error toward a reward-free entropy-regularized
  bootstrap target, plus a conservative ranking term that pushes the value of
  overridden agent actions below the expert's takeover actions;
* intervention value: squared TD error toward rising-edge cost plus a
  bootstrap at the next state under the current policy;
* policy: maximize min-twin proxy value minus entropy penalty minus
  intervention value, via reparameterized samples (value nets held fixed,
  their action gradients chained into the policy head).
"""

from __future__ import annotations

import numpy as np

from guardrl.errors import NonFiniteError
from guardrl.learner.core import LearnerState, TrainConfig
from guardrl.numeric.gaussian import (
    action_grad_to_head,
    reparam_logp_grads,
    sample_squashed_gaussian,
    split_policy_head,
)
from guardrl.numeric.mlp import (
    ParamSet,
    backward,
    forward,
    forward_cached,
    params_add_scaled,
    zeros_like_params,
)


def _qx(obs: np.ndarray, action: np.ndarray) -> np.ndarray:
    return np.concatenate([obs, action], axis=1)


def _policy_sample(learner: LearnerState, obs: np.ndarray, rng: np.random.Generator):
    raw, cache = forward_cached(learner.policy, obs)
    mean, log_std, inside = split_policy_head(raw)
    noise = rng.standard_normal(mean.shape)
    out = sample_squashed_gaussian(mean, log_std, noise)
    return out, cache, inside


def proxy_q_target(
    learner: LearnerState,
    batch: dict,
    cfg: TrainConfig,
    rng: np.random.Generator,
    rewards: np.ndarray | None = None,
) -> np.ndarray:
    """Per-sample bootstrap target.

    y = [reward +] (1 - terminal) * gamma * (min targetQ(s', a') - alpha * log pi(a'|s'))
    with one fresh policy sample a' per transition. The reward term exists only
    for the reward-shaped baseline; guarded training passes rewards=None.
    """
    obs_next = batch["obs_next"]
    out, _, _ = _policy_sample(learner, obs_next, rng)
    x = _qx(obs_next, out.action)
    q1 = forward(learner.q1_target, x)[:, 0]
    q2 = forward(learner.q2_target, x)[:, 0]
    # twin-average backup: the paper's target uses a single value net; averaging
    # keeps the twin redundancy without the min-operator's compounding
    # underestimation, which has no reward signal to correct it here
    qpair = 0.5 * (q1 + q2)
    cont = 1.0 - batch["terminal"].astype(np.float64)
    y = cont * cfg.gamma * (qpair - learner.alpha * out.log_prob)
    if rewards is not None:
        y = rewards + y
    return y


def td_loss_and_grads(qparams: ParamSet, obs: np.ndarray, action: np.ndarray, y: np.ndarray):
    """Mean squared error toward a fixed target, with parameter gradients."""
    n = len(y)
    x = _qx(obs, action)
    q, cache = forward_cached(qparams, x, check_finite=True)
    err = q[:, 0] - y
    loss = float(np.mean(err**2))
    grads, _ = backward(qparams, cache, (2.0 * err / n)[:, None])
    return loss, grads


def conservative_term_and_grads(
    qparams: ParamSet,
    obs: np.ndarray,
    act_agent: np.ndarray,
    act_expert: np.ndarray,
    weight: float,
    denom: int | None = None,
    margin: float | None = None,
):
    """weight * (1/denom) * sum[Q(s, a_agent) - Q(s, a_expert)] over the given
    (rejected) samples, with gradients. Minimizing it ranks rejected agent
    actions below the expert's takeover actions.

    denom defaults to the number of given samples; the combined proxy objective
    passes the full batch size, since the ranking term sits inside the same
    batch expectation as the TD term (indicator-weighted, so batches with few
    takeovers exert proportionally less ranking pressure).

    With a margin, samples already ordered by at least that much contribute
    nothing: the raw linear term never equilibrates and, replayed forever,
    keeps deepening carves long after the ordering holds, which warps the
    value surface (margin=None reproduces the plain form).
    """
    n = len(obs)
    denom = n if denom is None else denom
    qa, cache_a = forward_cached(qparams, _qx(obs, act_agent), check_finite=True)
    qh, cache_h = forward_cached(qparams, _qx(obs, act_expert), check_finite=True)
    diff = qa[:, 0] - qh[:, 0]
    if margin is None:
        active = np.ones(n)
    else:
        active = (diff > -margin).astype(np.float64)
    value = float(weight * (diff * active).sum() / denom)
    cot = (weight / denom) * active[:, None]
    grads, _ = backward(qparams, cache_a, cot)
    grads_h, _ = backward(qparams, cache_h, -cot)
    params_add_scaled(grads, grads_h)
    return value, grads


def proxy_q_loss_and_grads(
    learner: LearnerState, batch: dict, y: np.ndarray, weight: float, margin: float | None = None
):
    """TD term on both twins plus the conservative ranking term on rejected
    samples (also both twins). Returns (loss, grads_q1, grads_q2, stats)."""
    obs, act_exec = batch["obs"], batch["act_exec"]
    loss1, g1 = td_loss_and_grads(learner.q1, obs, act_exec, y)
    loss2, g2 = td_loss_and_grads(learner.q2, obs, act_exec, y)
    loss = loss1 + loss2
    cons_total = 0.0
    idx = np.nonzero(batch.get("rejected", batch["intervened"]))[0]
    if weight > 0.0 and len(idx):
        o = batch["obs"][idx]
        an = batch["act_agent"][idx]
        ah = batch["act_expert"][idx]
        denom = len(batch["obs"])
        c1, cg1 = conservative_term_and_grads(learner.q1, o, an, ah, weight, denom=denom, margin=margin)
        c2, cg2 = conservative_term_and_grads(learner.q2, o, an, ah, weight, denom=denom, margin=margin)
        params_add_scaled(g1, cg1)
        params_add_scaled(g2, cg2)
        cons_total = c1 + c2
        loss += cons_total
    stats = {"td_loss": loss1 + loss2, "conservative_term": cons_total, "n_intervened": int(len(idx))}
    return loss, g1, g2, stats


def qint_target(learner: LearnerState, batch: dict, cfg: TrainConfig, rng: np.random.Generator) -> np.ndarray:
    """Detached bootstrap target for the intervention value:
    rising_cost + (1 - terminal) * gamma * Qint(s', a'), a' ~ pi(.|s').
    Bootstraps through the online net unless a target net was enabled."""
    out, _, _ = _policy_sample(learner, batch["obs_next"], rng)
    boot_params = learner.qint_target if learner.qint_target is not None else learner.qint
    boot = forward(boot_params, _qx(batch["obs_next"], out.action))[:, 0]
    cont = 1.0 - batch["terminal"].astype(np.float64)
    return batch["rising_cost"] + cont * cfg.gamma * boot


def qint_loss_and_grads(learner: LearnerState, batch: dict, target: np.ndarray):
    """Squared error of the intervention value toward a precomputed target.

    The prediction is evaluated at the AGENT's proposed action: the rising-edge
    cost is caused by the proposal that triggered the takeover, so it must be
    charged there. Training at the executed action would blame the expert's
    overriding action for the cost and poison expert-like actions.
    """
    loss, grads = td_loss_and_grads(learner.qint, batch["obs"], batch["act_agent"], target)
    return loss, grads, {"qint_target_mean": float(np.mean(target))}


def _value_input_action_grad(qparams: ParamSet, x: np.ndarray, cot: np.ndarray, act_dim: int) -> np.ndarray:
    """d(cot . Q(x)) / d action-part-of-x, parameters held fixed."""
    _, cache = forward_cached(qparams, x, check_finite=True)
    _, dx = backward(qparams, cache, cot)
    return dx[:, -act_dim:]


def policy_loss_and_grads(
    learner: LearnerState,
    batch: dict,
    cfg: TrainConfig,
    rng: np.random.Generator,
    use_qint: bool = True,
):
    """mean[ -min Q(s, a) + alpha * log pi(a|s) + Qint(s, a) ] over fresh
    reparameterized samples a. Gradients flow only into the policy parameters;
    the value networks contribute through their action gradients."""
    obs = batch["obs"]
    n = len(obs)
    d = learner.act_dim
    out, cache, inside = _policy_sample(learner, obs, rng)
    x = _qx(obs, out.action)

    q1 = forward(learner.q1, x)[:, 0]
    q2 = forward(learner.q2, x)[:, 0]
    qpair = 0.5 * (q1 + q2)
    alpha = learner.alpha
    loss_terms = -qpair + alpha * out.log_prob
    if use_qint:
        qi = forward(learner.qint, x)[:, 0]
        loss_terms = loss_terms + qi
    loss = float(np.mean(loss_terms))
    if not np.isfinite(loss):
        raise NonFiniteError("non-finite policy loss")

    # action gradient of the scalar objective
    half = np.full((n, 1), 0.5 / n)
    d_act = -_value_input_action_grad(learner.q1, x, half, d)
    d_act -= _value_input_action_grad(learner.q2, x, half, d)
    if use_qint:
        d_act += _value_input_action_grad(learner.qint, x, np.full((n, 1), 1.0 / n), d)

    # chain into the policy head: action path + direct log-prob path
    g_mean, g_log_std = action_grad_to_head(out, d_act)
    lp_mean, lp_log_std = reparam_logp_grads(out)
    g_mean = g_mean + (alpha / n) * lp_mean
    g_log_std = g_log_std + (alpha / n) * lp_log_std
    g_log_std = g_log_std * inside  # clamp pass-through
    d_raw = np.concatenate([g_mean, g_log_std], axis=1)
    grads, _ = backward(learner.policy, cache, d_raw)
    stats = {
        "entropy_estimate": float(-np.mean(out.log_prob)),
        "mean_log_prob": float(np.mean(out.log_prob)),
        "mean_q_pair": float(np.mean(qpair)),
    }
    return loss, grads, stats


def alpha_gradient(log_alpha: float, mean_log_prob: float, target_entropy: float) -> float:
    """d/d log_alpha of mean[-alpha * (log pi + target_entropy)], log pi detached."""
    return -float(np.exp(log_alpha)) * (mean_log_prob + target_entropy)
