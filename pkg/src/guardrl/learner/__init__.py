"""Reward-free learner trained from interventions and partial demonstrations."""

from guardrl.learner.buffer import ReplayBuffer, Transition
from guardrl.learner.core import (
    LearnerState,
    TrainConfig,
    act,
    learner_arrays,
    load_learner,
    make_learner,
    policy_head,
    q_gap,
    q_pair,
    q_values,
    save_learner,
)
from guardrl.learner.costs import intervention_cost, is_degenerate_pair, rising_edge_cost
from guardrl.learner.loop import EpisodeStats, TrainingResult, run_training
from guardrl.learner.losses import (
    alpha_gradient,
    conservative_term_and_grads,
    policy_loss_and_grads,
    proxy_q_loss_and_grads,
    proxy_q_target,
    qint_loss_and_grads,
    qint_target,
    td_loss_and_grads,
)
from guardrl.learner.update import train_iteration

__all__ = [
    "EpisodeStats",
    "LearnerState",
    "ReplayBuffer",
    "TrainConfig",
    "TrainingResult",
    "Transition",
    "act",
    "alpha_gradient",
    "conservative_term_and_grads",
    "intervention_cost",
    "is_degenerate_pair",
    "learner_arrays",
    "load_learner",
    "make_learner",
    "policy_head",
    "policy_loss_and_grads",
    "proxy_q_loss_and_grads",
    "proxy_q_target",
    "q_gap",
    "q_pair",
    "q_values",
    "qint_loss_and_grads",
    "qint_target",
    "rising_edge_cost",
    "run_training",
    "save_learner",
    "td_loss_and_grads",
    "train_iteration",
]
