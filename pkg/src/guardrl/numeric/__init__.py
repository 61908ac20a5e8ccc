"""Numeric core: dense nets, analytic gradients, Adam, squashed-Gaussian head."""

from guardrl.numeric.adam import OptState, adam_step, adam_step_scalar, polyak
from guardrl.numeric.checkpoint import load_checkpoint, save_checkpoint
from guardrl.numeric.gaussian import (
    LOG_STD_MAX,
    LOG_STD_MIN,
    SQUASH_EPS,
    PolicyOutput,
    log_prob_of_action,
    sample_squashed_gaussian,
    split_policy_head,
)
from guardrl.numeric.mlp import (
    ParamSet,
    backward,
    flatten_params,
    forward,
    forward_cached,
    init_mlp,
    params_add_scaled,
    unflatten_params,
    value_and_grad,
    zeros_like_params,
)

__all__ = [
    "LOG_STD_MAX",
    "LOG_STD_MIN",
    "OptState",
    "ParamSet",
    "PolicyOutput",
    "SQUASH_EPS",
    "adam_step",
    "adam_step_scalar",
    "backward",
    "flatten_params",
    "forward",
    "forward_cached",
    "init_mlp",
    "load_checkpoint",
    "log_prob_of_action",
    "params_add_scaled",
    "polyak",
    "sample_squashed_gaussian",
    "save_checkpoint",
    "split_policy_head",
    "unflatten_params",
    "value_and_grad",
    "zeros_like_params",
]
