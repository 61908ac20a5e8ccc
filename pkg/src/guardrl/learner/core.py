"""Learner state: policy, twin proxy value nets + targets, intervention value
net, entropy temperature, and their optimizers."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from guardrl.numeric.adam import OptState
from guardrl.numeric.checkpoint import load_checkpoint, save_checkpoint
from guardrl.numeric.gaussian import sample_squashed_gaussian, split_policy_head
from guardrl.numeric.mlp import ParamSet, forward, init_mlp


@dataclass(frozen=True)
class TrainConfig:
    gamma: float = 0.99
    tau: float = 0.005
    learning_rate: float = 1e-4
    batch_size: int = 256
    conservative_weight: float = 10.0  # multiplier on the expert-over-agent ranking term
    conservative_margin: float | None = None  # ranking pressure stops once ordered by this much
    target_entropy: float = 2.0
    conventional_target_entropy: bool = False  # use -action_dim instead
    steps_before_learning: int = 100
    env_steps_per_iteration: int = 100
    gradient_steps_per_iteration: int = 100
    qint_target_network: bool = False
    hidden: tuple[int, ...] = (256, 256)
    activation: str = "relu"

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        if not 0.0 < self.tau <= 1.0:
            raise ValueError("tau must lie in (0, 1]")
        if self.conservative_weight < 0.0:
            raise ValueError("conservative_weight must be >= 0")

    def effective_target_entropy(self, act_dim: int) -> float:
        return -float(act_dim) if self.conventional_target_entropy else self.target_entropy


@dataclass
class LearnerState:
    obs_dim: int
    act_dim: int
    policy: ParamSet
    q1: ParamSet
    q2: ParamSet
    q1_target: ParamSet
    q2_target: ParamSet
    qint: ParamSet
    qint_target: ParamSet | None
    log_alpha: float
    policy_opt: OptState
    q1_opt: OptState
    q2_opt: OptState
    qint_opt: OptState
    alpha_opt: dict = field(default_factory=lambda: {"m": 0.0, "v": 0.0, "step": 0})
    updates: int = 0

    @property
    def alpha(self) -> float:
        return float(np.exp(self.log_alpha))

    def snapshot(self) -> "LearnerState":
        return LearnerState(
            obs_dim=self.obs_dim,
            act_dim=self.act_dim,
            policy=self.policy.copy(),
            q1=self.q1.copy(),
            q2=self.q2.copy(),
            q1_target=self.q1_target.copy(),
            q2_target=self.q2_target.copy(),
            qint=self.qint.copy(),
            qint_target=self.qint_target.copy() if self.qint_target else None,
            log_alpha=self.log_alpha,
            policy_opt=self.policy_opt.copy(),
            q1_opt=self.q1_opt.copy(),
            q2_opt=self.q2_opt.copy(),
            qint_opt=self.qint_opt.copy(),
            alpha_opt=dict(self.alpha_opt),
            updates=self.updates,
        )

    def restore(self, other: "LearnerState") -> None:
        self.policy = other.policy
        self.q1, self.q2 = other.q1, other.q2
        self.q1_target, self.q2_target = other.q1_target, other.q2_target
        self.qint, self.qint_target = other.qint, other.qint_target
        self.log_alpha = other.log_alpha
        self.policy_opt, self.q1_opt, self.q2_opt, self.qint_opt = (
            other.policy_opt,
            other.q1_opt,
            other.q2_opt,
            other.qint_opt,
        )
        self.alpha_opt = other.alpha_opt
        self.updates = other.updates


def make_learner(rng: np.random.Generator, obs_dim: int, act_dim: int, cfg: TrainConfig) -> LearnerState:
    sizes_q = [obs_dim + act_dim, *cfg.hidden, 1]
    sizes_pi = [obs_dim, *cfg.hidden, 2 * act_dim]
    policy = init_mlp(rng, sizes_pi, cfg.activation)
    q1 = init_mlp(rng, sizes_q, cfg.activation)
    q2 = init_mlp(rng, sizes_q, cfg.activation)
    qint = init_mlp(rng, sizes_q, cfg.activation)
    return LearnerState(
        obs_dim=obs_dim,
        act_dim=act_dim,
        policy=policy,
        q1=q1,
        q2=q2,
        q1_target=q1.copy(),
        q2_target=q2.copy(),
        qint=qint,
        qint_target=qint.copy() if cfg.qint_target_network else None,
        log_alpha=0.0,
        policy_opt=OptState.for_params(policy),
        q1_opt=OptState.for_params(q1),
        q2_opt=OptState.for_params(q2),
        qint_opt=OptState.for_params(qint),
    )


def policy_head(learner: LearnerState, obs: np.ndarray):
    raw = forward(learner.policy, np.atleast_2d(obs))
    return split_policy_head(raw)


def act(learner: LearnerState, obs: np.ndarray, rng: np.random.Generator | None = None, deterministic: bool = False) -> np.ndarray:
    """One action for a single observation; deterministic returns tanh(mean)."""
    mean, log_std, _ = policy_head(learner, obs)
    if deterministic:
        return np.tanh(mean[0])
    noise = rng.standard_normal(mean.shape)
    return sample_squashed_gaussian(mean, log_std, noise).action[0]


def q_values(params: ParamSet, obs: np.ndarray, action: np.ndarray) -> np.ndarray:
    x = np.concatenate([np.atleast_2d(obs), np.atleast_2d(action)], axis=1)
    return forward(params, x)[:, 0]


def q_pair(learner: LearnerState, obs: np.ndarray, action: np.ndarray) -> np.ndarray:
    """Twin-average value, the aggregate used by the bootstrap and the policy."""
    return 0.5 * (q_values(learner.q1, obs, action) + q_values(learner.q2, obs, action))


def q_gap(learner: LearnerState, obs: np.ndarray, act_agent: np.ndarray, act_expert: np.ndarray) -> float:
    """Mean Q(s, expert) - Q(s, agent); positive means the learned values rank
    the expert's choice above the overridden one."""
    return float(np.mean(q_pair(learner, obs, act_expert) - q_pair(learner, obs, act_agent)))


_ARRAY_FIELDS = ("policy", "q1", "q2", "q1_target", "q2_target", "qint")
_OPT_FIELDS = ("policy_opt", "q1_opt", "q2_opt", "qint_opt")


def learner_arrays(learner: LearnerState) -> dict[str, np.ndarray]:
    arrays: dict[str, np.ndarray] = {}
    for name in _ARRAY_FIELDS:
        ps: ParamSet = getattr(learner, name)
        for i, (w, b) in enumerate(zip(ps.weights, ps.biases)):
            arrays[f"{name}.w{i}"] = w
            arrays[f"{name}.b{i}"] = b
    if learner.qint_target is not None:
        for i, (w, b) in enumerate(zip(learner.qint_target.weights, learner.qint_target.biases)):
            arrays[f"qint_target.w{i}"] = w
            arrays[f"qint_target.b{i}"] = b
    for name in _OPT_FIELDS:
        opt: OptState = getattr(learner, name)
        for i, a in enumerate(opt.m_weights):
            arrays[f"{name}.mw{i}"] = a
        for i, a in enumerate(opt.m_biases):
            arrays[f"{name}.mb{i}"] = a
        for i, a in enumerate(opt.v_weights):
            arrays[f"{name}.vw{i}"] = a
        for i, a in enumerate(opt.v_biases):
            arrays[f"{name}.vb{i}"] = a
    return arrays


def save_learner(learner: LearnerState, path, config_hash: str, meta: dict | None = None) -> None:
    scalars = {
        "obs_dim": learner.obs_dim,
        "act_dim": learner.act_dim,
        "log_alpha": learner.log_alpha,
        "alpha_m": learner.alpha_opt["m"],
        "alpha_v": learner.alpha_opt["v"],
        "alpha_step": learner.alpha_opt["step"],
        "updates": learner.updates,
        "policy_opt_step": learner.policy_opt.step,
        "q1_opt_step": learner.q1_opt.step,
        "q2_opt_step": learner.q2_opt.step,
        "qint_opt_step": learner.qint_opt.step,
        "n_layers": len(learner.policy.weights),
        "activation_relu": 1 if learner.policy.activation == "relu" else 0,
        "has_qint_target": 0 if learner.qint_target is None else 1,
    }
    save_checkpoint(path, learner_arrays(learner), scalars, config_hash, meta)


def load_learner(path, expect_config_hash: str | None = None) -> LearnerState:
    from guardrl.errors import ConfigError

    arrays, scalars, config_hash, _meta = load_checkpoint(path)
    if expect_config_hash is not None and config_hash != expect_config_hash:
        raise ConfigError(f"checkpoint config hash {config_hash} != expected {expect_config_hash}")
    n = int(scalars["n_layers"])
    activation = "relu" if scalars["activation_relu"] else "tanh"

    def ps(name: str) -> ParamSet:
        return ParamSet(
            [arrays[f"{name}.w{i}"] for i in range(n)],
            [arrays[f"{name}.b{i}"] for i in range(n)],
            activation,
        )

    def opt(name: str, step_key: str) -> OptState:
        return OptState(
            [arrays[f"{name}.mw{i}"] for i in range(n)],
            [arrays[f"{name}.mb{i}"] for i in range(n)],
            [arrays[f"{name}.vw{i}"] for i in range(n)],
            [arrays[f"{name}.vb{i}"] for i in range(n)],
            int(scalars[step_key]),
        )

    return LearnerState(
        obs_dim=int(scalars["obs_dim"]),
        act_dim=int(scalars["act_dim"]),
        policy=ps("policy"),
        q1=ps("q1"),
        q2=ps("q2"),
        q1_target=ps("q1_target"),
        q2_target=ps("q2_target"),
        qint=ps("qint"),
        qint_target=ps("qint_target") if scalars["has_qint_target"] else None,
        log_alpha=float(scalars["log_alpha"]),
        policy_opt=opt("policy_opt", "policy_opt_step"),
        q1_opt=opt("q1_opt", "q1_opt_step"),
        q2_opt=opt("q2_opt", "q2_opt_step"),
        qint_opt=opt("qint_opt", "qint_opt_step"),
        alpha_opt={"m": float(scalars["alpha_m"]), "v": float(scalars["alpha_v"]), "step": int(scalars["alpha_step"])},
        updates=int(scalars["updates"]),
    )
