"""Run configuration: one JSON-serializable object per experiment."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from guardrl.env.dynamics import EnvParams
from guardrl.env.track import Difficulty
from guardrl.errors import ConfigError
from guardrl.guardian.expert import ExpertParams
from guardrl.guardian.noise import NoiseConfig
from guardrl.guardian.predicate import InterventionParams
from guardrl.learner.core import TrainConfig

MODES = (
    "copilot",  # guardian-protected, reward-free training
    "copilot-sparse-takeover",  # long minimum takeover holds
    "copilot-constant-cost",  # constant +1 intervention cost instead of cosine
    "copilot-no-intervention-penalty",  # drop the intervention value from the policy objective
    "unguarded-rl",  # no guardian, env reward plumbed into the bootstrap target
    "behavior-cloning",  # fit the policy on recorded expert demonstrations
)


@dataclass(frozen=True)
class RunConfig:
    mode: str = "copilot"
    seed: int = 0
    total_steps: int = 30_000
    train_map_seeds: tuple[int, ...] = tuple(range(20))
    test_map_seeds: tuple[int, ...] = tuple(range(100, 120))
    lane_width: float = 8.0
    difficulty: Difficulty = Difficulty()
    env: EnvParams = EnvParams()
    train: TrainConfig = TrainConfig()
    expert: ExpertParams = ExpertParams()
    intervention: InterventionParams = InterventionParams()
    guardian_noise: NoiseConfig = NoiseConfig()
    min_takeover_duration: int = 20  # hold length of a safety takeover burst
    sparse_takeover_duration: int = 80  # only used by copilot-sparse-takeover
    buffer_capacity: int = 50_000
    eval_every_iterations: int = 0  # 0 disables periodic evaluation
    eval_episodes_per_map: int = 1
    zero_reward_channel: bool = False  # probe: feed the learner a zeroed env reward
    demo_steps: int = 10_000  # behavior-cloning dataset size
    bc_epochs: int = 50

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        overlap = set(self.train_map_seeds) & set(self.test_map_seeds)
        if overlap:
            raise ConfigError(f"train/test map seeds overlap: {sorted(overlap)}")
        if self.total_steps <= self.train.steps_before_learning:
            raise ConfigError("total_steps must exceed steps_before_learning")

    def to_json(self) -> str:
        doc = asdict(self)
        doc["format"] = "guardrl-run-config"
        doc["version"] = 1
        return json.dumps(doc, sort_keys=True, indent=1)

    def config_hash(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        doc = json.loads(text)
        if doc.pop("format", None) != "guardrl-run-config" or doc.pop("version", None) != 1:
            raise ConfigError("not a version-1 run config document")
        doc["train_map_seeds"] = tuple(doc["train_map_seeds"])
        doc["test_map_seeds"] = tuple(doc["test_map_seeds"])
        doc["difficulty"] = _load_nested(Difficulty, doc["difficulty"])
        doc["env"] = _load_nested(EnvParams, doc["env"])
        doc["train"] = _load_nested(TrainConfig, doc["train"])
        doc["expert"] = _load_nested(ExpertParams, doc["expert"])
        doc["intervention"] = _load_nested(InterventionParams, doc["intervention"])
        doc["guardian_noise"] = _load_nested(NoiseConfig, doc["guardian_noise"])
        return cls(**doc)

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        return cls.from_json(Path(path).read_text())

    def with_mode(self, mode: str) -> "RunConfig":
        return replace(self, mode=mode)


def _load_nested(cls, doc: dict):
    fixed = {}
    for k, v in doc.items():
        fixed[k] = tuple(v) if isinstance(v, list) else v
    return cls(**fixed)


def desk_profile(**overrides) -> RunConfig:
    """Defaults used by the shipped desk-scale experiments.

    Differences from the library defaults, all measured (see the repo's run
    notes): smaller nets and half the gradient steps for CPU budget; the
    conservative weight rescaled to the reference batch ratio (10/1024 per
    sample -> 2.5 at batch 256); target entropy 0 so the entropy term in the
    bootstrap target carries no standing annuity.
    """
    train = TrainConfig(
        hidden=(128, 128),
        gradient_steps_per_iteration=25,
        conservative_weight=10.0,
        conservative_margin=8.0,
        target_entropy=0.8,
    )
    base = RunConfig(train=train, eval_every_iterations=20)
    return replace(base, **overrides) if overrides else base
