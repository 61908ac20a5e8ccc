"""Experiment runner: builds components per mode, executes, persists artifacts.

Artifacts per run directory:
    config.json    the exact RunConfig
    metrics.csv    one row per training episode (schema in metrics.py)
    eval.csv       final guardian-free evaluation on the test maps
    eval_during.csv  periodic evaluations when enabled
    checkpoint.bin final learner state
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from guardrl.env.dynamics import EnvParams
from guardrl.env.sim import DrivingEnv, observation_dim
from guardrl.env.track import Difficulty, MapSpec, generate_map
from guardrl.errors import ConfigError
from guardrl.guardian.base import Guardian, ScriptedGuardian, StallNudge
from guardrl.guardian.noise import apply_noise
from guardrl.harness.baselines import fit_behavior_cloning
from guardrl.harness.config import RunConfig
from guardrl.harness.demos import load_demonstrations, record_demonstrations
from guardrl.harness.evaluate import EvalResult, evaluate_learner
from guardrl.harness.metrics import METRICS_COLUMNS, CsvWriter
from guardrl.learner.core import LearnerState, make_learner, save_learner
from guardrl.learner.loop import TrainingResult, run_training

log = logging.getLogger(__name__)


@dataclass
class RunArtifacts:
    config: RunConfig
    out_dir: Path
    checkpoint: Path
    metrics_csv: Path
    eval_csv: Path
    final_eval: EvalResult
    training: TrainingResult | None = None
    eval_history: list[tuple[int, float]] = field(default_factory=list)  # (env_step, success_rate)
    best_checkpoint: Path | None = None
    best_eval_success: float = 0.0
    best_eval_step: int = 0

    @property
    def reached_success(self) -> float:
        """Best test success rate observed at any evaluation during or after the run."""
        return max(self.best_eval_success, self.final_eval.success_rate)


class ZeroRewardEnv(DrivingEnv):
    """Reward channel replaced by zeros; everything else untouched."""

    def step(self, action):
        sr = super().step(action)
        sr.reward = 0.0
        return sr


def build_maps(seeds, difficulty: Difficulty, lane_width: float) -> list[MapSpec]:
    return [generate_map(s, difficulty, lane_width) for s in seeds]


def feasible_seeds(
    candidate_seeds,
    difficulty: Difficulty,
    lane_width: float,
    env_params: EnvParams,
    guardian: Guardian,
    need: int,
) -> list[int]:
    """First `need` seeds whose map the scripted expert completes unaided.

    Keeps the guardian's action error rate small by construction; seeds the
    expert fails are dropped (resampled from the candidate stream).
    """
    env = DrivingEnv(env_params)
    out = []
    for seed in candidate_seeds:
        m = generate_map(seed, difficulty, lane_width)
        obs = env.reset(m)
        ok = False
        for _ in range(env_params.horizon):
            sr = env.step(guardian.expert(m, env.state))
            if sr.terminal:
                ok = sr.success and sr.env_cost == 0
                break
        if ok:
            out.append(seed)
        if len(out) >= need:
            return out
    raise ConfigError(f"only {len(out)} of {need} requested feasible maps found")


def make_guardian(cfg: RunConfig) -> Guardian:
    base = ScriptedGuardian(
        cfg.env,
        expert_params=cfg.expert,
        intervention_params=cfg.intervention,
        min_takeover_duration=(
            cfg.sparse_takeover_duration if cfg.mode == "copilot-sparse-takeover" else cfg.min_takeover_duration
        ),
        stall=StallNudge(),
    )
    return apply_noise(base, cfg.guardian_noise)


def run(cfg: RunConfig, out_dir: str | Path) -> RunArtifacts:
    out = Path(out_dir)
    if out.exists() and any(out.iterdir()):
        raise ConfigError(f"output directory {out} exists and is not empty")
    out.mkdir(parents=True, exist_ok=True)
    cfg.save(out / "config.json")

    train_maps = build_maps(cfg.train_map_seeds, cfg.difficulty, cfg.lane_width)
    test_maps = build_maps(cfg.test_map_seeds, cfg.difficulty, cfg.lane_width)

    if cfg.mode == "behavior-cloning":
        return _run_bc(cfg, out, train_maps, test_maps)

    env = ZeroRewardEnv(cfg.env) if cfg.zero_reward_channel else DrivingEnv(cfg.env)
    learner = make_learner(np.random.default_rng([cfg.seed, 0x11]), observation_dim(cfg.env), 2, cfg.train)
    guardian = None if cfg.mode == "unguarded-rl" else make_guardian(cfg)
    use_reward = cfg.mode == "unguarded-rl"
    use_qint = cfg.mode != "copilot-no-intervention-penalty"
    constant_cost = cfg.mode == "copilot-constant-cost"

    metrics_path = out / "metrics.csv"
    eval_during_path = out / "eval_during.csv"
    best_path = out / "checkpoint_best.bin"
    eval_history: list[tuple[int, float]] = []
    best = {"success": -1.0, "step": 0}
    cum_viol = 0
    last_diag: dict = {}
    iter_count = 0

    with CsvWriter(metrics_path, METRICS_COLUMNS) as metrics, open(eval_during_path, "w") as evals:
        evals.write("env_step,success_rate,mean_return,mean_safety_violation\n")

        def on_episode(ep):
            nonlocal cum_viol
            cum_viol += ep.env_violations
            metrics.write(
                {
                    "env_step": ep.env_step_end,
                    "episode": ep.episode,
                    "map_seed": ep.map_seed,
                    "episode_steps": ep.steps,
                    "takeover_rate": ep.takeover_rate,
                    "episodic_intervention_cost": ep.intervention_cost,
                    "cumulative_env_safety_violations": cum_viol,
                    "success": ep.success,
                    "out_of_road": ep.out_of_road,
                    "proxy_q_loss": last_diag.get("proxy_q_loss", float("nan")),
                    "qint_loss": last_diag.get("qint_loss", float("nan")),
                    "policy_loss": last_diag.get("policy_loss", float("nan")),
                    "alpha": last_diag.get("alpha", float("nan")),
                    "entropy": last_diag.get("entropy", float("nan")),
                    "q_gap": last_diag.get("q_gap", float("nan")),
                }
            )

        def on_iteration(diag, lr):
            nonlocal last_diag, iter_count
            if diag.get("status") == "ok":
                last_diag = diag
            iter_count += 1
            if cfg.eval_every_iterations and iter_count % cfg.eval_every_iterations == 0:
                res = evaluate_learner(lr, test_maps, cfg.env, cfg.eval_episodes_per_map)
                eval_history.append((diag.get("env_step", 0), res.success_rate))
                evals.write(
                    f"{diag.get('env_step', 0)},{res.success_rate:.6f},{res.mean_return:.6f},{res.mean_safety_violation:.6f}\n"
                )
                evals.flush()
                if res.success_rate > best["success"]:
                    best["success"] = res.success_rate
                    best["step"] = diag.get("env_step", 0)
                    save_learner(lr, best_path, cfg.config_hash(), meta={"mode": cfg.mode, "env_steps": best["step"], "best": True})

        training = run_training(
            env,
            train_maps,
            guardian,
            learner,
            cfg.train,
            total_steps=cfg.total_steps,
            seed=cfg.seed,
            buffer_capacity=cfg.buffer_capacity,
            constant_cost=constant_cost,
            use_qint=use_qint,
            use_reward=use_reward,
            on_episode=on_episode,
            on_iteration=on_iteration,
        )

    checkpoint = out / "checkpoint.bin"
    save_learner(learner, checkpoint, cfg.config_hash(), meta={"mode": cfg.mode, "env_steps": training.total_env_steps})
    final_eval = evaluate_learner(learner, test_maps, cfg.env, cfg.eval_episodes_per_map)
    eval_csv = out / "eval.csv"
    final_eval.save_csv(eval_csv)
    log.info(
        "run %s done: success=%.2f violations=%d",
        cfg.mode,
        final_eval.success_rate,
        training.total_violations,
    )
    return RunArtifacts(
        config=cfg,
        out_dir=out,
        checkpoint=checkpoint,
        metrics_csv=metrics_path,
        eval_csv=eval_csv,
        final_eval=final_eval,
        training=training,
        eval_history=eval_history,
        best_checkpoint=best_path if best_path.exists() else None,
        best_eval_success=max(best["success"], 0.0),
        best_eval_step=best["step"],
    )


def _run_bc(cfg: RunConfig, out: Path, train_maps, test_maps) -> RunArtifacts:
    demo_path = out / "demos.jsonl"
    guardian = make_guardian(cfg)
    record_demonstrations(guardian, train_maps, cfg.env, cfg.demo_steps, demo_path)
    obs, acts = load_demonstrations(demo_path)
    learner, losses = fit_behavior_cloning(obs, acts, cfg.train, cfg.seed, epochs=cfg.bc_epochs)
    checkpoint = out / "checkpoint.bin"
    save_learner(learner, checkpoint, cfg.config_hash(), meta={"mode": cfg.mode, "bc_final_loss": losses[-1]})
    final_eval = evaluate_learner(learner, test_maps, cfg.env, cfg.eval_episodes_per_map)
    eval_csv = out / "eval.csv"
    final_eval.save_csv(eval_csv)
    metrics_path = out / "metrics.csv"
    with CsvWriter(metrics_path, METRICS_COLUMNS):
        pass  # BC has no guarded episodes; file carries the schema header only
    return RunArtifacts(
        config=cfg,
        out_dir=out,
        checkpoint=checkpoint,
        metrics_csv=metrics_path,
        eval_csv=eval_csv,
        final_eval=final_eval,
    )
