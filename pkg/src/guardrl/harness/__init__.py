"""Experiment orchestration: configs, runs, evaluation, exports, CLI."""

from guardrl.harness.baselines import bc_loss_and_grads, fit_behavior_cloning
from guardrl.harness.config import MODES, RunConfig, desk_profile
from guardrl.harness.demos import load_demonstrations, record_demonstrations
from guardrl.harness.evaluate import EvalResult, evaluate_learner, evaluate_policy
from guardrl.harness.heatmap import export_q_heatmap
from guardrl.harness.metrics import EVAL_COLUMNS, METRICS_COLUMNS, CsvWriter
from guardrl.harness.runner import RunArtifacts, build_maps, feasible_seeds, make_guardian, run

__all__ = [
    "EVAL_COLUMNS",
    "EvalResult",
    "METRICS_COLUMNS",
    "MODES",
    "CsvWriter",
    "RunArtifacts",
    "RunConfig",
    "bc_loss_and_grads",
    "build_maps",
    "desk_profile",
    "evaluate_learner",
    "evaluate_policy",
    "export_q_heatmap",
    "feasible_seeds",
    "fit_behavior_cloning",
    "load_demonstrations",
    "make_guardian",
    "record_demonstrations",
    "run",
]
