"""Guardian: scripted expert, intervention predicate, noise models, tolerance."""

from guardrl.guardian.base import (
    AlwaysGuardian,
    Guardian,
    GuardianDecision,
    NeverGuardian,
    ScriptedGuardian,
    StallNudge,
    behavior_mixture,
    guarded_step,
)
from guardrl.guardian.expert import ExpertParams, expert_action
from guardrl.guardian.noise import NoiseConfig, NoisyGuardian, apply_noise
from guardrl.guardian.predicate import InterventionParams, flag_actions, should_intervene
from guardrl.guardian.tolerance import (
    ACTION_VOLUME,
    ToleranceEstimate,
    collect_states,
    estimate_tolerance,
    write_tolerance_csv,
)

__all__ = [
    "ACTION_VOLUME",
    "AlwaysGuardian",
    "ExpertParams",
    "Guardian",
    "GuardianDecision",
    "InterventionParams",
    "NeverGuardian",
    "NoiseConfig",
    "NoisyGuardian",
    "ScriptedGuardian",
    "StallNudge",
    "ToleranceEstimate",
    "apply_noise",
    "behavior_mixture",
    "collect_states",
    "estimate_tolerance",
    "expert_action",
    "flag_actions",
    "guarded_step",
    "should_intervene",
    "write_tolerance_csv",
]
