"""Guardian: decides per step whether to overwrite the agent's action.

A guardian owns the takeover-hold bookkeeping (`min_takeover_duration` keeps
control for at least that many steps once the predicate fires; 1 gives dense,
predicate-driven takeovers, large values give sparse long takeovers). The
predicate itself stays pure; only the hold counter is episode state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from guardrl.env.dynamics import EgoState, EnvParams
from guardrl.env.sim import DrivingEnv, StepResult
from guardrl.env.track import MapSpec
from guardrl.guardian.expert import ExpertParams, expert_action
from guardrl.guardian.predicate import InterventionParams, flag_actions, should_intervene


@dataclass
class GuardianDecision:
    intervene: bool  # the guardian overrides this step (expert action applied)
    expert_action: np.ndarray | None = None
    action_rejected: bool = False  # the agent's proposal itself was judged bad


@dataclass(frozen=True)
class StallNudge:
    """Takeover trigger for trivial behavior: an agent that dawdles below
    `speed` for `patience` consecutive steps gets chauffeured for `hold` steps.
    While the chauffeur hold lasts and the car is still below `speed`, a
    proposal whose throttle stays under `min_throttle` keeps being judged a
    dawdle (it is what keeps the car slow). Separate from the safety
    predicate, which stays a pure function of (state, action, map)."""

    enabled: bool = True
    speed: float = 3.0  # m/s
    patience: int = 15  # steps
    hold: int = 30  # steps
    min_throttle: float = 0.3
    clear_ttc: float = 2.0  # full dawdle standard only on clear road
    clear_bend: float = 0.25  # radians of lane bend over the lookahead
    crawl_floor: float = 1.0  # near-stops count as dawdling even near hazards


class Guardian:
    """Common hold bookkeeping; subclasses supply the predicate and the expert."""

    def __init__(self, min_takeover_duration: int = 1, stall: StallNudge = StallNudge()):
        if min_takeover_duration < 1:
            raise ValueError("min_takeover_duration must be >= 1")
        self.min_takeover_duration = min_takeover_duration
        self.stall = stall
        self._hold = 0
        self._stall_hold = 0
        self._slow_steps = 0

    def reset_episode(self) -> None:
        self._hold = 0
        self._stall_hold = 0
        self._slow_steps = 0

    def fires(self, m: MapSpec, state: EgoState, agent_action: np.ndarray) -> bool:
        raise NotImplementedError

    def fires_batch(self, m: MapSpec, state: EgoState, actions: np.ndarray) -> np.ndarray:
        return np.array([self.fires(m, state, a) for a in actions], dtype=bool)

    def expert(self, m: MapSpec, state: EgoState) -> np.ndarray:
        raise NotImplementedError

    def decide(self, m: MapSpec, state: EgoState, agent_action: np.ndarray) -> GuardianDecision:
        """Hold continuations keep control without re-judging the agent's
        proposal; action_rejected marks only genuine per-action judgments
        (predicate fire, or a dawdle trigger engaging)."""
        rejected = self.fires(m, state, agent_action)
        if rejected:
            self._hold = max(self._hold, self.min_takeover_duration)
        if self.stall.enabled:
            # near hazards slowing is legitimate, so only near-stops count as
            # dawdling there; on clear road the full cruise standard applies
            clear = self._road_clear(m, state)
            dawdling = state.speed < (self.stall.speed if clear else self.stall.crawl_floor)
            if dawdling:
                self._slow_steps += 1
            else:
                self._slow_steps = 0
            if self._slow_steps >= self.stall.patience:
                self._stall_hold = max(self._stall_hold, self.stall.hold)
                self._slow_steps = 0
                rejected = True
            elif (
                self._stall_hold > 0
                and dawdling
                and float(agent_action[1]) < self.stall.min_throttle
            ):
                rejected = True  # the proposal keeps the dawdle going
        intervene = self._hold > 0 or self._stall_hold > 0
        if intervene:
            self._hold = max(self._hold - 1, 0)
            self._stall_hold = max(self._stall_hold - 1, 0)
            return GuardianDecision(True, self.expert(m, state), rejected)
        return GuardianDecision(False, None, False)

    def _road_clear(self, m: MapSpec, state: EgoState) -> bool:
        """Dawdling only counts where slowing has no legitimate cause: no
        imminent obstacle and no sharp bend in the lane ahead."""
        from guardrl.env.dynamics import time_to_collision
        from guardrl.env.track import point_at, project

        if time_to_collision(m, state, self._clear_car_radius()) < self.stall.clear_ttc:
            return False
        s, _, _, _ = project(m, state.xy)
        _, theta_ahead = point_at(m, s + 8.0)
        _, theta_here = point_at(m, s)
        from guardrl.env.dynamics import wrap_angle

        return abs(wrap_angle(theta_ahead - theta_here)) < self.stall.clear_bend

    def _clear_car_radius(self) -> float:
        return 0.8


class ScriptedGuardian(Guardian):
    """Pure-pursuit expert + lookahead/margin intervention predicate."""

    def __init__(
        self,
        env_params: EnvParams,
        expert_params: ExpertParams = ExpertParams(),
        intervention_params: InterventionParams = InterventionParams(),
        min_takeover_duration: int = 1,
        stall: StallNudge = StallNudge(),
    ):
        super().__init__(min_takeover_duration, stall)
        self.env_params = env_params
        self.expert_params = expert_params
        self.intervention_params = intervention_params

    def fires(self, m, state, agent_action):
        return should_intervene(state, agent_action, m, self.env_params, self.intervention_params)

    def _clear_car_radius(self):
        return self.env_params.car_radius

    def fires_batch(self, m, state, actions):
        return flag_actions(state, np.asarray(actions, dtype=np.float64), m, self.env_params, self.intervention_params)

    def expert(self, m, state):
        return expert_action(state, m, self.env_params, self.expert_params)


class NeverGuardian(Guardian):
    """Test/baseline double: watches but never takes over."""

    def __init__(self):
        super().__init__(1, StallNudge(enabled=False))

    def fires(self, m, state, agent_action):
        return False

    def fires_batch(self, m, state, actions):
        return np.zeros(len(actions), dtype=bool)

    def expert(self, m, state):
        return np.zeros(2)


class AlwaysGuardian(Guardian):
    """Test double: takes over every step, driving with the wrapped expert."""

    def __init__(self, inner: Guardian, min_takeover_duration: int = 1):
        super().__init__(min_takeover_duration, StallNudge(enabled=False))
        self.inner = inner

    def fires(self, m, state, agent_action):
        return True

    def fires_batch(self, m, state, actions):
        return np.ones(len(actions), dtype=bool)

    def expert(self, m, state):
        return self.inner.expert(m, state)


def guarded_step(env: DrivingEnv, guardian: Guardian, agent_action: np.ndarray) -> tuple[StepResult, GuardianDecision, np.ndarray]:
    """One protected environment step: the guardian may overwrite the action.

    Returns (step result, decision, action actually applied).
    """
    decision = guardian.decide(env.map, env.state, agent_action)
    applied = decision.expert_action if decision.intervene else np.asarray(agent_action, dtype=np.float64)
    result = env.step(applied)
    return result, decision, applied


def behavior_mixture(pi_n: np.ndarray, pi_h: np.ndarray, rejected: np.ndarray) -> tuple[np.ndarray, float]:
    """Discrete-action mixing of agent and expert under an intervention set.

    pi_b(a) = pi_n(a) * (1 - rejected(a)) + pi_h(a) * G with G the total agent
    probability mass on rejected actions. Returns (pi_b, G); pi_b sums to 1
    whenever pi_n and pi_h do.
    """
    pi_n = np.asarray(pi_n, dtype=np.float64)
    pi_h = np.asarray(pi_h, dtype=np.float64)
    rej = np.asarray(rejected, dtype=bool)
    g = float(pi_n[rej].sum())
    pi_b = pi_n * (~rej) + pi_h * g
    return pi_b, g
