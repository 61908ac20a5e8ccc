"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Criteria 6-12 share four full desk-scale training runs (plus a repeat and a
zero-reward probe) through module-scoped fixtures; expect the whole module to
take on the order of an hour on a commodity CPU. Run just this file with
`pytest tests/test_acceptance.py -v -s`.
"""

import copy
import json
from dataclasses import replace

import numpy as np
import pytest

import guardrl.learner.costs as costs
from guardrl.bound import BoundInputs, risk_bound, verify_bound
from guardrl.env import Difficulty, DrivingEnv, EnvParams, generate_map
from guardrl.guardian import NoiseConfig, ScriptedGuardian
from guardrl.harness import build_maps, desk_profile, make_guardian, run
from guardrl.learner import (
    TrainConfig,
    load_learner,
    make_learner,
    policy_loss_and_grads,
    proxy_q_loss_and_grads,
    proxy_q_target,
    q_gap,
    qint_loss_and_grads,
    qint_target,
    rising_edge_cost,
)
from guardrl.learner.core import act
from guardrl.numeric.gaussian import LOG_STD_MAX, LOG_STD_MIN

from helpers import finite_difference_grad, random_batch, relative_error


def report(criterion: int, description: str, passed: bool, detail: str = "") -> None:
    status = "PASS" if passed else "FAIL"
    print(f"\nACCEPTANCE {criterion:>2}: {status} - {description}" + (f" ({detail})" if detail else ""))
    assert passed, f"criterion {criterion}: {description} ({detail})"


# ---------------------------------------------------------------- criteria 1-4


def test_criterion_1_cosine_cost_exactness():
    cases = [
        (np.array([1.0, 0.0]), np.array([1.0, 0.0]), 0.0),
        (np.array([1.0, 0.0]), np.array([-1.0, 0.0]), 2.0),
        (np.array([1.0, 0.0]), np.array([0.0, 1.0]), 1.0),
        (np.array([0.6, 0.8]), np.array([1.0, 0.0]), 0.4),
    ]
    worst = max(abs(costs.intervention_cost(a, h) - want) for a, h, want in cases)
    report(1, "cosine intervention cost exact on the four canonical pairs", worst <= 1e-12, f"worst abs err {worst:.2e}")


def test_criterion_2_rising_edge_rule():
    rng = np.random.default_rng(2024)
    checked = 0
    ok = True
    for _ in range(100_000 // 20):
        seq = rng.uniform(size=20) < rng.uniform(0.1, 0.9)
        prev = False
        for i, now in enumerate(seq):
            cost = rising_edge_cost(bool(now), prev, 1.3)
            is_edge = bool(now) and not prev
            if (cost > 0) != is_edge:
                ok = False
            prev = bool(now)
            checked += 1
    report(2, "rising-edge cost on exactly the first step of every takeover run", ok, f"{checked} steps checked")


def _well_conditioned(learner, batch, cfg, rng) -> bool:
    """FD oracle guard: reject configs where the loss is non-smooth within the
    FD step (twin near-ties or log-std at its clamp)."""
    from guardrl.learner.losses import _policy_sample, _qx
    from guardrl.numeric.mlp import forward

    out, _, _ = _policy_sample(learner, batch["obs"], np.random.default_rng(rng))
    x = _qx(batch["obs"], out.action)
    q1 = forward(learner.q1, x)[:, 0]
    q2 = forward(learner.q2, x)[:, 0]
    if np.min(np.abs(q1 - q2)) < 1e-4:
        return False
    raw = forward(learner.policy, batch["obs"])
    d = raw.shape[1] // 2
    log_std_raw = raw[:, d:]
    if np.min(np.abs(log_std_raw - LOG_STD_MIN)) < 1e-4 or np.min(np.abs(log_std_raw - LOG_STD_MAX)) < 1e-4:
        return False
    return True


def test_criterion_3_gradient_fidelity():
    cfg = TrainConfig(hidden=(8, 8), activation="tanh")
    obs_dim = 5
    n_configs = 0
    worst = 0.0
    seed = 0
    while n_configs < 100:
        seed += 1
        learner = make_learner(np.random.default_rng([seed, 1]), obs_dim, 2, cfg)
        rng = np.random.default_rng([seed, 2])
        for ps in (learner.q1, learner.q2, learner.qint, learner.policy):
            for w in ps.weights:
                w += 0.3 * rng.normal(size=w.shape)
        learner.q1_target = learner.q1.copy()
        learner.q2_target = learner.q2.copy()
        learner.log_alpha = float(rng.normal() * 0.3)
        batch = random_batch(rng, 8, obs_dim)
        if not _well_conditioned(learner, batch, cfg, seed):
            continue
        n_configs += 1
        kind = n_configs % 3
        if kind == 0:
            y = proxy_q_target(learner, batch, cfg, np.random.default_rng([seed, 3]))
            _, g, _, _ = proxy_q_loss_and_grads(learner, batch, y, weight=10.0)

            def f(ps, learner=learner, batch=batch, y=y):
                l2 = copy.copy(learner)
                l2.q1 = ps
                return proxy_q_loss_and_grads(l2, batch, y, weight=10.0)[0]

            fd = finite_difference_grad(f, learner.q1, step=1e-6)
        elif kind == 1:
            t = qint_target(learner, batch, cfg, np.random.default_rng([seed, 4]))
            _, g, _ = qint_loss_and_grads(learner, batch, t)

            def f(ps, learner=learner, batch=batch, t=t):
                l2 = copy.copy(learner)
                l2.qint = ps
                return qint_loss_and_grads(l2, batch, t)[0]

            fd = finite_difference_grad(f, learner.qint, step=1e-6)
        else:
            _, g, _ = policy_loss_and_grads(learner, batch, cfg, np.random.default_rng([seed, 5]))

            def f(ps, learner=learner, batch=batch, seed=seed):
                l2 = copy.copy(learner)
                l2.policy = ps
                return policy_loss_and_grads(l2, batch, cfg, np.random.default_rng([seed, 5]))[0]

            fd = finite_difference_grad(f, learner.policy, step=1e-6)
        worst = max(worst, relative_error(g, fd))
    report(3, "analytic gradients match central differences over 100 configs", worst < 1e-4, f"worst rel err {worst:.2e}")


def test_criterion_4_risk_bound_arithmetic_and_monotonicity():
    value = risk_bound(BoundInputs(0.01, 0.05, 2.0, 0.99))
    exact = abs(value - 7.98) <= 1e-9
    grid = {
        "epsilon": [0.0, 0.03, 0.07, 0.15],
        "kappa": [0.0, 0.03, 0.07, 0.15],
        "k_prime": [0.0, 1.0, 2.5, 4.0],
        "gamma": [0.5, 0.9, 0.95, 0.99],
    }
    monotone = True
    import itertools

    points = list(itertools.product(grid["epsilon"], grid["kappa"], grid["k_prime"], grid["gamma"]))
    vals = {pt: risk_bound(BoundInputs(*pt)) for pt in points}
    for pt in points:
        for axis in range(4):
            for alt in grid[list(grid)[axis]]:
                if alt > pt[axis]:
                    up = list(pt)
                    up[axis] = alt
                    if vals[tuple(up)] < vals[pt] - 1e-12:
                        monotone = False
    report(4, "risk bound arithmetic (7.98) and monotone on a 4^4 grid", exact and monotone, f"value {value:.12f}")


# ---------------------------------------------------------------- criterion 5


def test_criterion_5_risk_bound_empirical():
    cfg = desk_profile()
    maps = build_maps(cfg.train_map_seeds, cfg.difficulty, cfg.lane_width)
    noise = [NoiseConfig(0.0, 0.0, seed=11), NoiseConfig(0.05, 0.05, seed=12), NoiseConfig(0.1, 0.1, seed=13)]
    reports = verify_bound(
        lambda: make_guardian(cfg),
        noise,
        maps,
        cfg.env,
        gamma=0.99,
        n_episodes=200,
        n_states=200,
        n_actions=256,
        seed=5,
    )
    ok = True
    details = []
    for r in reports:
        within = r.empirical - r.half_width <= r.bound
        ok = ok and within
        details.append(
            f"(eps={r.noise.epsilon},kap={r.noise.kappa_lapse}): measured {r.empirical:.3f}+-{r.half_width:.3f} vs bound {r.bound:.3f}"
        )
    report(5, "measured discounted failure within the bound for all noise configs", ok, "; ".join(details))


# ------------------------------------------------------- training runs (6-12)


RUN_STEPS = 30_000


@pytest.fixture(scope="module")
def run_cfg():
    return desk_profile(total_steps=RUN_STEPS, seed=20)


@pytest.fixture(scope="module")
def full_run(run_cfg, tmp_path_factory):
    return run(run_cfg, tmp_path_factory.mktemp("acc") / "copilot")


@pytest.fixture(scope="module")
def unguarded_run(run_cfg, tmp_path_factory):
    return run(run_cfg.with_mode("unguarded-rl"), tmp_path_factory.mktemp("acc") / "unguarded")


@pytest.fixture(scope="module")
def ablation_b_run(run_cfg, tmp_path_factory):
    return run(run_cfg.with_mode("copilot-constant-cost"), tmp_path_factory.mktemp("acc") / "abl-b")


@pytest.fixture(scope="module")
def ablation_c_run(run_cfg, tmp_path_factory):
    return run(run_cfg.with_mode("copilot-no-intervention-penalty"), tmp_path_factory.mktemp("acc") / "abl-c")


def test_criterion_6_training_safety(full_run, unguarded_run):
    ours = full_run.training.total_violations
    theirs = unguarded_run.training.total_violations
    ok = theirs > 0 and ours <= 0.10 * theirs
    report(6, "guarded training violations at 30K steps <= 10% of unguarded", ok, f"{ours} vs {theirs}")


def test_criterion_7_sample_efficiency(full_run):
    reached = full_run.reached_success
    report(
        7,
        "test success rate >= 0.7 on 20 unseen maps within the step budget",
        reached >= 0.7,
        f"best {reached:.2f} at step {full_run.best_eval_step}, final {full_run.final_eval.success_rate:.2f}",
    )


def test_criterion_8_takeover_rate_decay(full_run):
    eps = full_run.training.episodes
    dec = max(1, len(eps) // 10)
    first = float(np.mean([e.takeover_rate for e in eps[:dec]]))
    last = float(np.mean([e.takeover_rate for e in eps[-dec:]]))
    ok = last <= 0.5 * first
    report(8, "takeover rate final decile <= half of the first decile", ok, f"first {first:.3f}, last {last:.3f}")


def test_criterion_9_conservative_ordering(full_run, run_cfg):
    learner = load_learner(full_run.checkpoint)
    guardian = make_guardian(run_cfg)
    maps = build_maps(run_cfg.test_map_seeds, run_cfg.difficulty, run_cfg.lane_width)
    env = DrivingEnv(run_cfg.env)
    rng = np.random.default_rng(99)
    obs_list, an_list, ah_list = [], [], []
    ep = 0
    while len(obs_list) < 200 and ep < 400:
        m = maps[ep % len(maps)]
        obs = env.reset(m)
        guardian.reset_episode()
        ep += 1
        while env.active:
            a_n = act(learner, obs, rng)
            d = guardian.decide(m, env.state, a_n)
            if d.intervene:
                obs_list.append(obs)
                an_list.append(a_n)
                ah_list.append(d.expert_action)
            obs = env.step(d.expert_action if d.intervene else a_n).observation
    gap = q_gap(learner, np.array(obs_list), np.array(an_list), np.array(ah_list))
    report(
        9,
        "mean Q(s, expert) - Q(s, agent) > 0 on held-out intervened transitions",
        len(obs_list) >= 200 and gap > 0.0,
        f"gap {gap:.3f} over {len(obs_list)} transitions",
    )


def test_criterion_10_ablations(full_run, ablation_b_run, ablation_c_run):
    full = full_run.reached_success
    b = ablation_b_run.reached_success
    c = ablation_c_run.reached_success
    ok = c <= 0.2 * full and b <= 0.5 * full
    report(10, "ablations degrade: no-penalty <= 0.2x full, constant-cost <= 0.5x full", ok, f"full {full:.2f}, b {b:.2f}, c {c:.2f}")


def test_criterion_11_determinism(full_run, run_cfg, tmp_path_factory):
    repeat = run(run_cfg, tmp_path_factory.mktemp("acc") / "copilot-repeat")
    same_metrics = full_run.metrics_csv.read_bytes() == repeat.metrics_csv.read_bytes()
    same_ckpt = full_run.checkpoint.read_bytes() == repeat.checkpoint.read_bytes()
    report(11, "identical seeds give bitwise-identical metrics CSV and checkpoint", same_metrics and same_ckpt)


def test_criterion_12_reward_free(full_run, run_cfg, tmp_path_factory):
    zeroed = run(
        replace(run_cfg, zero_reward_channel=True),
        tmp_path_factory.mktemp("acc") / "copilot-zero-reward",
    )
    same = full_run.checkpoint.read_bytes() == zeroed.checkpoint.read_bytes()
    report(12, "zeroing the env reward channel leaves the checkpoint bit-identical", same)


# -------------------------------------------------- secondary-facing criteria


def session_cfg():
    return desk_profile(
        total_steps=600,
        seed=31,
        train_map_seeds=(0, 1, 2),
        test_map_seeds=(100,),
        env=EnvParams(horizon=150),
        train=TrainConfig(
            hidden=(16, 16),
            batch_size=32,
            steps_before_learning=80,
            env_steps_per_iteration=100,
            gradient_steps_per_iteration=5,
            target_entropy=0.0,
        ),
    )


def test_criterion_13_session_replay_equivalence(tmp_path):
    from guardrl.numeric import flatten_params
    from guardrl.server import CopilotSession, ScriptedConsole, replay_session

    cfg = session_cfg()
    log = tmp_path / "session.jsonl"
    session = CopilotSession(cfg, log_path=log)
    console = ScriptedConsole(make_guardian(cfg), build_maps(cfg.train_map_seeds, cfg.difficulty, cfg.lane_width), cfg.env)
    frame = session.tick(None)
    for _ in range(599):
        frame = session.tick(console.respond(frame))
    session.close()
    result = replay_session(log, cfg)
    same_buffer = result.buffer.tobytes() == session.buffer.tobytes()
    same_params = all(
        np.array_equal(flatten_params(getattr(result.learner, f)), flatten_params(getattr(session.learner, f)))
        for f in ("policy", "q1", "q2", "q1_target", "q2_target", "qint")
    ) and result.learner.log_alpha == session.learner.log_alpha
    report(13, "recorded session replays to byte-identical buffer and parameters", same_buffer and same_params)


def test_criterion_14_protocol_conformance(tmp_path):
    import jsonschema

    from guardrl.server import FRAME_SCHEMA, INPUT_SCHEMA, CopilotSession, make_input

    cfg = session_cfg()
    session = CopilotSession(cfg, log_path=tmp_path / "s.jsonl")
    rng = np.random.default_rng(7)
    takeover = False
    prev_intervened = False
    violations = []
    frame = session.tick(None)
    for t in range(1, 1000):
        if rng.uniform() < 0.05:
            takeover = not takeover
        msg = make_input(frame["tick"], takeover, float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1)))
        jsonschema.validate(msg, INPUT_SCHEMA)
        frame = session.tick(msg)
        jsonschema.validate(frame, FRAME_SCHEMA)
    session.close()
    n = len(session.buffer)
    exec_actions = np.where(
        session.buffer.intervened[:n, None], session.buffer.act_expert[:n], session.buffer.act_agent[:n]
    )
    in_range = bool(np.all(np.abs(exec_actions) <= 1.0))
    # rising-edge invariant across takeover toggles, episode-aware via the log
    from guardrl.server import read_session_log

    _, entries = read_session_log(tmp_path / "s.jsonl")
    rising_ok = True
    prev = False
    for e in entries:
        edge = e["intervened"] and not prev
        if (e["rising_cost"] > 0) and not edge:
            rising_ok = False
        prev = False if e["episode_done"] else bool(e["intervened"])
    report(14, "1000-tick console session: schemas valid, actions in range, rising edges exact", in_range and rising_ok)
