"""Harness: config round-trips, mode isolation, evaluation, exports, demos, BC, CLI."""

import json

import numpy as np
import pytest

from guardrl.env import Difficulty, EnvParams, generate_map
from guardrl.errors import ConfigError
from guardrl.harness import (
    MODES,
    RunConfig,
    build_maps,
    desk_profile,
    evaluate_learner,
    evaluate_policy,
    export_q_heatmap,
    feasible_seeds,
    load_demonstrations,
    make_guardian,
    record_demonstrations,
    run,
)
from guardrl.harness.baselines import bc_loss_and_grads, fit_behavior_cloning
from guardrl.learner import TrainConfig, load_learner, make_learner
from guardrl.numeric import flatten_params


def tiny_cfg(mode="copilot", **kw):
    base = dict(
        mode=mode,
        seed=1,
        total_steps=420,
        train_map_seeds=(0, 1),
        test_map_seeds=(100, 101),
        difficulty=Difficulty(min_segments=2, max_segments=2, obstacle_density=0.01),
        env=EnvParams(horizon=120),
        train=TrainConfig(
            hidden=(12, 12),
            batch_size=16,
            steps_before_learning=50,
            env_steps_per_iteration=100,
            gradient_steps_per_iteration=4,
            target_entropy=0.0,
        ),
        eval_episodes_per_map=1,
        demo_steps=300,
        bc_epochs=3,
    )
    base.update(kw)
    return RunConfig(**base)


class TestConfig:
    def test_json_round_trip(self):
        cfg = tiny_cfg()
        cfg2 = RunConfig.from_json(cfg.to_json())
        assert cfg2 == cfg
        assert cfg2.config_hash() == cfg.config_hash()

    def test_unknown_mode_rejected(self):
        with pytest.raises(ConfigError):
            tiny_cfg(mode="nonsense")

    def test_overlapping_seed_lists_rejected(self):
        with pytest.raises(ConfigError):
            tiny_cfg(train_map_seeds=(0, 1), test_map_seeds=(1, 2))

    def test_too_few_steps_rejected(self):
        with pytest.raises(ConfigError):
            tiny_cfg(total_steps=10)

    def test_all_modes_constructible(self):
        for m in MODES:
            assert tiny_cfg(mode=m).mode == m

    def test_desk_profile_valid(self):
        cfg = desk_profile()
        assert cfg.mode == "copilot"
        assert cfg.train.hidden == (128, 128)


class TestFeasibleSeeds:
    def test_expert_completes_selected_maps(self):
        cfg = tiny_cfg()
        g = make_guardian(cfg)
        seeds = feasible_seeds(range(40), cfg.difficulty, cfg.lane_width, cfg.env, g, need=4)
        assert len(seeds) == 4


class TestRunModes:
    @pytest.mark.parametrize("mode", ["copilot", "copilot-constant-cost", "copilot-no-intervention-penalty"])
    def test_copilot_variants_produce_artifacts(self, tmp_path, mode):
        art = run(tiny_cfg(mode=mode), tmp_path / mode)
        assert art.checkpoint.exists()
        assert art.metrics_csv.exists()
        assert art.eval_csv.exists()
        header = art.metrics_csv.read_text().splitlines()[0]
        assert header.startswith("env_step,episode,")
        assert art.training.total_env_steps == 420

    def test_unguarded_mode_runs_and_uses_reward(self, tmp_path):
        art = run(tiny_cfg(mode="unguarded-rl"), tmp_path / "rl")
        assert art.training.buffer.reward is not None
        # no guardian: zero takeover everywhere
        assert all(e.takeover_steps == 0 for e in art.training.episodes)

    def test_copilot_buffer_is_reward_free(self, tmp_path):
        art = run(tiny_cfg(), tmp_path / "c")
        assert art.training.buffer.reward is None

    def test_behavior_cloning_mode(self, tmp_path):
        art = run(tiny_cfg(mode="behavior-cloning"), tmp_path / "bc")
        assert art.checkpoint.exists()
        learner = load_learner(art.checkpoint)
        assert learner.obs_dim > 0

    def test_existing_nonempty_dir_rejected(self, tmp_path):
        d = tmp_path / "x"
        d.mkdir()
        (d / "junk").write_text("!")
        with pytest.raises(ConfigError):
            run(tiny_cfg(), d)

    def test_same_seed_bitwise_identical_outputs(self, tmp_path):
        a = run(tiny_cfg(), tmp_path / "a")
        b = run(tiny_cfg(), tmp_path / "b")
        assert a.metrics_csv.read_bytes() == b.metrics_csv.read_bytes()
        assert a.checkpoint.read_bytes() == b.checkpoint.read_bytes()

    def test_never_intervening_guardian_matches_reward_free_unguarded(self, tmp_path):
        """copilot with a never-firing guardian == unguarded minus the reward channel."""
        from guardrl.env.sim import DrivingEnv, observation_dim
        from guardrl.guardian import NeverGuardian
        from guardrl.learner import run_training

        cfg = tiny_cfg()
        maps = build_maps(cfg.train_map_seeds, cfg.difficulty, cfg.lane_width)

        def one(guardian, use_reward):
            env = DrivingEnv(cfg.env)
            learner = make_learner(np.random.default_rng([cfg.seed, 0x11]), observation_dim(cfg.env), 2, cfg.train)
            run_training(
                env, maps, guardian, learner, cfg.train, total_steps=cfg.total_steps, seed=cfg.seed,
                use_reward=use_reward,
            )
            return learner

        l1 = one(NeverGuardian(), False)
        l2 = one(None, True)
        # identical trajectories; parameters differ only through the reward term,
        # which the comparison isolates by zeroing rewards in the buffer
        env = None
        l3 = one(None, False)  # unguarded but reward ignored in targets
        assert np.array_equal(flatten_params(l1.policy), flatten_params(l3.policy))
        assert np.array_equal(flatten_params(l1.q1), flatten_params(l3.q1))


class TestEvaluate:
    @pytest.fixture(scope="class")
    def test_maps(self):
        return build_maps((100, 101), Difficulty(min_segments=2, max_segments=2), 8.0)

    def test_expert_checkpoint_succeeds(self, test_maps):
        # expert-as-policy: success near 1 on feasible maps
        from guardrl.env.sim import DrivingEnv

        cfg = tiny_cfg()
        g = make_guardian(cfg)
        env = DrivingEnv(EnvParams())

        def expert_policy_eval(m):
            obs = env.reset(m)
            while env.active:
                sr = env.step(g.expert(m, env.state))
            return sr.success

        assert all(expert_policy_eval(m) for m in test_maps)

    def test_zero_action_policy_metrics(self, test_maps):
        res = evaluate_policy(lambda obs: np.zeros(2), test_maps, EnvParams(horizon=60), 1)
        assert res.success_rate == 0.0
        assert res.mean_return == pytest.approx(0.0, abs=1e-9)
        assert res.mean_safety_violation == 0.0

    def test_random_policy_near_zero_success(self, test_maps):
        rng = np.random.default_rng(0)
        res = evaluate_policy(lambda obs: rng.uniform(-1, 1, 2), test_maps, EnvParams(horizon=120), 2)
        assert res.success_rate <= 0.25

    def test_csv_rows_match_aggregates(self, test_maps, tmp_path):
        res = evaluate_policy(lambda obs: np.zeros(2), test_maps, EnvParams(horizon=40), 2)
        assert len(res.rows) == 4
        path = tmp_path / "eval.csv"
        res.save_csv(path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "map_seed,episode,return,safety_violation,success"
        assert len(lines) == 5
        assert res.interventions == 0


class TestHeatmap:
    def test_grid_row_count_and_finiteness(self, tmp_path):
        cfg = tiny_cfg()
        learner = make_learner(np.random.default_rng(0), 32, 2, TrainConfig(hidden=(8, 8)))
        m = generate_map(100, cfg.difficulty)
        path = tmp_path / "hm.csv"
        n = export_q_heatmap(learner, m, EnvParams(), path, grid_rows=7, grid_cols=9)
        assert n == 63
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "x,y,q_value,policy_steer,policy_throttle"
        assert len(lines) == 64
        vals = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
        assert np.all(np.isfinite(vals))

    def test_zeroed_q_network_constant_heatmap(self, tmp_path):
        learner = make_learner(np.random.default_rng(0), 32, 2, TrainConfig(hidden=(8, 8)))
        for ps in (learner.q1, learner.q2):
            for w in ps.weights:
                w[...] = 0.0
            for b in ps.biases:
                b[...] = 0.0
        m = generate_map(101, Difficulty(min_segments=2, max_segments=2))
        path = tmp_path / "hm0.csv"
        export_q_heatmap(learner, m, EnvParams(), path, grid_rows=5, grid_cols=5)
        qs = {ln.split(",")[2] for ln in path.read_text().strip().splitlines()[1:]}
        assert len(qs) == 1


class TestDemos:
    def test_zero_steps_header_only(self, tmp_path):
        cfg = tiny_cfg()
        g = make_guardian(cfg)
        maps = build_maps(cfg.train_map_seeds, cfg.difficulty, cfg.lane_width)
        path = tmp_path / "d.jsonl"
        n = record_demonstrations(g, maps, cfg.env, 0, path)
        assert n == 0
        lines = path.read_text().splitlines()
        assert len(lines) == 1
        assert json.loads(lines[0])["format"] == "guardrl-demos"

    def test_row_count_and_determinism(self, tmp_path):
        cfg = tiny_cfg()
        maps = build_maps(cfg.train_map_seeds, cfg.difficulty, cfg.lane_width)
        p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        n1 = record_demonstrations(make_guardian(cfg), maps, cfg.env, 250, p1)
        n2 = record_demonstrations(make_guardian(cfg), maps, cfg.env, 250, p2)
        assert n1 == n2 == 250
        assert p1.read_bytes() == p2.read_bytes()
        obs, act = load_demonstrations(p1)
        assert obs.shape[0] == 250 and act.shape == (250, 2)


class TestBehaviorCloning:
    def test_bc_gradient_matches_finite_differences(self):
        from helpers import finite_difference_grad, relative_error
        import copy

        rng = np.random.default_rng(0)
        learner = make_learner(rng, 6, 2, TrainConfig(hidden=(8, 8), activation="tanh"))
        obs = rng.normal(size=(12, 6))
        acts = rng.uniform(-0.9, 0.9, size=(12, 2))
        _, grads = bc_loss_and_grads(learner, obs, acts)

        def loss_fn(ps):
            l2 = copy.copy(learner)
            l2.policy = ps
            return bc_loss_and_grads(l2, obs, acts)[0]

        fd = finite_difference_grad(loss_fn, learner.policy)
        assert relative_error(grads, fd) < 1e-6

    def test_bc_loss_decreases(self):
        rng = np.random.default_rng(1)
        obs = rng.normal(size=(200, 6))
        acts = np.tanh(obs[:, :2])  # learnable mapping
        _, losses = fit_behavior_cloning(obs, acts, TrainConfig(hidden=(16, 16), batch_size=32, learning_rate=3e-3), seed=0, epochs=12)
        assert losses[-1] < losses[0]


class TestCli:
    def test_cli_train_and_evaluate(self, tmp_path):
        from guardrl.harness.cli import main

        cfg = tiny_cfg()
        cfg_path = tmp_path / "cfg.json"
        cfg.save(cfg_path)
        rc = main(["train", "--config", str(cfg_path), "--name", "t", "--out", str(tmp_path / "runs")])
        assert rc == 0
        ck = tmp_path / "runs" / "t" / "checkpoint.bin"
        assert ck.exists()
        rc = main(["evaluate", str(ck), "--config", str(cfg_path), "--episodes", "1"])
        assert rc == 0
        rc = main(["heatmap", str(ck), "--config", str(cfg_path), "--map-seed", "100", "--rows", "4", "--cols", "4", "--csv", str(tmp_path / "h.csv")])
        assert rc == 0
