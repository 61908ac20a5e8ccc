"""Command-line interface.

Subcommands: train, evaluate, verify-bound, heatmap, record-demos, serve.
Output root comes from --out or the GUARDRL_OUT_ROOT environment variable
(default ./runs).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np


def _out_root(args) -> Path:
    return Path(args.out or os.environ.get("GUARDRL_OUT_ROOT", "runs"))


def _load_config(args):
    from guardrl.harness.config import RunConfig, desk_profile

    if args.config:
        cfg = RunConfig.load(args.config)
    else:
        cfg = desk_profile()
    if getattr(args, "mode", None):
        cfg = cfg.with_mode(args.mode)
    if getattr(args, "seed", None) is not None:
        from dataclasses import replace

        cfg = replace(cfg, seed=args.seed)
    if getattr(args, "steps", None) is not None:
        from dataclasses import replace

        cfg = replace(cfg, total_steps=args.steps)
    return cfg


def cmd_train(args) -> int:
    from guardrl.harness.runner import run

    cfg = _load_config(args)
    out = _out_root(args) / (args.name or cfg.mode)
    art = run(cfg, out)
    print(f"run complete: {art.out_dir}")
    print(f"  test success rate: {art.final_eval.success_rate:.3f}")
    print(f"  mean test return: {art.final_eval.mean_return:.2f}")
    if art.training is not None:
        print(f"  total training safety violations: {art.training.total_violations}")
    return 0


def cmd_evaluate(args) -> int:
    from guardrl.harness.config import RunConfig
    from guardrl.harness.evaluate import evaluate_learner
    from guardrl.harness.runner import build_maps
    from guardrl.learner.core import load_learner

    cfg = RunConfig.load(args.config) if args.config else _load_config(args)
    learner = load_learner(args.checkpoint)
    maps = build_maps(cfg.test_map_seeds, cfg.difficulty, cfg.lane_width)
    res = evaluate_learner(learner, maps, cfg.env, args.episodes)
    if args.csv:
        res.save_csv(args.csv)
    print(f"maps={len(maps)} episodes/map={args.episodes}")
    print(f"success_rate={res.success_rate:.3f} mean_return={res.mean_return:.2f} mean_safety_violation={res.mean_safety_violation:.3f}")
    return 0


def cmd_verify_bound(args) -> int:
    from guardrl.bound import verify_bound, write_risk_csv
    from guardrl.guardian.noise import NoiseConfig
    from guardrl.harness.runner import build_maps, make_guardian

    cfg = _load_config(args)
    maps = build_maps(cfg.train_map_seeds, cfg.difficulty, cfg.lane_width)
    pairs = [tuple(float(x) for x in s.split(",")) for s in args.noise]
    configs = [NoiseConfig(eps, kap, seed=cfg.seed + 7 * i) for i, (eps, kap) in enumerate(pairs)]
    reports = verify_bound(
        lambda: make_guardian(cfg),
        configs,
        maps,
        cfg.env,
        gamma=cfg.train.gamma,
        n_episodes=args.episodes,
        seed=cfg.seed,
    )
    for r in reports:
        print(
            f"eps={r.noise.epsilon:.2f} kap={r.noise.kappa_lapse:.2f}: "
            f"eps_hat={r.estimate.epsilon_hat:.4f} kappa_hat={r.estimate.kappa_hat:.4f} "
            f"k_prime={r.estimate.k_prime_hat:.2f} bound={r.bound:.3f} "
            f"measured={r.empirical:.3f}+-{r.half_width:.3f} pass={r.passed}"
        )
    if args.csv:
        write_risk_csv(args.csv, reports)
    return 0 if all(r.passed for r in reports) else 1


def cmd_heatmap(args) -> int:
    from guardrl.env.track import generate_map
    from guardrl.harness.heatmap import export_q_heatmap
    from guardrl.learner.core import load_learner

    cfg = _load_config(args)
    learner = load_learner(args.checkpoint)
    m = generate_map(args.map_seed, cfg.difficulty, cfg.lane_width)
    n = export_q_heatmap(learner, m, cfg.env, args.csv, args.rows, args.cols)
    print(f"wrote {n} cells to {args.csv}")
    return 0


def cmd_record_demos(args) -> int:
    from guardrl.harness.demos import record_demonstrations
    from guardrl.harness.runner import build_maps, make_guardian

    cfg = _load_config(args)
    maps = build_maps(cfg.train_map_seeds, cfg.difficulty, cfg.lane_width)
    n = record_demonstrations(make_guardian(cfg), maps, cfg.env, args.steps, args.path)
    print(f"recorded {n} transitions to {args.path}")
    return 0


def cmd_serve(args) -> int:
    from guardrl.server.web import serve

    cfg = _load_config(args)
    out = _out_root(args) / (args.name or "live-session")
    serve(cfg, out, host=args.host, port=args.port, tick_hz=args.tick_hz)
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    ap = argparse.ArgumentParser(prog="guardrl", description="Guardian-supervised reward-free driving agent")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("train", help="run a training mode end to end")
    p.add_argument("--config", help="RunConfig JSON path (default: desk profile)")
    p.add_argument("--mode", choices=None, help="override config mode")
    p.add_argument("--seed", type=int)
    p.add_argument("--steps", type=int, help="override total env steps")
    p.add_argument("--name", help="run directory name (default: mode)")
    p.add_argument("--out", help="output root (or GUARDRL_OUT_ROOT)")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("evaluate", help="guardian-free evaluation of a checkpoint")
    p.add_argument("checkpoint")
    p.add_argument("--config", help="RunConfig JSON path")
    p.add_argument("--episodes", type=int, default=2)
    p.add_argument("--csv", help="write per-map rows here")
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("verify-bound", help="estimate guardian tolerances and check the risk bound")
    p.add_argument("--config")
    p.add_argument("--noise", nargs="+", default=["0,0", "0.05,0.05", "0.1,0.1"], help="epsilon,kappa pairs")
    p.add_argument("--episodes", type=int, default=200)
    p.add_argument("--csv")
    p.set_defaults(fn=cmd_verify_bound)

    p = sub.add_parser("heatmap", help="export proxy-value heatmap CSV for a map")
    p.add_argument("checkpoint")
    p.add_argument("--config")
    p.add_argument("--map-seed", type=int, default=100)
    p.add_argument("--rows", type=int, default=40)
    p.add_argument("--cols", type=int, default=40)
    p.add_argument("--csv", default="heatmap.csv")
    p.set_defaults(fn=cmd_heatmap)

    p = sub.add_parser("record-demos", help="record expert demonstrations")
    p.add_argument("--config")
    p.add_argument("--steps", type=int, default=10_000)
    p.add_argument("--path", default="demos.jsonl")
    p.set_defaults(fn=cmd_record_demos)

    p = sub.add_parser("serve", help="live copilot session over websocket")
    p.add_argument("--config")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8700)
    p.add_argument("--tick-hz", type=float, default=10.0)
    p.add_argument("--name")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_serve)

    args = ap.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
