"""Command line front end: generation, inspection, benches, eval, rendering.

Every subcommand is a thin shell over one library call so scripted use and
programmatic use cannot drift apart.  Commands that take --env also accept
--max-steps, --view-size and --see-through-walls overrides.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import bridge as bridge_mod
from .benchgen import CONFIGS, generate_benchmark, ruleset_stats
from .benchio import Benchmark, file_info, load_benchmark, save_benchmark
from .env import Environment, EnvParams
from .harness import (
    GRID_SIZE_VALUES,
    NUM_RULES_VALUES,
    OraclePolicy,
    bench_scaling,
    bench_throughput,
    evaluate,
    noop_policy,
    random_policy,
    write_csv,
)
from .oracle import validate_solvability
from .registry import make, registered_environments
from .render import render_ascii, render_rgb, write_image
from .rng import fold_in, key_from_seed, randint


def _int_list(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part.strip() != ""]


def _add_env_overrides(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--max-steps", type=int, default=None,
                        help="trial step budget (default: 3*H*W)")
    parser.add_argument("--view-size", type=int, default=None)
    parser.add_argument("--see-through-walls", choices=("true", "false"), default=None)


def _resolve_params(args) -> EnvParams:
    _, params = make(args.env)
    fields = {}
    if args.max_steps is not None:
        fields["max_steps"] = args.max_steps
    if args.view_size is not None:
        fields["view_size"] = args.view_size
    if args.see_through_walls is not None:
        fields["see_through_walls"] = args.see_through_walls == "true"
    return replace(params, **fields) if fields else params


# -- subcommands -------------------------------------------------------------


def cmd_generate(args) -> int:
    config = CONFIGS[args.config]
    if args.seed is not None:
        config = replace(config, random_seed=args.seed)
    rulesets = generate_benchmark(config, args.num)
    benchmark = Benchmark(tuple(rulesets), config_name=args.config, seed=config.random_seed)
    save_benchmark(args.out, benchmark, compress=not args.no_compress)
    size = Path(args.out).stat().st_size
    print(f"wrote {len(rulesets)} {args.config} tasks to {args.out} ({size} bytes)")
    return 0


def _print_stats(benchmark: Benchmark) -> list[tuple[int, int]]:
    hist = ruleset_stats(benchmark.rulesets)
    rows = sorted(hist.items())
    total = benchmark.num_rulesets()
    print(f"tasks: {total}  config: {benchmark.config_name or '?'}  seed: {benchmark.seed}")
    for rules, count in rows:
        print(f"  {rules:3d} rules: {count:7d}  ({100.0 * count / total:5.1f}%)")
    return rows


def cmd_stats(args) -> int:
    benchmark = load_benchmark(args.infile)
    rows = _print_stats(benchmark)
    if args.csv:
        write_csv(args.csv, ("num_rules", "count"), rows)
        print(f"wrote {args.csv}")
    return 0


def cmd_inspect(args) -> int:
    info = file_info(args.infile)
    for key, value in info.items():
        print(f"{key}: {value}")
    _print_stats(load_benchmark(args.infile))
    return 0


def cmd_bench(args) -> int:
    rows = bench_throughput(
        args.env,
        _int_list(args.num_envs),
        num_steps=args.steps,
        repeats=args.repeats,
        workers=args.workers,
        seed=args.seed,
    )
    print("num_envs,steps_per_second")
    for num_envs, sps in rows:
        print(f"{num_envs},{sps:.1f}")
    if args.csv:
        write_csv(args.csv, ("num_envs", "steps_per_second"), rows)
    return 0


def cmd_scaling(args) -> int:
    default_values = {"grid_size": GRID_SIZE_VALUES, "num_rules": NUM_RULES_VALUES}
    values = _int_list(args.values) if args.values else list(default_values[args.axis])
    rows = bench_scaling(
        args.axis,
        values,
        num_envs=args.num_envs,
        num_steps=args.steps,
        repeats=args.repeats,
        workers=args.workers,
        seed=args.seed,
    )
    print(f"{args.axis},steps_per_second")
    for value, sps in rows:
        print(f"{value},{sps:.1f}")
    if args.csv:
        write_csv(args.csv, (args.axis, "steps_per_second"), rows)
    return 0


def cmd_eval(args) -> int:
    env, params = Environment(), _resolve_params(args)
    benchmark = load_benchmark(args.benchmark)
    key = key_from_seed(args.seed)
    count = min(args.sample, benchmark.num_rulesets()) if args.sample else benchmark.num_rulesets()
    tasks = [benchmark.sample_ruleset(fold_in(key, i)) for i in range(count)]
    if args.policy == "random":
        policy = random_policy(fold_in(key, 10_000))
    elif args.policy == "noop":
        policy = noop_policy
    else:
        policy = OraclePolicy(params, node_budget=args.budget)
    report = evaluate(env, params, policy, tasks, num_trials=args.trials, key=key)
    for i, score in enumerate(report.per_task):
        print(f"task {i:3d}: mean return over {args.trials} trials = {score:.4f}")
    print(f"mean: {report.mean:.4f}")
    print(f"p20:  {report.percentile_20:.4f}")
    return 0


def cmd_validate(args) -> int:
    params = _resolve_params(args)
    benchmark = load_benchmark(args.benchmark)
    frac = validate_solvability(
        benchmark, params, args.sample,
        key=key_from_seed(args.seed), node_budget=args.budget, workers=args.workers,
    )
    print(f"solvable: {frac:.4f} of {args.sample} sampled tasks")
    return 0


def cmd_render(args) -> int:
    env, params = Environment(), _resolve_params(args)
    wanted = set(_int_list(args.steps))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    key = key_from_seed(args.seed)
    action_key = fold_in(key, 1)
    ts = env.reset(params, key)
    suffix = ".png" if args.png else ".ppm"
    written = []
    for t in range(max(wanted) + 1 if wanted else 1):
        if t in wanted:
            path = out / f"step_{t:05d}{suffix}"
            write_image(path, render_rgb(ts.state, args.tile_px))
            written.append(path)
            if args.ascii:
                print(f"step {t}:")
                print(render_ascii(ts.state))
        ts = env.step(params, ts, randint(action_key, env.num_actions, t))
        ts = env.auto_reset(params, ts)
    for path in written:
        print(f"wrote {path}")
    return 0


def cmd_trace(args) -> int:
    env, params = Environment(), _resolve_params(args)
    key = key_from_seed(args.seed)
    policy = random_policy(fold_in(key, 1))
    ts = env.reset(params, key)
    actions, observations = [], [ts.observation.tolist()]
    rewards, discounts, step_types = [], [], []
    for t in range(args.steps):
        action = policy(ts, t)
        ts = env.step(params, ts, action)
        actions.append(int(action))
        rewards.append(ts.reward)
        discounts.append(ts.discount)
        step_types.append(int(ts.step_type))
        ts = env.auto_reset(params, ts)
        observations.append(ts.observation.tolist())
    trace = {
        "env": args.env,
        "seed": args.seed,
        "steps": args.steps,
        "view_size": params.view_size,
        "max_steps": params.max_steps,
        "see_through_walls": params.see_through_walls,
        "actions": actions,
        "observations": observations,
        "rewards": rewards,
        "discounts": discounts,
        "step_types": step_types,
    }
    with open(args.out, "w") as fh:
        json.dump(trace, fh)
    print(f"wrote {args.steps}-step trace to {args.out}")
    return 0


def cmd_bridge(args) -> int:
    bridge_mod.serve()
    return 0


def cmd_envs(args) -> int:
    for name in registered_environments():
        print(name)
    return 0


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rulegrid", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a benchmark file")
    p.add_argument("--config", choices=sorted(CONFIGS), required=True)
    p.add_argument("--num", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--no-compress", action="store_true")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("stats", help="rule-count histogram of a benchmark file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("inspect", help="print benchmark file metadata and stats")
    p.add_argument("--in", dest="infile", required=True)
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("bench", help="random-policy throughput by batch size")
    p.add_argument("--env", default="XLand-MiniGrid-R1-9x9")
    p.add_argument("--num-envs", default="1,16,256,4096")
    p.add_argument("--steps", type=int, default=512)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("scaling", help="throughput along a scaling axis")
    p.add_argument("--axis", choices=("grid_size", "num_rules"), required=True)
    p.add_argument("--values", default=None, help="comma list; default per axis")
    p.add_argument("--num-envs", type=int, default=1024)
    p.add_argument("--steps", type=int, default=256)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("eval", help="scripted-policy evaluation on a benchmark")
    p.add_argument("--benchmark", required=True)
    p.add_argument("--policy", choices=("random", "noop", "oracle"), required=True)
    p.add_argument("--trials", type=int, default=25)
    p.add_argument("--env", default="XLand-MiniGrid-R1-9x9")
    p.add_argument("--sample", type=int, default=16, help="tasks to draw (0 = all)")
    p.add_argument("--budget", type=int, default=1_000_000, help="oracle node budget")
    p.add_argument("--seed", type=int, default=0)
    _add_env_overrides(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("validate", help="oracle solvability check of a benchmark")
    p.add_argument("--benchmark", required=True)
    p.add_argument("--env", default="XLand-MiniGrid-R1-9x9")
    p.add_argument("--sample", type=int, default=100)
    p.add_argument("--budget", type=int, default=5_000_000)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    _add_env_overrides(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("render", help="dump frames of a seeded rollout")
    p.add_argument("--env", default="XLand-MiniGrid-R1-9x9")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", default="0", help='step indices, e.g. "0,1,2"')
    p.add_argument("--out", required=True)
    p.add_argument("--tile-px", type=int, default=16)
    p.add_argument("--png", action="store_true", help="PNG output (needs PIL)")
    p.add_argument("--ascii", action="store_true", help="also print ASCII frames")
    _add_env_overrides(p)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("trace", help="write a golden rollout trace as JSON")
    p.add_argument("--env", default="XLand-MiniGrid-R1-9x9")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--out", required=True)
    _add_env_overrides(p)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("bridge", help="serve the JSON line protocol on stdio")
    p.set_defaults(func=cmd_bridge)

    p = sub.add_parser("envs", help="list registered environment names")
    p.set_defaults(func=cmd_envs)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
