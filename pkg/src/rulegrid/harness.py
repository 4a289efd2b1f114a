"""Rollout statistics, throughput and scaling benchmarks, trial evaluation.

Three layers of tooling around the engine:

* ``rollout`` drives a single auto-resetting environment and accounts for
  every step, so trial returns and lengths always sum back to the step
  count.
* ``bench_throughput`` and ``bench_scaling`` time the batched stepper under
  a random policy and report steps per second, taking the minimum over
  repeats so one lucky run cannot inflate the number.  An optional process
  pool splits the batch across workers; per-environment keys come from one
  split over the whole batch, so results stay identical for any worker
  count.
* ``evaluate`` scores a policy with a fixed number of fresh trials per
  task and reports the mean and 20th-percentile return across tasks.  Each
  trial runs until its LAST step, so the per-trial budget is
  ``params.step_budget``.
"""

from __future__ import annotations

import csv
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .core import Color, Tile, pack_entity
from .env import Action, Environment, EnvParams, TimeStep
from .errors import BudgetExceeded
from .goals import GoalKind
from .oracle import solve_from
from .registry import make
from .rng import Key, fold_in, key_from_seed, randint, split_batch
from .rules import RuleKind
from .ruleset import Ruleset
from .vecenv import VecEnv

# A policy maps (timestep, global step index) to an action id.
Policy = Callable[[TimeStep, int], int]

GRID_SIZE_VALUES = (9, 13, 17, 25)
NUM_RULES_VALUES = (1, 3, 6, 12, 24)

# Trial length used by bench_scaling for every axis value.  The native
# budget of 3*H*W steps would let larger grids amortize their costlier
# resets over proportionally longer trials, hiding the effect under test;
# a fixed budget keeps the reset frequency constant so only the axis value
# changes between runs.
SCALING_TRIAL_STEPS = 256


# -- policies ---------------------------------------------------------------


def random_policy(key: Key) -> Policy:
    """Uniform over the six actions, a pure function of (key, step index)."""

    def act(timestep: TimeStep, t: int) -> int:
        return randint(key, len(Action), t)

    return act


def noop_policy(timestep: TimeStep, t: int) -> int:
    """Spins in place; never moves, so it never finishes a trial early."""
    return int(Action.TURN_LEFT)


class OraclePolicy:
    """Replays a shortest plan solved fresh at the start of every trial.

    Exhausted or missing plans fall back to turning in place, which lets
    the trial run out its budget without side effects.
    """

    def __init__(self, params: EnvParams, node_budget: int = 1_000_000):
        self.params = params
        self.node_budget = node_budget
        self._plan: list[int] = []
        self._cursor = 0

    def __call__(self, timestep: TimeStep, t: int) -> int:
        if timestep.first():
            try:
                plan = solve_from(self.params, timestep.state, self.node_budget)
            except BudgetExceeded:
                plan = None
            self._plan = plan or []
            self._cursor = 0
        if self._cursor < len(self._plan):
            action = self._plan[self._cursor]
            self._cursor += 1
            return action
        return int(Action.TURN_LEFT)


# -- rollout ----------------------------------------------------------------


@dataclass(frozen=True)
class RolloutStats:
    """Per-trial accounting for one auto-reset run of ``num_steps`` steps."""

    returns_per_trial: tuple[float, ...]
    trial_lengths: tuple[int, ...]
    num_trials: int
    num_steps: int

    @property
    def residual_steps(self) -> int:
        """Steps spent in the final, unfinished trial."""
        return self.num_steps - sum(self.trial_lengths)


def rollout(
    env: Environment,
    params: EnvParams,
    policy: Policy,
    num_steps: int,
    key: Key | None = None,
) -> RolloutStats:
    """Advance one auto-resetting environment exactly ``num_steps`` steps."""
    if key is None:
        key = key_from_seed(0)
    ts = env.reset(params, key)
    returns: list[float] = []
    lengths: list[int] = []
    acc = 0.0
    length = 0
    for t in range(num_steps):
        ts = env.step(params, ts, policy(ts, t))
        acc += ts.reward
        length += 1
        if ts.last():
            returns.append(acc)
            lengths.append(length)
            acc = 0.0
            length = 0
            ts = env.auto_reset(params, ts)
    return RolloutStats(tuple(returns), tuple(lengths), len(returns), num_steps)


# -- throughput -------------------------------------------------------------


def _time_slice(params: EnvParams, num_envs: int, num_steps: int,
                k0: np.ndarray, k1: np.ndarray, seed: int) -> float:
    """Wall seconds for ``num_steps`` random-policy batched steps."""
    vec = VecEnv(params, num_envs)
    vec.reset_with_keys(k0, k1)
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    for _ in range(num_steps):
        vec.step(rng.integers(0, len(Action), num_envs))
    return time.perf_counter() - start


def _time_slice_job(job) -> float:
    return _time_slice(*job)


def _pool_warmup(_: int) -> int:
    return 0


def _run_batch(pool, workers: int, params: EnvParams, num_envs: int,
               num_steps: int, k0: np.ndarray, k1: np.ndarray, seed: int) -> float:
    if pool is None or num_envs < 2 * workers:
        return _time_slice(params, num_envs, num_steps, k0, k1, seed)
    bounds = np.linspace(0, num_envs, workers + 1).astype(int)
    jobs = [
        (params, int(hi - lo), num_steps, k0[lo:hi], k1[lo:hi], seed + w)
        for w, (lo, hi) in enumerate(zip(bounds[:-1], bounds[1:]))
        if hi > lo
    ]
    start = time.perf_counter()
    list(pool.map(_time_slice_job, jobs))
    return time.perf_counter() - start


def _bench_params(params: EnvParams, num_envs_list: Sequence[int], num_steps: int,
                  repeats: int, workers: int, seed: int) -> list[tuple[int, float]]:
    rows: list[tuple[int, float]] = []
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        if pool is not None:
            list(pool.map(_pool_warmup, range(workers)))  # absorb spawn cost
        for n in num_envs_list:
            samples = []
            for rep in range(max(1, repeats)):
                k0, k1 = split_batch(fold_in(key_from_seed(seed), rep), n)
                elapsed = _run_batch(pool, workers, params, n, num_steps, k0, k1, seed + rep)
                samples.append(n * num_steps / elapsed)
            rows.append((n, min(samples)))
    finally:
        if pool is not None:
            pool.shutdown()
    return rows


def bench_throughput(
    env_name: str,
    num_envs_list: Sequence[int],
    num_steps: int = 512,
    repeats: int = 3,
    workers: int = 1,
    seed: int = 0,
) -> list[tuple[int, float]]:
    """Random-policy steps per second for each batch size.

    Returns (num_envs, sps) rows, where sps is the minimum over
    ``repeats`` timed runs of ``num_envs * num_steps`` total steps.
    """
    _, params = make(env_name)
    return _bench_params(params, num_envs_list, num_steps, repeats, workers, seed)


# -- scaling ----------------------------------------------------------------


def scaling_ruleset(num_rules: int) -> Ruleset:
    """The replicated-NEAR workload for the rule-count axis.

    Every copy of the rule scans the grid when a put-down happens, but its
    second input never exists, so no copy ever fires and dynamics stay
    identical across rule counts.  The goal object is never placed either:
    trials end on the step budget alone.
    """
    a = pack_entity(Tile.BALL, Color.RED)
    b = pack_entity(Tile.SQUARE, Color.GREEN)
    out = pack_entity(Tile.PYRAMID, Color.BLUE)
    prize = pack_entity(Tile.HEX, Color.PURPLE)
    movers = tuple(
        pack_entity(Tile.BALL, c)
        for c in (Color.RED, Color.YELLOW, Color.PURPLE, Color.WHITE)
    )
    return Ruleset(
        goal=(int(GoalKind.AGENT_HOLD), prize, 0, 0),
        rules=((int(RuleKind.TILE_NEAR), a, b, out),) * num_rules,
        init_objects=movers,
    )


def bench_scaling(
    axis: str,
    values: Sequence[int],
    num_envs: int = 1024,
    num_steps: int = 256,
    repeats: int = 3,
    workers: int = 1,
    seed: int = 0,
) -> list[tuple[int, float]]:
    """Steps per second along one scaling axis; rows are (value, sps).

    ``grid_size`` varies a square single-room grid; ``num_rules`` replicates
    one NEAR rule on a 16x16 grid.  Both carry the same object workload and
    a fixed trial length (SCALING_TRIAL_STEPS), so the axis under test is
    the only thing changing between runs.
    """
    rows: list[tuple[int, float]] = []
    for value in values:
        if axis == "grid_size":
            params = EnvParams(height=value, width=value, ruleset=scaling_ruleset(1),
                               max_steps=SCALING_TRIAL_STEPS)
        elif axis == "num_rules":
            params = EnvParams(height=16, width=16, ruleset=scaling_ruleset(value),
                               max_steps=SCALING_TRIAL_STEPS)
        else:
            raise ValueError(f"axis must be 'grid_size' or 'num_rules', got {axis!r}")
        (_, sps), = _bench_params(params, [num_envs], num_steps, repeats, workers, seed)
        rows.append((value, sps))
    return rows


def write_csv(path, header: Sequence[str], rows: Iterable[tuple]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


# -- evaluation -------------------------------------------------------------


@dataclass(frozen=True)
class EvalReport:
    """Mean return per task, plus mean and 20th percentile across tasks."""

    per_task: tuple[float, ...]
    mean: float
    percentile_20: float


def evaluate(
    env: Environment,
    params: EnvParams,
    policy: Policy,
    tasks: Iterable[Ruleset],
    num_trials: int = 25,
    key: Key | None = None,
) -> EvalReport:
    """Average return of ``policy`` over ``num_trials`` fresh trials per task.

    Every trial resets the same ruleset with its own key and runs to its
    LAST step.  The policy sees the FIRST timestep of each trial, so
    stateful policies can re-plan per trial.
    """
    if key is None:
        key = key_from_seed(0)
    per_task: list[float] = []
    t = 0  # global step index, so step-indexed policies never repeat
    for i, task in enumerate(tasks):
        task_params = replace(params, ruleset=task)
        task_key = fold_in(key, i)
        total = 0.0
        for trial in range(num_trials):
            ts = env.reset(task_params, fold_in(task_key, trial))
            while not ts.last():
                ts = env.step(task_params, ts, policy(ts, t))
                total += ts.reward
                t += 1
        per_task.append(total / num_trials)
    scores = np.asarray(per_task)
    return EvalReport(tuple(per_task), float(scores.mean()), float(np.percentile(scores, 20)))
