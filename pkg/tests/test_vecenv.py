"""The batched stepper against the scalar engine, transition by transition."""

import dataclasses
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rulegrid.benchgen import CONFIGS, generate_benchmark
from rulegrid.env import Action, Environment, EnvParams, StepType
from rulegrid.errors import GridFull, InvalidAction
from rulegrid.registry import make
from rulegrid.rng import Key, fold_in, key_from_seed, random_words, split, split_batch
from rulegrid.ruleset import Ruleset
from rulegrid.vecenv import VecEnv

ROOT = key_from_seed(20240601)
ENV = Environment()


def scalar_lockstep(params, tasks, key, actions):
    """Reference trajectories: one scalar env per column of ``actions``."""
    num = actions.shape[1]
    keys = split(key, num)
    plist = [
        dataclasses.replace(params, ruleset=tasks[i]) if tasks else params
        for i in range(num)
    ]
    steps = [ENV.reset(plist[i], keys[i]) for i in range(num)]
    records = []
    for row in actions:
        rec = []
        for i in range(num):
            ts = ENV.step(plist[i], steps[i], int(row[i]))
            out = (ts.reward, ts.discount, int(ts.step_type))
            ts = ENV.auto_reset(plist[i], ts)
            steps[i] = ts
            rec.append((out, ts.observation, ts.state))
        records.append(rec)
    return [ENV.reset(plist[i], keys[i]) for i in range(num)], records


def assert_lockstep(params, tasks, num_envs, num_steps, seed):
    rng = np.random.default_rng(seed)
    actions = rng.integers(0, 6, (num_steps, num_envs))
    vec = VecEnv(params, num_envs, rulesets=tasks)
    first = vec.reset(ROOT)
    initial, records = scalar_lockstep(params, tasks, ROOT, actions)
    for i in range(num_envs):
        assert (first.observations[i] == initial[i].observation).all()
    assert (first.step_types == int(StepType.FIRST)).all()
    for t in range(num_steps):
        vts = vec.step(actions[t])
        for i in range(num_envs):
            (reward, discount, step_type), obs, state = records[t][i]
            assert vts.rewards[i] == reward
            assert vts.discounts[i] == discount
            assert vts.step_types[i] == step_type
            assert (vts.observations[i] == obs).all()
            mirrored = vec.env_state(i)
            assert mirrored.grid.cells == state.grid.cells
            assert mirrored.agent == state.agent
            assert mirrored.rng == state.rng
            assert mirrored.step_count == state.step_count


def test_reset_matches_scalar_per_env_keys():
    params = EnvParams()
    vec = VecEnv(params, 8)
    vts = vec.reset(ROOT)
    for i, key in enumerate(split(ROOT, 8)):
        ts = ENV.reset(params, key)
        state = vec.env_state(i)
        assert state.grid.cells == ts.state.grid.cells
        assert state.agent == ts.state.agent
        assert state.rng == ts.state.rng
        assert (vts.observations[i] == ts.observation).all()


def test_trivial_tasks_lockstep_across_trials():
    tasks = list(generate_benchmark(CONFIGS["trivial"], 6))
    assert_lockstep(EnvParams(), tasks, 6, 700, seed=1)


def test_medium_tasks_lockstep_rules_fire():
    tasks = list(generate_benchmark(CONFIGS["medium"], 6))
    assert_lockstep(EnvParams(), tasks, 6, 600, seed=2)


def test_high_tasks_lockstep_on_four_rooms():
    _, params = make("XLand-MiniGrid-R4-13x13")
    tasks = list(generate_benchmark(CONFIGS["high"], 4))
    assert_lockstep(params, tasks, 4, 500, seed=3)


@pytest.mark.parametrize(
    "name",
    [
        "MiniGrid-DoorKey-8x8",
        "MiniGrid-UnlockPickUp",
        "MiniGrid-FourRooms",
        "MiniGrid-EmptyRandom-6x6",
    ],
)
def test_port_scenarios_lockstep(name):
    _, params = make(name)
    assert_lockstep(params, None, 3, 350, seed=4)


def test_occluded_view_lockstep():
    params = EnvParams(see_through_walls=False, view_size=5)
    tasks = list(generate_benchmark(CONFIGS["small"], 3))
    assert_lockstep(params, tasks, 3, 120, seed=5)


def test_batch_size_does_not_change_trajectories():
    # env i's actions derive from its own stream, so batches must agree
    params = EnvParams()
    task = generate_benchmark(CONFIGS["trivial"], 1)[0]

    def run(num_envs, steps=300):
        vec = VecEnv(params, num_envs, rulesets=task)
        vec.reset(ROOT)
        streams = [
            np.array(random_words(fold_in(ROOT, i), steps)) % 6
            for i in range(num_envs)
        ]
        out = []
        for t in range(steps):
            acts = np.array([streams[i][t] for i in range(num_envs)])
            vts = vec.step(acts)
            out.append((vts.rewards.copy(), vts.step_types.copy(), vts.observations.copy()))
        return out

    small, big = run(1), run(32)
    for (r1, t1, o1), (r32, t32, o32) in zip(small, big):
        assert r1[0] == r32[0]
        assert t1[0] == t32[0]
        assert (o1[0] == o32[0]).all()


def test_split_batch_matches_scalar_split():
    k0, k1 = split_batch(ROOT, 40)
    assert [Key(int(a), int(b)) for a, b in zip(k0, k1)] == list(split(ROOT, 40))


def test_empty_ruleset_trials_end_on_budget_only():
    params = EnvParams(max_steps=30)
    vec = VecEnv(params, 16)
    vec.reset(ROOT)
    rng = np.random.default_rng(0)
    for t in range(1, 61):
        vts = vec.step(rng.integers(0, 6, 16))
        expect = StepType.LAST if t % 30 == 0 else StepType.MID
        assert (vts.step_types == int(expect)).all()
        assert (vts.rewards == 0.0).all()
        assert (vts.discounts == (0.0 if expect is StepType.LAST else 1.0)).all()


def test_goal_reward_formula_matches_scalar():
    # drive one env to its goal with the oracle plan and check the reward
    from rulegrid.oracle import solve

    task = generate_benchmark(CONFIGS["trivial"], 1)[0]
    params = EnvParams(ruleset=task)
    key = fold_in(ROOT, 9)
    plan = solve(params, key=key)
    assert plan
    vec = VecEnv(params, 1)
    # start env 0 from ``key`` itself so the oracle plan applies
    vec._reset_envs(
        np.arange(1),
        np.array([key.hi], dtype=np.uint64),
        np.array([key.lo], dtype=np.uint64),
    )
    ts = ENV.reset(params, key)
    for action in plan:
        vts = vec.step(np.array([action]))
        ts = ENV.step(params, ts, action, compute_obs=False)
        assert vts.rewards[0] == ts.reward
        ts = ENV.auto_reset(params, ts, compute_obs=False)
    assert vts.step_types[0] == int(StepType.LAST)
    assert vts.rewards[0] == 1.0 - 0.9 * (len(plan) / params.step_budget)


def test_invalid_actions_rejected():
    vec = VecEnv(EnvParams(), 4)
    vec.reset(ROOT)
    with pytest.raises(InvalidAction):
        vec.step(np.array([0, 1, 6, 2]))
    with pytest.raises(InvalidAction):
        vec.step(np.array([0, 1]))


def test_too_many_objects_rejected():
    task = Ruleset(goal=(3, 85, 0, 0), init_objects=(85,) * 60)  # 60 > 49 free cells
    with pytest.raises(GridFull):
        VecEnv(EnvParams(ruleset=task), 2)


def test_ruleset_count_must_match_batch():
    tasks = list(generate_benchmark(CONFIGS["trivial"], 3))
    with pytest.raises(ValueError):
        VecEnv(EnvParams(), 2, rulesets=tasks)


@given(seed=st.integers(0, 2**32 - 1))
@settings(max_examples=8, deadline=None)
def test_lockstep_property_random_tasks(seed):
    tasks = [
        generate_benchmark(CONFIGS["small"], 4)[i] for i in range(2)
    ]
    rng = np.random.default_rng(seed)
    actions = rng.integers(0, 6, (90, 2))
    vec = VecEnv(EnvParams(), 2, rulesets=tasks)
    vec.reset(fold_in(ROOT, seed))
    _, records = scalar_lockstep(EnvParams(), tasks, fold_in(ROOT, seed), actions)
    for t in range(90):
        vts = vec.step(actions[t])
        for i in range(2):
            (reward, discount, step_type), obs, _ = records[t][i]
            assert vts.rewards[i] == reward
            assert vts.step_types[i] == step_type
            assert (vts.observations[i] == obs).all()


def test_throughput_smoke():
    # the acceptance suite owns the real bar; this guards against collapse
    vec = VecEnv(EnvParams(), 1024)
    vec.reset(ROOT)
    acts = np.random.default_rng(0).integers(0, 6, (400, 1024))
    start = time.perf_counter()
    for row in acts:
        vec.step(row)
    sps = 1024 * 400 / (time.perf_counter() - start)
    assert sps > 2e5, f"batched stepping collapsed to {sps:,.0f} SPS"
