"""Meta-RL gridworld with composable rule/goal tasks and benchmark tooling."""

from .benchgen import (
    CONFIGS,
    BenchmarkConfig,
    generate_benchmark,
    generate_ruleset,
    ruleset_stats,
)
from .benchio import (
    Benchmark,
    load_benchmark,
    load_named,
    save_benchmark,
)
from .core import (
    AgentState,
    Color,
    Direction,
    Entity,
    Grid,
    Position,
    Tile,
    pack_entity,
    unpack_entity,
)
from .env import Action, Environment, EnvParams, EnvState, StepType, TimeStep
from .goals import Goal, GoalKind, check_goal, decode_goal, encode_goal
from .harness import (
    EvalReport,
    OraclePolicy,
    RolloutStats,
    bench_scaling,
    bench_throughput,
    evaluate,
    noop_policy,
    random_policy,
    rollout,
)
from .layouts import Layout
from .oracle import solve, solve_from, validate_solvability
from .registry import make, registered_environments
from .rng import Key, fold_in, key_from_seed, split, split_batch
from .rules import EventKind, Rule, RuleKind, TriggerEvent, apply_rules, decode_rule, encode_rule
from .ruleset import EMPTY_RULESET, MAX_INIT_OBJECTS, MAX_RULES, Ruleset
from .vecenv import VecEnv, VecTimeStep

__version__ = "0.1.0"

__all__ = [
    "Action",
    "AgentState",
    "Benchmark",
    "BenchmarkConfig",
    "CONFIGS",
    "Color",
    "Direction",
    "EMPTY_RULESET",
    "Entity",
    "EnvParams",
    "EnvState",
    "Environment",
    "EvalReport",
    "EventKind",
    "Goal",
    "GoalKind",
    "Grid",
    "Key",
    "Layout",
    "MAX_INIT_OBJECTS",
    "MAX_RULES",
    "OraclePolicy",
    "Position",
    "RolloutStats",
    "Rule",
    "RuleKind",
    "Ruleset",
    "StepType",
    "Tile",
    "TimeStep",
    "TriggerEvent",
    "VecEnv",
    "VecTimeStep",
    "apply_rules",
    "bench_scaling",
    "bench_throughput",
    "check_goal",
    "decode_goal",
    "decode_rule",
    "encode_goal",
    "encode_rule",
    "evaluate",
    "fold_in",
    "generate_benchmark",
    "generate_ruleset",
    "key_from_seed",
    "load_benchmark",
    "load_named",
    "make",
    "noop_policy",
    "pack_entity",
    "random_policy",
    "registered_environments",
    "rollout",
    "ruleset_stats",
    "save_benchmark",
    "solve",
    "solve_from",
    "split",
    "split_batch",
    "unpack_entity",
    "validate_solvability",
]
