"""Procedural task generation: goal/tree sampling, distractors, dedup.

A task is sampled top-down: a goal first, then production rules that build
the goal's arguments, recursively, until the configured depth (or an early
prune) turns the remaining inputs into initially placed objects.  Distractor
rules consume the task's own objects but never produce useful ones, so
triggering them is a dead end the agent has to learn to avoid.

Objects are drawn without replacement from a pool of 7 object kinds x 10
colors, so one object never serves two roles in the same task.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from functools import cached_property

from .core import PICKABLE_TILES, FLOOR_CODE, Tile, pack_entity
from .errors import ObjectPoolExhausted
from .goals import DIRECTIONAL_GOAL_OFFSET, GoalKind
from .layouts import GENERATION_COLORS
from .rng import Key, fold_in, key_from_seed, random_words, split, word_stream
from .rules import Encoding, PAIR_INPUT_RULES, RuleKind
from .ruleset import Ruleset

logger = logging.getLogger(__name__)

_POOL_TILES = (Tile.BALL, Tile.SQUARE, Tile.PYRAMID, Tile.KEY, Tile.HEX, Tile.STAR, Tile.GOAL)

# All 70 sampleable objects, and the 60 the agent can pick up.
OBJECT_POOL = tuple(pack_entity(t, c) for t in _POOL_TILES for c in GENERATION_COLORS)
PICKABLE_POOL = tuple(o for o in OBJECT_POOL if o >> 4 in PICKABLE_TILES)

# Goals the generator draws from: object goals only, no position goals and
# no agent-on-tile (ports use that one with their fixed goal squares).
ELIGIBLE_GOAL_KINDS = (
    GoalKind.AGENT_HOLD, GoalKind.AGENT_NEAR, GoalKind.TILE_NEAR,
    GoalKind.TILE_NEAR_UP, GoalKind.TILE_NEAR_RIGHT, GoalKind.TILE_NEAR_DOWN,
    GoalKind.TILE_NEAR_LEFT, GoalKind.AGENT_NEAR_UP, GoalKind.AGENT_NEAR_RIGHT,
    GoalKind.AGENT_NEAR_DOWN, GoalKind.AGENT_NEAR_LEFT,
)

TREE_RULE_KINDS = tuple(k for k in RuleKind if k != RuleKind.EMPTY)

# Goal/rule slots that must stay reachable by the agent's pocket: the held
# object of hold kinds, and the carried side (argument a) of tile-near
# kinds.  Sampling these from the pickable pool keeps tasks solvable.
_PAIR_GOALS = frozenset(
    {GoalKind.TILE_NEAR, GoalKind.TILE_NEAR_UP, GoalKind.TILE_NEAR_RIGHT,
     GoalKind.TILE_NEAR_DOWN, GoalKind.TILE_NEAR_LEFT}
)


@dataclass(frozen=True)
class BenchmarkConfig:
    """Knobs of the task sampler; the shipped presets are in CONFIGS."""

    chain_depth: int = 0
    sample_depth: bool = False
    prune_chain: bool = False
    prune_prob: float = 0.0
    num_distractor_rules: int = 0
    sample_distractor_rules: bool = False
    num_distractor_objects: int = 0
    random_seed: int = 42

    def __post_init__(self) -> None:
        if not 0 <= self.chain_depth <= 5:
            raise ValueError(f"chain_depth {self.chain_depth} outside [0, 5]")
        if not 0.0 <= self.prune_prob <= 1.0:
            raise ValueError(f"prune_prob {self.prune_prob} outside [0, 1]")
        if self.num_distractor_rules < 0 or self.num_distractor_objects < 0:
            raise ValueError("distractor counts must be non-negative")


CONFIGS = {
    "trivial": BenchmarkConfig(
        chain_depth=0, sample_depth=False, prune_chain=False, prune_prob=0.0,
        num_distractor_rules=0, sample_distractor_rules=False,
        num_distractor_objects=3, random_seed=42,
    ),
    "small": BenchmarkConfig(
        chain_depth=1, sample_depth=False, prune_chain=True, prune_prob=0.3,
        num_distractor_rules=2, sample_distractor_rules=True,
        num_distractor_objects=2, random_seed=42,
    ),
    "medium": BenchmarkConfig(
        chain_depth=2, sample_depth=False, prune_chain=True, prune_prob=0.1,
        num_distractor_rules=3, sample_distractor_rules=True,
        num_distractor_objects=2, random_seed=42,
    ),
    "high": BenchmarkConfig(
        chain_depth=3, sample_depth=False, prune_chain=True, prune_prob=0.1,
        num_distractor_rules=4, sample_distractor_rules=True,
        num_distractor_objects=1, random_seed=42,
    ),
}


@dataclass(frozen=True)
class TaskTree:
    """Sampled main tree: the goal, rule levels, and the leaf objects."""

    goal: Encoding
    levels: tuple[tuple[Encoding, ...], ...]
    leaf_objects: tuple[int, ...]
    used: frozenset[int]

    @cached_property
    def rules(self) -> tuple[Encoding, ...]:
        return tuple(r for level in self.levels for r in level)


def _draw(stream, used: set[int], pickable_only: bool = False) -> int:
    pool = PICKABLE_POOL if pickable_only else OBJECT_POOL
    candidates = [o for o in pool if o not in used]
    if not candidates:
        raise ObjectPoolExhausted(
            f"{'pickable ' if pickable_only else ''}object pool exhausted"
        )
    obj = candidates[next(stream) % len(candidates)]
    used.add(obj)
    return obj


def goal_slots(goal: Encoding) -> tuple[int, ...]:
    """Object arguments of a generator-eligible goal encoding."""
    kind = goal[0]
    if kind in _PAIR_GOALS:
        return (goal[1], goal[2])
    return (goal[1],)


def sample_goal(key: Key) -> Encoding:
    """Uniform goal kind with fresh object arguments from the pool.

    Arguments the agent may have to reposition are drawn from the pickable
    pool: the held object of the hold goal, the carried side of tile-near
    goals, and every argument of a directional variant.  A directional goal
    demands a specific neighbouring cell, and an unmovable argument spawned
    against the matching wall would make the task unsolvable; restricting
    those slots keeps zero-rule tasks solvable by construction.
    """
    stream = word_stream(key)
    kind = ELIGIBLE_GOAL_KINDS[next(stream) % len(ELIGIBLE_GOAL_KINDS)]
    used: set[int] = set()
    directional = kind in DIRECTIONAL_GOAL_OFFSET
    if kind == GoalKind.AGENT_HOLD:
        return (int(kind), _draw(stream, used, pickable_only=True), 0, 0)
    if kind in _PAIR_GOALS:
        a = _draw(stream, used, pickable_only=True)
        b = _draw(stream, used, pickable_only=directional)
        return (int(kind), a, b, 0)
    return (int(kind), _draw(stream, used, pickable_only=directional), 0, 0)


def _rule_inputs(kind: RuleKind, stream, used: set[int]) -> tuple[int, int]:
    if kind == RuleKind.AGENT_HOLD:
        return _draw(stream, used, pickable_only=True), 0
    if kind in PAIR_INPUT_RULES:
        a = _draw(stream, used, pickable_only=True)
        return a, _draw(stream, used)
    return _draw(stream, used), 0


def sample_task_tree(key: Key, cfg: BenchmarkConfig) -> TaskTree:
    """Grow the main tree under ``cfg``; see the module docstring."""
    k_goal, k_grow = split(key)
    goal = sample_goal(k_goal)
    frontier = list(goal_slots(goal))
    used = set(frontier)
    stream = word_stream(k_grow)
    depth = cfg.chain_depth
    if cfg.sample_depth:
        depth = next(stream) % (cfg.chain_depth + 1)
    prune_below = int(cfg.prune_prob * 2**64)

    levels: list[tuple[Encoding, ...]] = []
    leaves: list[int] = []
    for _ in range(depth):
        if not frontier:
            break
        here: list[Encoding] = []
        grown: list[int] = []
        for obj in frontier:
            if cfg.prune_chain and next(stream) < prune_below:
                leaves.append(obj)
                continue
            kind = TREE_RULE_KINDS[next(stream) % len(TREE_RULE_KINDS)]
            in_a, in_b = _rule_inputs(kind, stream, used)
            here.append((int(kind), in_a, in_b, obj))
            grown.append(in_a)
            if in_b:
                grown.append(in_b)
        levels.append(tuple(here))
        frontier = grown
    leaves.extend(frontier)
    return TaskTree(goal, tuple(levels), tuple(leaves), frozenset(used))


def sample_distractors(
    key: Key, cfg: BenchmarkConfig, tree: TaskTree
) -> tuple[tuple[Encoding, ...], tuple[int, ...]]:
    """Dead-end rules over the tree's own objects, plus inert extra objects."""
    stream = word_stream(key)
    count = cfg.num_distractor_rules
    if cfg.sample_distractor_rules and count:
        count = next(stream) % (cfg.num_distractor_rules + 1)

    tree_objs = sorted(tree.used)
    tree_pickable = [o for o in tree_objs if o >> 4 in PICKABLE_TILES]
    taken = set(tree.used)

    allowed = [RuleKind.AGENT_NEAR, RuleKind.AGENT_NEAR_UP, RuleKind.AGENT_NEAR_RIGHT,
               RuleKind.AGENT_NEAR_DOWN, RuleKind.AGENT_NEAR_LEFT]
    if tree_pickable:
        allowed.append(RuleKind.AGENT_HOLD)
        if len(tree_objs) >= 2:
            allowed.extend(
                (RuleKind.TILE_NEAR, RuleKind.TILE_NEAR_UP, RuleKind.TILE_NEAR_RIGHT,
                 RuleKind.TILE_NEAR_DOWN, RuleKind.TILE_NEAR_LEFT)
            )
    allowed.sort()

    rules: list[Encoding] = []
    for _ in range(count):
        kind = allowed[next(stream) % len(allowed)]
        if kind == RuleKind.AGENT_HOLD:
            in_a, in_b = tree_pickable[next(stream) % len(tree_pickable)], 0
        elif kind in PAIR_INPUT_RULES:
            in_a = tree_pickable[next(stream) % len(tree_pickable)]
            others = [o for o in tree_objs if o != in_a]
            in_b = others[next(stream) % len(others)]
        else:
            in_a, in_b = tree_objs[next(stream) % len(tree_objs)], 0
        # Output is useless by construction: either the object vanishes
        # into plain floor or turns into something no rule or goal wants.
        unused = [o for o in OBJECT_POOL if o not in taken]
        if next(stream) % 2 == 0 or not unused:
            out = FLOOR_CODE
        else:
            out = unused[next(stream) % len(unused)]
            taken.add(out)
        rules.append((int(kind), in_a, in_b, out))

    objects = tuple(_draw(stream, taken) for _ in range(cfg.num_distractor_objects))
    return tuple(rules), objects


def generate_ruleset(key: Key, cfg: BenchmarkConfig) -> Ruleset:
    """One padded task: goal + shuffled tree/distractor rules + objects."""
    k_tree, k_distract, k_shuffle = split(key, 3)
    tree = sample_task_tree(k_tree, cfg)
    extra_rules, extra_objects = sample_distractors(k_distract, cfg, tree)
    rules = list(tree.rules) + list(extra_rules)
    if len(rules) > 1:
        words = random_words(k_shuffle, len(rules))
        order = sorted(range(len(rules)), key=words.__getitem__)
        rules = [rules[i] for i in order]
    return Ruleset(
        goal=tree.goal,
        rules=tuple(rules),
        init_objects=tree.leaf_objects + extra_objects,
    ).padded()


def generate_benchmark(cfg: BenchmarkConfig, n: int) -> list[Ruleset]:
    """``n`` canonically distinct tasks, reproducible from cfg.random_seed.

    Task i comes from the i-th child of the root key, so the output does
    not depend on how attempts are scheduled; duplicates (same goal, same
    rule set, same objects, regardless of order) are skipped.
    """
    if n < 1:
        raise ValueError("need at least one ruleset")
    root = key_from_seed(cfg.random_seed)
    seen: set[bytes] = set()
    out: list[Ruleset] = []
    report = max(1, n // 10)
    attempt = 0
    while len(out) < n:
        key = fold_in(root, attempt)
        attempt += 1
        try:
            ruleset = generate_ruleset(key, cfg)
        except ObjectPoolExhausted:
            continue
        ident = ruleset.canonical()
        if ident in seen:
            continue
        seen.add(ident)
        out.append(ruleset)
        if len(out) % report == 0 or len(out) == n:
            logger.info("generated %d/%d unique tasks (%d attempts)", len(out), n, attempt)
    return out


def ruleset_stats(rulesets) -> dict[int, int]:
    """Histogram of non-empty rule counts across a benchmark."""
    if not rulesets:
        raise ValueError("no rulesets to summarize")
    hist: dict[int, int] = {}
    for rs in rulesets:
        k = len(rs.active_rules)
        hist[k] = hist.get(k, 0) + 1
    return dict(sorted(hist.items()))


def write_stats_csv(stats: dict[int, int], path) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["num_rules", "count"])
        for k, v in sorted(stats.items()):
            writer.writerow([k, v])


def config_with_seed(name: str, seed: int | None = None) -> BenchmarkConfig:
    """Named preset, optionally rekeyed; raises KeyError on unknown names."""
    cfg = CONFIGS[name]
    if seed is not None and seed != cfg.random_seed:
        cfg = replace(cfg, random_seed=seed)
    return cfg
