"""Environment state machine: reset, step, trial boundaries, auto-reset.

Everything here is a pure function of its inputs: ``step`` and ``reset``
take state and return state, so a batch of environments is just a batch of
independent calls and replaying an action sequence always reproduces the
same trajectory bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .core import (
    AgentState,
    EMPTY_POCKET,
    FLOOR_CODE,
    Grid,
    PICKABLE_TILES,
    Tile,
    WALKABLE_TILES,
)
from .errors import InvalidAction
from .goals import check_goal
from .layouts import Layout
from .observation import observe as observe_grid
from .rng import Key, split
from .rules import EventKind, TriggerEvent, apply_rules
from .ruleset import EMPTY_RULESET, Ruleset
from .scenarios import SCENARIOS


class Action(IntEnum):
    MOVE_FORWARD = 0
    TURN_LEFT = 1
    TURN_RIGHT = 2
    PICK_UP = 3
    PUT_DOWN = 4
    TOGGLE = 5


class StepType(IntEnum):
    FIRST = 0
    MID = 1
    LAST = 2


@dataclass(frozen=True)
class EnvParams:
    """Static task configuration, shared by every trial."""

    layout: Layout = Layout.R1
    height: int = 9
    width: int = 9
    view_size: int = 5
    max_steps: int | None = None  # None means the 3*H*W heuristic
    see_through_walls: bool = True
    ruleset: Ruleset = EMPTY_RULESET
    scenario: str = "xland"

    def __post_init__(self) -> None:
        if self.view_size < 3 or self.view_size % 2 == 0:
            raise ValueError(f"view_size must be odd and >= 3, got {self.view_size}")
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}")

    @property
    def step_budget(self) -> int:
        if self.max_steps is not None:
            return self.max_steps
        return 3 * self.height * self.width


@dataclass(frozen=True)
class EnvState:
    grid: Grid
    agent: AgentState
    ruleset: Ruleset
    step_count: int
    goal_reached: bool
    rng: Key


@dataclass(eq=False)
class TimeStep:
    observation: np.ndarray | None
    reward: float
    discount: float
    step_type: StepType
    state: EnvState

    def first(self) -> bool:
        return self.step_type is StepType.FIRST

    def mid(self) -> bool:
        return self.step_type is StepType.MID

    def last(self) -> bool:
        return self.step_type is StepType.LAST


class Environment:
    """Partially observable gridworld with rule-driven dynamics.

    The agent sees a ``view_size`` window in front of it, acts with six
    discrete actions, and earns reward only when the hidden goal predicate
    fires.  A trial ends on success or when the step budget runs out;
    ``auto_reset`` strings trials together without changing the task.
    """

    num_actions = len(Action)

    def observation_shape(self, params: EnvParams) -> tuple[int, int, int]:
        return (params.view_size, params.view_size, 2)

    def reset(self, params: EnvParams, key: Key, compute_obs: bool = True) -> TimeStep:
        """Build the grid, place objects and agent, start the trial."""
        k_scenario, k_state = split(key)
        grid, agent, ruleset = SCENARIOS[params.scenario](params, k_scenario)
        state = EnvState(grid, agent, ruleset, 0, False, k_state)
        obs = self.observe(state, params) if compute_obs else None
        return TimeStep(obs, 0.0, 1.0, StepType.FIRST, state)

    def step(
        self,
        params: EnvParams,
        timestep: TimeStep,
        action: int,
        compute_obs: bool = True,
    ) -> TimeStep:
        """Advance one step: apply the action, run rules, check the goal.

        Movement is blocked by walls, closed/locked doors and objects.
        pick_up needs an empty pocket and a pickable tile ahead; put_down
        needs a held object and plain floor ahead; toggle opens a closed
        door, or a locked one when the pocket holds the same-color key.
        """
        if action not in range(len(Action)):
            raise InvalidAction(f"action {action!r} outside [0, {len(Action) - 1}]")
        action = int(action)
        state = timestep.state
        grid, agent = state.grid, state.agent
        h, w = grid.height, grid.width
        event = None

        if action == Action.MOVE_FORWARD:
            target = agent.position.ahead(agent.direction)
            r, c = target.row, target.col
            if 0 <= r < h and 0 <= c < w and grid.tile_at(r, c) in WALKABLE_TILES:
                agent = AgentState(target, agent.direction, agent.pocket)
                event = TriggerEvent(EventKind.MOVE, target)
        elif action == Action.TURN_LEFT:
            agent = AgentState(agent.position, agent.direction.turned_left(), agent.pocket)
        elif action == Action.TURN_RIGHT:
            agent = AgentState(agent.position, agent.direction.turned_right(), agent.pocket)
        elif action == Action.PICK_UP:
            target = agent.position.ahead(agent.direction)
            r, c = target.row, target.col
            if (
                0 <= r < h and 0 <= c < w
                and agent.pocket == EMPTY_POCKET
                and grid.tile_at(r, c) in PICKABLE_TILES
            ):
                code = grid.code_at(r, c)
                grid = grid.with_code(r, c, FLOOR_CODE)
                agent = AgentState(agent.position, agent.direction, code)
                event = TriggerEvent(EventKind.PICK_UP, target, code)
        elif action == Action.PUT_DOWN:
            target = agent.position.ahead(agent.direction)
            r, c = target.row, target.col
            if (
                0 <= r < h and 0 <= c < w
                and agent.pocket != EMPTY_POCKET
                and grid.tile_at(r, c) == Tile.FLOOR
            ):
                code = agent.pocket
                grid = grid.with_code(r, c, code)
                agent = AgentState(agent.position, agent.direction, EMPTY_POCKET)
                event = TriggerEvent(EventKind.PUT_DOWN, target, code)
        else:
            target = agent.position.ahead(agent.direction)
            r, c = target.row, target.col
            if 0 <= r < h and 0 <= c < w:
                tile, color = divmod(grid.code_at(r, c), 16)
                unlocks = agent.pocket == Tile.KEY * 16 + color
                if tile == Tile.DOOR_CLOSED or (tile == Tile.DOOR_LOCKED and unlocks):
                    opened = Tile.DOOR_OPEN * 16 + color
                    grid = grid.with_code(r, c, opened)
                    event = TriggerEvent(EventKind.TOGGLE, target, opened)

        goal_reached = state.goal_reached
        if event is not None:
            rules = state.ruleset.active_rules
            if rules:
                grid, agent = apply_rules(grid, agent, rules, event)
            if not goal_reached:
                goal_reached = check_goal(grid, agent, state.ruleset.goal, event)

        step_count = state.step_count + 1
        budget = params.step_budget
        if goal_reached:
            reward = 1.0 - 0.9 * (step_count / budget)
            discount, step_type = 0.0, StepType.LAST
        elif step_count >= budget:
            reward, discount, step_type = 0.0, 0.0, StepType.LAST
        else:
            reward, discount, step_type = 0.0, 1.0, StepType.MID

        new_state = EnvState(grid, agent, state.ruleset, step_count, goal_reached, state.rng)
        obs = self.observe(new_state, params) if compute_obs else None
        return TimeStep(obs, reward, discount, step_type, new_state)

    def observe(self, state: EnvState, params: EnvParams) -> np.ndarray:
        return observe_grid(state.grid, state.agent, params.view_size, params.see_through_walls)

    def auto_reset(
        self,
        params: EnvParams,
        timestep: TimeStep,
        key: Key | None = None,
        compute_obs: bool = True,
    ) -> TimeStep:
        """Start the next trial once the current one ended; no-op otherwise.

        The fresh FIRST timestep carries the terminal reward, gym-style, so
        a rollout loop reads reward and next observation off one record.
        The reset key defaults to the state's own stream, keeping whole
        meta-episodes reproducible from the single original seed.
        """
        if not timestep.last():
            return timestep
        if key is None:
            key = timestep.state.rng
        fresh = self.reset(params, key, compute_obs)
        fresh.reward = timestep.reward
        return fresh
