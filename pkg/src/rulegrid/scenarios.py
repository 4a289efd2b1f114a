"""Reset-time grid builders: the rule-driven default plus classic ports.

A scenario maps (params, key) to the initial grid, agent pose and the
ruleset the trial runs under.  The default scenario places the ruleset's
initial objects on a room layout; the ports rebuild a handful of classic
single-task gridworlds on top of the same machinery (their goals are plain
goal encodings, their doors and keys ordinary entities).
"""

from __future__ import annotations

from typing import Callable, Protocol

from .core import (
    AgentState,
    Color,
    Direction,
    FLOOR_CODE,
    Grid,
    Position,
    Tile,
    WALL_CODE,
    pack_entity,
    shuffled_free_cells,
)
from .errors import GridFull
from .goals import GoalKind
from .layouts import GENERATION_COLORS, Layout, build_layout
from .ruleset import Ruleset
from .rng import Key, random_words, split

BuildResult = tuple[Grid, AgentState, Ruleset]
Builder = Callable[["EnvParamsLike", Key], BuildResult]


class EnvParamsLike(Protocol):
    height: int
    width: int
    layout: Layout
    ruleset: Ruleset


def _spawn(perm: list[int], used: int, width: int, key: Key) -> AgentState:
    """Uniform agent pose over the unoccupied tail of a cell permutation."""
    free = perm[used:]
    if not free:
        raise GridFull("no free cell left for the agent")
    w0, w1 = random_words(key, 2)
    flat = free[w0 % len(free)]
    return AgentState(Position(flat // width, flat % width), Direction(w1 % 4))


def build_xland(params: EnvParamsLike, key: Key) -> BuildResult:
    """Room layout, ruleset objects on shuffled free cells, random spawn."""
    k_doors, k_objects, k_agent = split(key, 3)
    grid = build_layout(params.layout, params.height, params.width, k_doors)
    objects = params.ruleset.active_objects
    perm = shuffled_free_cells(grid, k_objects)
    if len(objects) >= len(perm):
        raise GridFull(f"{len(objects)} objects on {len(perm)} free cells")
    buf = bytearray(grid.cells)
    for code, flat in zip(objects, perm):
        buf[flat] = code
    grid = Grid(grid.height, grid.width, bytes(buf))
    agent = _spawn(perm, len(objects), grid.width, k_agent)
    return grid, agent, params.ruleset


def _bordered(height: int, width: int) -> bytearray:
    buf = bytearray(height * width)
    for r in range(height):
        for c in range(width):
            edge = r in (0, height - 1) or c in (0, width - 1)
            buf[r * width + c] = WALL_CODE if edge else FLOOR_CODE
    return buf


GREEN_GOAL = pack_entity(Tile.GOAL, Color.GREEN)
_ON_GOAL = (int(GoalKind.AGENT_ON_TILE), GREEN_GOAL, 0, 0)


def build_empty(params: EnvParamsLike, key: Key) -> BuildResult:
    """Goal square in the far corner, agent pinned to the near corner."""
    h, w = params.height, params.width
    buf = _bordered(h, w)
    buf[(h - 2) * w + (w - 2)] = GREEN_GOAL
    grid = Grid(h, w, bytes(buf))
    agent = AgentState(Position(1, 1), Direction.RIGHT)
    return grid, agent, Ruleset(goal=_ON_GOAL)


def build_empty_random(params: EnvParamsLike, key: Key) -> BuildResult:
    """Goal square in the far corner, agent spawned uniformly."""
    h, w = params.height, params.width
    buf = _bordered(h, w)
    buf[(h - 2) * w + (w - 2)] = GREEN_GOAL
    grid = Grid(h, w, bytes(buf))
    _, k_cells, k_agent = split(key, 3)
    agent = _spawn(shuffled_free_cells(grid, k_cells), 0, w, k_agent)
    return grid, agent, Ruleset(goal=_ON_GOAL)


def build_door_key(params: EnvParamsLike, key: Key) -> BuildResult:
    """Locked yellow door in a random wall; matching key on the agent's side."""
    h, w = params.height, params.width
    k_wall, k_cells, k_agent = split(key, 3)
    w0, w1 = random_words(k_wall, 2)
    wall_col = 2 + w0 % (w - 4)
    door_row = 1 + w1 % (h - 2)
    buf = _bordered(h, w)
    for r in range(h):
        buf[r * w + wall_col] = WALL_CODE
    buf[door_row * w + wall_col] = pack_entity(Tile.DOOR_LOCKED, Color.YELLOW)
    buf[(h - 2) * w + (w - 2)] = GREEN_GOAL
    grid = Grid(h, w, bytes(buf))
    left = [i for i in shuffled_free_cells(grid, k_cells) if i % w < wall_col]
    buf[left[0]] = pack_entity(Tile.KEY, Color.YELLOW)
    grid = Grid(h, w, bytes(buf))
    agent = _spawn(left, 1, w, k_agent)
    return grid, agent, Ruleset(goal=_ON_GOAL)


def build_four_rooms(params: EnvParamsLike, key: Key) -> BuildResult:
    """Four rooms with doorways; goal square placed uniformly at random."""
    k_doors, k_cells, k_agent = split(key, 3)
    grid = build_layout(Layout.R4, params.height, params.width, k_doors)
    perm = shuffled_free_cells(grid, k_cells)
    buf = bytearray(grid.cells)
    buf[perm[0]] = GREEN_GOAL
    grid = Grid(params.height, params.width, bytes(buf))
    agent = _spawn(perm, 1, params.width, k_agent)
    return grid, agent, Ruleset(goal=_ON_GOAL)


def _two_rooms_locked(params: EnvParamsLike, key: Key) -> tuple[Grid, AgentState, int, Key]:
    """Shared geometry of the unlock ports: returns grid, agent, door color."""
    h, w = params.height, params.width
    k_wall, k_cells, k_agent = split(key, 3)
    w0, w1 = random_words(k_wall, 2)
    wall_col = (w - 1) // 2
    door_row = 1 + w0 % (h - 2)
    color = GENERATION_COLORS[w1 % len(GENERATION_COLORS)]
    buf = _bordered(h, w)
    for r in range(h):
        buf[r * w + wall_col] = WALL_CODE
    buf[door_row * w + wall_col] = pack_entity(Tile.DOOR_LOCKED, color)
    grid = Grid(h, w, bytes(buf))
    left = [i for i in shuffled_free_cells(grid, k_cells) if i % w < wall_col]
    buf[left[0]] = pack_entity(Tile.KEY, color)
    grid = Grid(h, w, bytes(buf))
    agent = _spawn(left, 1, w, k_agent)
    return grid, agent, color, k_cells


def build_unlock(params: EnvParamsLike, key: Key) -> BuildResult:
    """Open the locked door: succeed by standing in the opened doorway."""
    grid, agent, color, _ = _two_rooms_locked(params, key)
    goal = (int(GoalKind.AGENT_ON_TILE), pack_entity(Tile.DOOR_OPEN, color), 0, 0)
    return grid, agent, Ruleset(goal=goal)


def build_unlock_pickup(params: EnvParamsLike, key: Key) -> BuildResult:
    """Fetch the ball locked in the far room."""
    grid, agent, color, k_cells = _two_rooms_locked(params, key)
    w = params.width
    wall_col = (w - 1) // 2
    ball_color = GENERATION_COLORS[random_words(k_cells, 3)[2] % len(GENERATION_COLORS)]
    ball = pack_entity(Tile.BALL, ball_color)
    right = [i for i in shuffled_free_cells(grid, k_cells) if i % w > wall_col]
    buf = bytearray(grid.cells)
    buf[right[0]] = ball
    grid = Grid(grid.height, w, bytes(buf))
    goal = (int(GoalKind.AGENT_HOLD), ball, 0, 0)
    return grid, agent, Ruleset(goal=goal)


SCENARIOS: dict[str, Builder] = {
    "xland": build_xland,
    "empty": build_empty,
    "empty_random": build_empty_random,
    "door_key": build_door_key,
    "four_rooms": build_four_rooms,
    "unlock": build_unlock,
    "unlock_pickup": build_unlock_pickup,
}
