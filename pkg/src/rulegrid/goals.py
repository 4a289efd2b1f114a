"""Goal predicates: encodings and the pure check against a state.

Goals are stored as four bytes ``[kind, arg1, arg2, arg3]``.  Most take
entity codes; the two position goals carry (row, col) coordinates instead.
Like rules, goal checks are gated on the event class of the last action:
agent-relative goals after MOVE/PICK_UP/PUT_DOWN, tile-relative goals after
PUT_DOWN, the hold goal after PICK_UP.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

from .core import AgentState, Grid
from .errors import InvalidEncoding
from .rules import EventKind, NEAR_OFFSETS, TriggerEvent, _check_code

Encoding = tuple[int, int, int, int]

EMPTY_GOAL: Encoding = (0, 0, 0, 0)


class GoalKind(IntEnum):
    EMPTY = 0
    AGENT_HOLD = 1
    AGENT_ON_TILE = 2
    AGENT_NEAR = 3
    TILE_NEAR = 4
    AGENT_ON_POSITION = 5
    TILE_ON_POSITION = 6
    TILE_NEAR_UP = 7
    TILE_NEAR_RIGHT = 8
    TILE_NEAR_DOWN = 9
    TILE_NEAR_LEFT = 10
    AGENT_NEAR_UP = 11
    AGENT_NEAR_RIGHT = 12
    AGENT_NEAR_DOWN = 13
    AGENT_NEAR_LEFT = 14


PAIR_GOALS = frozenset(
    {GoalKind.TILE_NEAR, GoalKind.TILE_NEAR_UP, GoalKind.TILE_NEAR_RIGHT,
     GoalKind.TILE_NEAR_DOWN, GoalKind.TILE_NEAR_LEFT}
)
POSITION_GOALS = frozenset({GoalKind.AGENT_ON_POSITION, GoalKind.TILE_ON_POSITION})

_AGENT_EVENTS = frozenset({EventKind.MOVE, EventKind.PICK_UP, EventKind.PUT_DOWN})
_TILE_EVENTS = frozenset({EventKind.PUT_DOWN})

GOAL_GATES: dict[int, frozenset[EventKind]] = {
    GoalKind.AGENT_HOLD: frozenset({EventKind.PICK_UP}),
    GoalKind.AGENT_ON_TILE: _AGENT_EVENTS,
    GoalKind.AGENT_NEAR: _AGENT_EVENTS,
    GoalKind.TILE_NEAR: _TILE_EVENTS,
    GoalKind.AGENT_ON_POSITION: _AGENT_EVENTS,
    GoalKind.TILE_ON_POSITION: _TILE_EVENTS,
    GoalKind.TILE_NEAR_UP: _TILE_EVENTS,
    GoalKind.TILE_NEAR_RIGHT: _TILE_EVENTS,
    GoalKind.TILE_NEAR_DOWN: _TILE_EVENTS,
    GoalKind.TILE_NEAR_LEFT: _TILE_EVENTS,
    GoalKind.AGENT_NEAR_UP: _AGENT_EVENTS,
    GoalKind.AGENT_NEAR_RIGHT: _AGENT_EVENTS,
    GoalKind.AGENT_NEAR_DOWN: _AGENT_EVENTS,
    GoalKind.AGENT_NEAR_LEFT: _AGENT_EVENTS,
}

# Where argument b (pair goals) or argument a (agent-relative directional
# goals) must sit, relative to the reference cell.
DIRECTIONAL_GOAL_OFFSET = {
    GoalKind.TILE_NEAR_UP: (-1, 0),
    GoalKind.TILE_NEAR_RIGHT: (0, 1),
    GoalKind.TILE_NEAR_DOWN: (1, 0),
    GoalKind.TILE_NEAR_LEFT: (0, -1),
    GoalKind.AGENT_NEAR_UP: (-1, 0),
    GoalKind.AGENT_NEAR_RIGHT: (0, 1),
    GoalKind.AGENT_NEAR_DOWN: (1, 0),
    GoalKind.AGENT_NEAR_LEFT: (0, -1),
}


@dataclass(frozen=True, slots=True)
class Goal:
    kind: GoalKind
    arg1: int = 0
    arg2: int = 0
    arg3: int = 0

    def encode(self) -> Encoding:
        return (int(self.kind), self.arg1, self.arg2, self.arg3)

    @classmethod
    def decode(cls, enc: Encoding) -> "Goal":
        return decode_goal(enc)


def encode_goal(goal: Goal) -> Encoding:
    return goal.encode()


def decode_goal(enc: Encoding) -> Goal:
    """Validate an encoding and return the goal it describes."""
    if len(enc) != 4 or any(not 0 <= v <= 255 for v in enc):
        raise InvalidEncoding(f"goal encoding must be four bytes, got {enc!r}")
    kind, a1, a2, a3 = enc
    if kind == GoalKind.EMPTY:
        if (a1, a2, a3) != (0, 0, 0):
            raise InvalidEncoding("empty goal must be all zeros")
        return Goal(GoalKind.EMPTY)
    if kind > max(GoalKind):
        raise InvalidEncoding(f"unknown goal id {kind}")
    kind = GoalKind(kind)
    if kind == GoalKind.AGENT_ON_POSITION:
        if a3 != 0:
            raise InvalidEncoding("agent-on-position goal carries (row, col) only")
        return Goal(kind, a1, a2)
    if kind == GoalKind.TILE_ON_POSITION:
        _check_code(a1, "goal tile argument")
        return Goal(kind, a1, a2, a3)
    _check_code(a1, "goal argument a")
    if kind in PAIR_GOALS:
        _check_code(a2, "goal argument b")
        if a3 != 0:
            raise InvalidEncoding("pair goal carries two entity arguments only")
    elif (a2, a3) != (0, 0):
        raise InvalidEncoding(f"goal id {int(kind)} takes a single argument")
    return Goal(kind, a1, a2, a3)


def check_goal(
    grid: Grid,
    agent: AgentState,
    goal: Encoding,
    event: TriggerEvent,
) -> bool:
    """True when the goal predicate holds.  Pure: never mutates the state."""
    kind = goal[0]
    if kind == GoalKind.EMPTY or event.kind not in GOAL_GATES[kind]:
        return False
    h, w = grid.height, grid.width
    cells = grid.cells
    ar, ac = agent.position.row, agent.position.col

    if kind == GoalKind.AGENT_HOLD:
        return agent.pocket == goal[1]
    if kind == GoalKind.AGENT_ON_TILE:
        return cells[ar * w + ac] == goal[1]
    if kind == GoalKind.AGENT_ON_POSITION:
        return (ar, ac) == (goal[1], goal[2])
    if kind == GoalKind.TILE_ON_POSITION:
        r, c = goal[2], goal[3]
        return r < h and c < w and cells[r * w + c] == goal[1]
    if kind == GoalKind.AGENT_NEAR:
        return any(
            0 <= ar + dr < h and 0 <= ac + dc < w and cells[(ar + dr) * w + ac + dc] == goal[1]
            for dr, dc in NEAR_OFFSETS
        )
    if kind in DIRECTIONAL_GOAL_OFFSET and kind >= GoalKind.AGENT_NEAR_UP:
        dr, dc = DIRECTIONAL_GOAL_OFFSET[GoalKind(kind)]
        r, c = ar + dr, ac + dc
        return 0 <= r < h and 0 <= c < w and cells[r * w + c] == goal[1]

    # Tile-near family: does any a have b in the required relation?
    a, b = goal[1], goal[2]
    if kind == GoalKind.TILE_NEAR:
        offsets = NEAR_OFFSETS
    else:
        offsets = (DIRECTIONAL_GOAL_OFFSET[GoalKind(kind)],)
    pos = cells.find(a)
    while pos != -1:
        r, c = divmod(pos, w)
        for dr, dc in offsets:
            nr, nc = r + dr, c + dc
            if 0 <= nr < h and 0 <= nc < w and cells[nr * w + nc] == b:
                return True
        pos = cells.find(a, pos + 1)
    return False
