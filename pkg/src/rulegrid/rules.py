"""Production rules: trigger events, encodings, and the application pass.

A rule is stored as four bytes ``[kind, in_a, in_b, out]``.  Rules rewrite
the grid (or the pocket) when their trigger class matches the event emitted
by the last action and their condition holds.  A single pass scans rules in
encoding order once per event; each rule sees the effects of earlier
firings, and each rule fires at most once per event.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

from .core import AgentState, FLOOR_CODE, Grid, Position, Tile, unpack_entity
from .errors import InvalidCode, InvalidEncoding

Encoding = tuple[int, int, int, int]

EMPTY_RULE: Encoding = (0, 0, 0, 0)


class EventKind(IntEnum):
    MOVE = 0
    PICK_UP = 1
    PUT_DOWN = 2
    TOGGLE = 3


@dataclass(frozen=True, slots=True)
class TriggerEvent:
    """What the last action changed: its class, the cell, and the entity."""

    kind: EventKind
    position: Position
    entity: int = 0


class RuleKind(IntEnum):
    EMPTY = 0
    AGENT_HOLD = 1
    AGENT_NEAR = 2
    TILE_NEAR = 3
    TILE_NEAR_UP = 4
    TILE_NEAR_RIGHT = 5
    TILE_NEAR_DOWN = 6
    TILE_NEAR_LEFT = 7
    AGENT_NEAR_UP = 8
    AGENT_NEAR_RIGHT = 9
    AGENT_NEAR_DOWN = 10
    AGENT_NEAR_LEFT = 11


PAIR_INPUT_RULES = frozenset(
    {RuleKind.TILE_NEAR, RuleKind.TILE_NEAR_UP, RuleKind.TILE_NEAR_RIGHT,
     RuleKind.TILE_NEAR_DOWN, RuleKind.TILE_NEAR_LEFT}
)

# Which event classes each rule kind reacts to.
RULE_GATES: dict[int, frozenset[EventKind]] = {
    RuleKind.AGENT_HOLD: frozenset({EventKind.PICK_UP}),
    RuleKind.AGENT_NEAR: frozenset({EventKind.MOVE, EventKind.PICK_UP, EventKind.PUT_DOWN}),
    RuleKind.TILE_NEAR: frozenset({EventKind.PUT_DOWN}),
    RuleKind.TILE_NEAR_UP: frozenset({EventKind.PUT_DOWN}),
    RuleKind.TILE_NEAR_RIGHT: frozenset({EventKind.PUT_DOWN}),
    RuleKind.TILE_NEAR_DOWN: frozenset({EventKind.PUT_DOWN}),
    RuleKind.TILE_NEAR_LEFT: frozenset({EventKind.PUT_DOWN}),
    RuleKind.AGENT_NEAR_UP: frozenset({EventKind.MOVE, EventKind.PICK_UP, EventKind.PUT_DOWN}),
    RuleKind.AGENT_NEAR_RIGHT: frozenset({EventKind.MOVE, EventKind.PICK_UP, EventKind.PUT_DOWN}),
    RuleKind.AGENT_NEAR_DOWN: frozenset({EventKind.MOVE, EventKind.PICK_UP, EventKind.PUT_DOWN}),
    RuleKind.AGENT_NEAR_LEFT: frozenset({EventKind.MOVE, EventKind.PICK_UP, EventKind.PUT_DOWN}),
}

# Offsets for the "near" relation, in row-major scan order (up, left, right,
# down).  Deterministic tie-breaking depends on this ordering.
NEAR_OFFSETS = ((-1, 0), (0, -1), (0, 1), (1, 0))

# Directional variants: where input b (or the agent's neighbor a) must sit
# relative to the reference cell.  "Up" means one row above, and so on.
DIRECTIONAL_OFFSET = {
    RuleKind.TILE_NEAR_UP: (-1, 0),
    RuleKind.TILE_NEAR_RIGHT: (0, 1),
    RuleKind.TILE_NEAR_DOWN: (1, 0),
    RuleKind.TILE_NEAR_LEFT: (0, -1),
    RuleKind.AGENT_NEAR_UP: (-1, 0),
    RuleKind.AGENT_NEAR_RIGHT: (0, 1),
    RuleKind.AGENT_NEAR_DOWN: (1, 0),
    RuleKind.AGENT_NEAR_LEFT: (0, -1),
}


AGENT_NEAR_DIRECTIONAL = frozenset(
    {RuleKind.AGENT_NEAR_UP, RuleKind.AGENT_NEAR_RIGHT,
     RuleKind.AGENT_NEAR_DOWN, RuleKind.AGENT_NEAR_LEFT}
)


def _check_code(value: int, what: str) -> None:
    if value == 0:
        raise InvalidEncoding(f"{what} must be a non-empty entity code")
    try:
        unpack_entity(value)
    except InvalidCode as exc:
        raise InvalidEncoding(f"{what}: {exc}") from exc


@dataclass(frozen=True, slots=True)
class Rule:
    kind: RuleKind
    in_a: int = 0
    in_b: int = 0
    out: int = 0

    def encode(self) -> Encoding:
        return (int(self.kind), self.in_a, self.in_b, self.out)

    @classmethod
    def decode(cls, enc: Encoding) -> "Rule":
        return decode_rule(enc)


def encode_rule(rule: Rule) -> Encoding:
    return rule.encode()


def decode_rule(enc: Encoding) -> Rule:
    """Validate an encoding and return the rule it describes."""
    if len(enc) != 4 or any(not 0 <= v <= 255 for v in enc):
        raise InvalidEncoding(f"rule encoding must be four bytes, got {enc!r}")
    kind, in_a, in_b, out = enc
    if kind == RuleKind.EMPTY:
        if (in_a, in_b, out) != (0, 0, 0):
            raise InvalidEncoding("empty rule must be all zeros")
        return Rule(RuleKind.EMPTY)
    if kind > max(RuleKind):
        raise InvalidEncoding(f"unknown rule id {kind}")
    kind = RuleKind(kind)
    _check_code(in_a, "rule input a")
    _check_code(out, "rule output")
    if kind in PAIR_INPUT_RULES:
        _check_code(in_b, "rule input b")
    elif in_b != 0:
        raise InvalidEncoding(f"rule id {int(kind)} takes a single input, in_b must be 0")
    return Rule(kind, in_a, in_b, out)


def apply_rules(
    grid: Grid,
    agent: AgentState,
    rules: tuple[Encoding, ...],
    event: TriggerEvent,
) -> tuple[Grid, AgentState]:
    """Run one rule pass for ``event``; returns the rewritten grid and agent."""
    if not rules:
        return grid, agent
    h, w = grid.height, grid.width
    buf: bytearray | None = None
    cells: bytes | bytearray = grid.cells
    pocket = agent.pocket
    ar, ac = agent.position.row, agent.position.col

    for kind, in_a, in_b, out in rules:
        if kind == RuleKind.EMPTY or event.kind not in RULE_GATES[kind]:
            continue

        if kind == RuleKind.AGENT_HOLD:
            if pocket == in_a:
                # Floor-tile outputs mean the held object just vanishes.
                pocket = 0 if out >> 4 == Tile.FLOOR else out
            continue

        if kind == RuleKind.AGENT_NEAR:
            for dr, dc in NEAR_OFFSETS:
                r, c = ar + dr, ac + dc
                if 0 <= r < h and 0 <= c < w and cells[r * w + c] == in_a:
                    if buf is None:
                        cells = buf = bytearray(cells)
                    buf[r * w + c] = out
                    break
            continue

        if kind in AGENT_NEAR_DIRECTIONAL:
            # Agent-relative directional variant: a at a fixed offset.
            dr, dc = DIRECTIONAL_OFFSET[kind]
            r, c = ar + dr, ac + dc
            if 0 <= r < h and 0 <= c < w and cells[r * w + c] == in_a:
                if buf is None:
                    cells = buf = bytearray(cells)
                buf[r * w + c] = out
            continue

        # Tile-near family: find the first a (row-major) with b alongside.
        if kind == RuleKind.TILE_NEAR:
            offsets = NEAR_OFFSETS
        else:
            offsets = (DIRECTIONAL_OFFSET[kind],)
        search = bytes(cells)
        pos = search.find(in_a)
        while pos != -1:
            r, c = divmod(pos, w)
            hit = None
            for dr, dc in offsets:
                nr, nc = r + dr, c + dc
                if 0 <= nr < h and 0 <= nc < w and search[nr * w + nc] == in_b:
                    hit = nr * w + nc
                    break
            if hit is not None:
                if buf is None:
                    cells = buf = bytearray(cells)
                buf[pos] = out
                buf[hit] = FLOOR_CODE
                break
            pos = search.find(in_a, pos + 1)

    new_grid = grid if buf is None else Grid(h, w, bytes(buf))
    new_agent = agent if pocket == agent.pocket else AgentState(agent.position, agent.direction, pocket)
    return new_grid, new_agent
