"""Grid-world primitives: tile/color vocabularies, entity packing, agent pose.

Every cell of a grid holds exactly one entity, stored as a single byte code
``tile * 16 + color``.  The byte representation keeps states hashable and
cheap to copy, which the search oracle and the batched stepper both rely on.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

from .errors import GridFull, InvalidCode
from .rng import Key, random_words


class Tile(IntEnum):
    END_OF_MAP = 0
    UNSEEN = 1
    EMPTY = 2
    FLOOR = 3
    WALL = 4
    BALL = 5
    SQUARE = 6
    PYRAMID = 7
    GOAL = 8
    KEY = 9
    DOOR_LOCKED = 10
    DOOR_CLOSED = 11
    DOOR_OPEN = 12
    HEX = 13
    STAR = 14


class Color(IntEnum):
    END_OF_MAP = 0
    UNSEEN = 1
    EMPTY = 2
    RED = 3
    GREEN = 4
    BLUE = 5
    PURPLE = 6
    YELLOW = 7
    GREY = 8
    BLACK = 9
    ORANGE = 10
    WHITE = 11
    BROWN = 12
    PINK = 13


# Tiles the agent can carry in its pocket.  Goal squares and doors stay put.
PICKABLE_TILES = frozenset(
    {Tile.BALL, Tile.SQUARE, Tile.PYRAMID, Tile.KEY, Tile.HEX, Tile.STAR}
)

# Tiles the agent can stand on.  Goal squares are overlappable like in the
# classic single-room tasks; open doors behave as floor.
WALKABLE_TILES = frozenset({Tile.FLOOR, Tile.GOAL, Tile.DOOR_OPEN})

MAX_TILE = max(Tile)
MAX_COLOR = max(Color)
MAX_ENTITY_CODE = MAX_TILE * 16 + MAX_COLOR  # 237

# Plain floor and the outer wall, as byte codes.
FLOOR_CODE = Tile.FLOOR * 16 + Color.BLACK
WALL_CODE = Tile.WALL * 16 + Color.GREY

# Empty pocket sentinel; code 0 never encodes a real placed entity.
EMPTY_POCKET = 0


def pack_entity(tile: int, color: int) -> int:
    """Pack a (tile, color) pair into a one-byte entity code."""
    if not 0 <= tile <= MAX_TILE:
        raise InvalidCode(f"tile id {tile} outside [0, {MAX_TILE}]")
    if not 0 <= color <= MAX_COLOR:
        raise InvalidCode(f"color id {color} outside [0, {MAX_COLOR}]")
    return tile * 16 + color


def unpack_entity(code: int) -> "Entity":
    """Inverse of :func:`pack_entity`; rejects codes no pair maps to."""
    tile, color = divmod(code, 16)
    if not 0 <= tile <= MAX_TILE:
        raise InvalidCode(f"code {code}: tile part {tile} outside [0, {MAX_TILE}]")
    if color > MAX_COLOR:
        raise InvalidCode(f"code {code}: color part {color} outside [0, {MAX_COLOR}]")
    return Entity(Tile(tile), Color(color))


@dataclass(frozen=True, slots=True)
class Entity:
    tile: Tile
    color: Color

    @property
    def code(self) -> int:
        return self.tile * 16 + self.color

    @property
    def pickable(self) -> bool:
        return self.tile in PICKABLE_TILES


class Direction(IntEnum):
    """Facing of the agent; rows grow downwards, columns to the right."""

    UP = 0
    RIGHT = 1
    DOWN = 2
    LEFT = 3

    def turned_left(self) -> "Direction":
        return Direction((self - 1) % 4)

    def turned_right(self) -> "Direction":
        return Direction((self + 1) % 4)


# Row/column deltas indexed by Direction.
DIR_DELTAS = ((-1, 0), (0, 1), (1, 0), (0, -1))


@dataclass(frozen=True, slots=True)
class Position:
    row: int
    col: int

    def ahead(self, direction: Direction) -> "Position":
        dr, dc = DIR_DELTAS[direction]
        return Position(self.row + dr, self.col + dc)


@dataclass(frozen=True, slots=True)
class AgentState:
    """Agent pose plus the (at most one) entity held in the pocket."""

    position: Position
    direction: Direction
    pocket: int = EMPTY_POCKET  # entity code, 0 when empty


@dataclass(frozen=True, slots=True)
class Grid:
    """Immutable row-major byte matrix of entity codes."""

    height: int
    width: int
    cells: bytes

    def __post_init__(self) -> None:
        if not 1 <= self.height <= 255 or not 1 <= self.width <= 255:
            raise ValueError(f"grid dimensions {self.height}x{self.width} outside [1, 255]")
        if len(self.cells) != self.height * self.width:
            raise ValueError("cell buffer does not match grid dimensions")

    def code_at(self, row: int, col: int) -> int:
        return self.cells[row * self.width + col]

    def tile_at(self, row: int, col: int) -> int:
        return self.cells[row * self.width + col] >> 4

    def entity_at(self, row: int, col: int) -> Entity:
        return unpack_entity(self.code_at(row, col))

    def with_code(self, row: int, col: int, code: int) -> "Grid":
        buf = bytearray(self.cells)
        buf[row * self.width + col] = code
        return Grid(self.height, self.width, bytes(buf))

    def free_floor_cells(self) -> list[int]:
        """Flat indices of plain floor cells, in row-major order."""
        floor_low, floor_high = Tile.FLOOR * 16, Tile.FLOOR * 16 + 15
        return [i for i, c in enumerate(self.cells) if floor_low <= c <= floor_high]


def shuffled_free_cells(grid: Grid, key: Key) -> list[int]:
    """Free floor cells in a seeded random order (stable argsort of draws)."""
    free = grid.free_floor_cells()
    words = random_words(key, len(free))
    order = sorted(range(len(free)), key=words.__getitem__)
    return [free[i] for i in order]


def place_objects(grid: Grid, entities: tuple[int, ...], key: Key) -> Grid:
    """Place entity codes on distinct free floor cells chosen by a seeded shuffle.

    Raises GridFull when there are fewer free cells than entities.  Walls,
    doors and already-placed objects are never overwritten.
    """
    cells = shuffled_free_cells(grid, key)
    if len(entities) > len(cells):
        raise GridFull(f"{len(entities)} entities but only {len(cells)} free cells")
    buf = bytearray(grid.cells)
    for code, flat in zip(entities, cells):
        buf[flat] = code
    return Grid(grid.height, grid.width, bytes(buf))
