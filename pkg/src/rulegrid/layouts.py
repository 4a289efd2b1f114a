"""Room layouts: bordered grids divided into 1, 2, 4, 6 or 9 rooms.

Dividing walls carry one closed door per shared wall segment.  Door
positions and colors are drawn from the reset key, except in the six-room
layout where positions are pinned to segment midpoints (colors still vary).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

from .core import Color, FLOOR_CODE, Grid, Tile, WALL_CODE, pack_entity
from .errors import LayoutTooSmall
from .rng import Key, random_words


class Layout(IntEnum):
    """Number of rooms."""

    R1 = 1
    R2 = 2
    R4 = 4
    R6 = 6
    R9 = 9


# (room rows, room cols) per layout.
ROOM_GRID = {
    Layout.R1: (1, 1),
    Layout.R2: (1, 2),
    Layout.R4: (2, 2),
    Layout.R6: (2, 3),
    Layout.R9: (3, 3),
}

# Colors objects and doors are generated with: everything except the
# sentinel colors and BLACK (reserved for plain floor).
GENERATION_COLORS = (
    Color.RED, Color.GREEN, Color.BLUE, Color.PURPLE, Color.YELLOW,
    Color.GREY, Color.ORANGE, Color.WHITE, Color.BROWN, Color.PINK,
)


def _wall_lines(size: int, rooms: int) -> list[int]:
    """Wall coordinates dividing ``size`` cells into ``rooms`` spans."""
    return [i * (size - 1) // rooms for i in range(1, rooms)]


@dataclass(frozen=True)
class LayoutPlan:
    """Static geometry of a layout: walls and door segments, no randomness."""

    height: int
    width: int
    wall_rows: tuple[int, ...]
    wall_cols: tuple[int, ...]
    # Each segment is the tuple of flat cell indices a door may occupy.
    door_segments: tuple[tuple[int, ...], ...]
    fixed_doors: bool  # six-room layout pins doors to segment midpoints

    def base_cells(self) -> bytes:
        """Grid bytes with border and dividing walls, before doors."""
        h, w = self.height, self.width
        buf = bytearray(h * w)
        for r in range(h):
            for c in range(w):
                edge = r in (0, h - 1) or c in (0, w - 1)
                wall = r in self.wall_rows or c in self.wall_cols
                buf[r * w + c] = WALL_CODE if edge or wall else FLOOR_CODE
        return bytes(buf)


def plan_layout(layout: Layout, height: int, width: int) -> LayoutPlan:
    """Compute wall lines and door segments; raises LayoutTooSmall."""
    room_rows, room_cols = ROOM_GRID[Layout(layout)]
    if height < 4 * room_rows + 1 or width < 4 * room_cols + 1:
        raise LayoutTooSmall(
            f"{height}x{width} cannot hold {room_rows}x{room_cols} rooms"
        )
    wall_rows = _wall_lines(height, room_rows)
    wall_cols = _wall_lines(width, room_cols)
    row_edges = [0, *wall_rows, height - 1]
    col_edges = [0, *wall_cols, width - 1]

    segments: list[tuple[int, ...]] = []
    # Vertical walls first (between horizontally adjacent rooms), scanned by
    # room row then wall column; then horizontal walls by wall row then room
    # column.  This enumeration order fixes the door draw sequence.
    for i in range(room_rows):
        top, bottom = row_edges[i], row_edges[i + 1]
        for wc in wall_cols:
            segments.append(tuple(r * width + wc for r in range(top + 1, bottom)))
    for wr in wall_rows:
        for j in range(room_cols):
            left, right = col_edges[j], col_edges[j + 1]
            segments.append(tuple(wr * width + c for c in range(left + 1, right)))

    return LayoutPlan(
        height=height,
        width=width,
        wall_rows=tuple(wall_rows),
        wall_cols=tuple(wall_cols),
        door_segments=tuple(segments),
        fixed_doors=Layout(layout) == Layout.R6,
    )


def place_doors(plan: LayoutPlan, key: Key) -> bytes:
    """Base cells with one closed door per segment, drawn from ``key``.

    Two words are drawn per segment (position, color) in segment order, so
    the scalar and batched reset paths consume identical streams.
    """
    buf = bytearray(plan.base_cells())
    words = random_words(key, 2 * len(plan.door_segments))
    for s, segment in enumerate(plan.door_segments):
        pos = len(segment) // 2 if plan.fixed_doors else words[2 * s] % len(segment)
        color = GENERATION_COLORS[words[2 * s + 1] % len(GENERATION_COLORS)]
        buf[segment[pos]] = pack_entity(Tile.DOOR_CLOSED, color)
    return bytes(buf)


def build_layout(layout: Layout, height: int, width: int, key: Key) -> Grid:
    """Bordered grid with dividing walls and one closed door per shared wall."""
    plan = plan_layout(layout, height, width)
    return Grid(height, width, place_doors(plan, key))
