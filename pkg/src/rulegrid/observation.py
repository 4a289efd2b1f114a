"""Egocentric partial observations.

The agent sees a ``view_size`` x ``view_size`` window with itself at the
bottom-center cell, rotated so it always faces the top of the view.  Cells
beyond the grid read END_OF_MAP.  With ``see_through_walls`` off, cells
whose line of sight from the agent crosses a wall or a closed door read
UNSEEN.

Visibility is center-to-center line of sight computed with exact integer
arithmetic: a cell blocks the ray only if the open segment passes through
its open interior, so rays squeeze through diagonal corner gaps and the
result is identical on every platform.
"""

from __future__ import annotations

import numpy as np

from .core import AgentState, Color, Grid, Tile

OPAQUE_TILES = frozenset({Tile.WALL, Tile.DOOR_CLOSED, Tile.DOOR_LOCKED})

# forward and right-hand unit vectors per Direction
_FORWARD = ((-1, 0), (0, 1), (1, 0), (0, -1))
_RIGHT = ((0, 1), (1, 0), (0, -1), (-1, 0))


def view_world_coords(agent: AgentState, view_size: int) -> list[list[tuple[int, int]]]:
    """World (row, col) for each view cell, row 0 farthest ahead."""
    v = view_size
    r, c = agent.position.row, agent.position.col
    fr, fc = _FORWARD[agent.direction]
    rr, rc = _RIGHT[agent.direction]
    half = v // 2
    coords = []
    for i in range(v):
        ahead = (v - 1) - i
        row = []
        for j in range(v):
            lateral = j - half
            row.append((r + ahead * fr + lateral * rr, c + ahead * fc + lateral * rc))
        coords.append(row)
    return coords


def _segment_crosses_cell(p0r: int, p0c: int, dr: int, dc: int, cell_r: int, cell_c: int) -> bool:
    """Does the open segment pass through the open interior of the cell?

    Coordinates are doubled so cell centers are odd integers; all bounds are
    compared as exact rationals via cross-multiplication.
    """
    lo_n, lo_d = 0, 1  # running max of lower bounds on t
    hi_n, hi_d = 1, 1  # running min of upper bounds
    for p0, d, low_edge in ((p0r, dr, 2 * cell_r), (p0c, dc, 2 * cell_c)):
        high_edge = low_edge + 2
        if d == 0:
            if not low_edge < p0 < high_edge:
                return False
            continue
        a, b = low_edge - p0, high_edge - p0
        if d > 0:
            lo_cand, hi_cand = (a, d), (b, d)
        else:
            lo_cand, hi_cand = (-b, -d), (-a, -d)
        if lo_cand[0] * lo_d > lo_n * lo_cand[1]:
            lo_n, lo_d = lo_cand
        if hi_cand[0] * hi_d < hi_n * hi_cand[1]:
            hi_n, hi_d = hi_cand
    return lo_n * hi_d < hi_n * lo_d  # strictly non-empty open interval


def cell_visible(grid: Grid, r0: int, c0: int, r1: int, c1: int) -> bool:
    """Line of sight from (r0, c0) to (r1, c1); endpoints never block."""
    if (r0, c0) == (r1, c1):
        return True
    p0r, p0c = 2 * r0 + 1, 2 * c0 + 1
    dr, dc = 2 * (r1 - r0), 2 * (c1 - c0)
    w = grid.width
    for rr in range(min(r0, r1), max(r0, r1) + 1):
        for cc in range(min(c0, c1), max(c0, c1) + 1):
            if (rr, cc) in ((r0, c0), (r1, c1)):
                continue
            if grid.cells[rr * w + cc] >> 4 not in OPAQUE_TILES:
                continue
            if _segment_crosses_cell(p0r, p0c, dr, dc, rr, cc):
                return False
    return True


def observe(grid: Grid, agent: AgentState, view_size: int, see_through_walls: bool = True) -> np.ndarray:
    """(view_size, view_size, 2) uint8 array of [tile, color] channels."""
    v = view_size
    out = np.zeros((v, v, 2), dtype=np.uint8)  # END_OF_MAP by default
    coords = view_world_coords(agent, v)
    h, w = grid.height, grid.width
    ar, ac = agent.position.row, agent.position.col
    cells = grid.cells
    for i in range(v):
        for j in range(v):
            r, c = coords[i][j]
            if not (0 <= r < h and 0 <= c < w):
                continue
            if not see_through_walls and not cell_visible(grid, ar, ac, r, c):
                out[i, j, 0] = Tile.UNSEEN
                out[i, j, 1] = Color.UNSEEN
                continue
            code = cells[r * w + c]
            out[i, j, 0] = code >> 4
            out[i, j, 1] = code & 15
    return out
