"""Egocentric views: rotation, map edges, and wall occlusion.

The occlusion reference below solves the sight-line/cell intersection
parametrically with exact rationals, independent of the integer clipping
the package uses, so the two can disagree only if one of them is wrong.
"""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rulegrid.core import (
    AgentState,
    Color,
    Direction,
    FLOOR_CODE,
    Grid,
    Position,
    Tile,
    WALL_CODE,
    pack_entity,
)
from rulegrid.observation import OPAQUE_TILES, cell_visible, observe, view_world_coords

UNSEEN_PAIR = (int(Tile.UNSEEN), int(Color.UNSEEN))


def _axis_window(a0, da, lo, hi):
    """Open t-interval where a0 + t*da lies strictly inside (lo, hi)."""
    if da == 0:
        return (Fraction(-1), Fraction(2)) if lo < a0 < hi else None
    t1, t2 = Fraction(lo - a0, da), Fraction(hi - a0, da)
    return (min(t1, t2), max(t1, t2))


def los_reference(grid, r0, c0, r1, c1):
    """Sight line between cell centers, blocked by opaque cell interiors."""
    if (r0, c0) == (r1, c1):
        return True
    y0, x0 = Fraction(2 * r0 + 1, 2), Fraction(2 * c0 + 1, 2)
    y1, x1 = Fraction(2 * r1 + 1, 2), Fraction(2 * c1 + 1, 2)
    dy, dx = y1 - y0, x1 - x0
    for r in range(grid.height):
        for c in range(grid.width):
            if (r, c) in ((r0, c0), (r1, c1)):
                continue
            if grid.tile_at(r, c) not in OPAQUE_TILES:
                continue
            wy = _axis_window(y0, dy, r, r + 1)
            wx = _axis_window(x0, dx, c, c + 1)
            if wy is None or wx is None:
                continue
            lo = max(wy[0], wx[0], Fraction(0))
            hi = min(wy[1], wx[1], Fraction(1))
            if lo < hi:
                return False
    return True


def floor_grid(h, w, codes=()):
    buf = bytearray([FLOOR_CODE]) * (h * w)
    for (r, c), code in codes:
        buf[r * w + c] = code
    return Grid(h, w, bytes(buf))


def agent(r, c, d):
    return AgentState(Position(r, c), d)


# --- geometry of the view window -----------------------------------------

def test_agent_cell_is_bottom_center():
    coords = view_world_coords(agent(4, 6, Direction.UP), 5)
    assert coords[4][2] == (4, 6)
    coords = view_world_coords(agent(4, 6, Direction.LEFT), 3)
    assert coords[2][1] == (4, 6)


def test_facing_up_is_literal_crop():
    grid = floor_grid(9, 9, [((2, 4), pack_entity(Tile.BALL, Color.RED))])
    obs = observe(grid, agent(6, 4, Direction.UP), 5)
    # world rows 2..6, cols 2..6; the ball sits at view (0, 2)
    assert tuple(obs[0, 2]) == (Tile.BALL, Color.RED)
    assert tuple(obs[4, 2]) == (Tile.FLOOR, Color.BLACK)
    assert obs.shape == (5, 5, 2) and obs.dtype == np.uint8


@pytest.mark.parametrize(
    "direction,view_cell",
    [
        (Direction.UP, (2, 0)),     # marker is to the agent's left
        (Direction.DOWN, (2, 2)),   # ... to its right
        (Direction.LEFT, (1, 1)),   # ... dead ahead
    ],
)
def test_rotation_maps_world_to_agent_frame(direction, view_cell):
    marker = pack_entity(Tile.STAR, Color.PURPLE)
    grid = floor_grid(5, 5, [((2, 1), marker)])
    obs = observe(grid, agent(2, 2, direction), 3)
    assert tuple(obs[view_cell]) == (Tile.STAR, Color.PURPLE)


def test_cells_behind_agent_not_in_view():
    marker = pack_entity(Tile.STAR, Color.PURPLE)
    grid = floor_grid(5, 5, [((2, 1), marker)])
    obs = observe(grid, agent(2, 2, Direction.RIGHT), 3)
    assert not np.any(obs[..., 0] == Tile.STAR)


def test_out_of_map_cells_are_end_of_map():
    grid = floor_grid(4, 4)
    obs = observe(grid, agent(0, 0, Direction.UP), 5)
    # everything ahead is off the map, as is everything left of the agent
    assert np.all(obs[:4] == Tile.END_OF_MAP)
    assert np.all(obs[4, :2] == Tile.END_OF_MAP)
    assert tuple(obs[4, 2]) == (Tile.FLOOR, Color.BLACK)


# --- occlusion ------------------------------------------------------------

def test_see_through_walls_skips_occlusion():
    grid = floor_grid(7, 7, [((3, 3), WALL_CODE)])
    a = agent(5, 3, Direction.UP)
    lit = observe(grid, a, 5, see_through_walls=True)
    assert not np.any(lit[..., 0] == Tile.UNSEEN)


def test_single_wall_shadow_frozen():
    # Single wall two cells ahead; its shadow widens with distance.
    grid = floor_grid(7, 7, [((3, 3), WALL_CODE)])
    obs = observe(grid, agent(6, 3, Direction.UP), 7, see_through_walls=False)
    expected_unseen = {(0, 2), (0, 3), (0, 4), (1, 3), (2, 3)}
    actual = {(r, c) for r in range(7) for c in range(7) if tuple(obs[r, c]) == UNSEEN_PAIR}
    assert actual == expected_unseen
    assert tuple(obs[3, 3]) == (Tile.WALL, Color.GREY)  # the wall itself shows


def test_frozen_shadow_matches_reference():
    grid = floor_grid(7, 7, [((3, 3), WALL_CODE)])
    for r in range(7):
        for c in range(7):
            assert cell_visible(grid, 6, 3, r, c) == los_reference(grid, 6, 3, r, c)


def test_corner_touch_does_not_block():
    # Two opaque cells meeting only at a corner leave the diagonal open.
    grid = floor_grid(5, 5, [((2, 2), WALL_CODE), ((1, 1), WALL_CODE)])
    assert cell_visible(grid, 2, 1, 1, 2)
    assert los_reference(grid, 2, 1, 1, 2)
    # ... but a straight pair blocks what lies beyond.
    assert not cell_visible(grid, 2, 1, 2, 3)


def test_doors_block_until_opened():
    closed = pack_entity(Tile.DOOR_CLOSED, Color.RED)
    opened = pack_entity(Tile.DOOR_OPEN, Color.RED)
    shut = floor_grid(5, 5, [((2, 2), closed)])
    ajar = floor_grid(5, 5, [((2, 2), opened)])
    assert not cell_visible(shut, 4, 2, 0, 2)
    assert cell_visible(ajar, 4, 2, 0, 2)


entity_codes = st.tuples(
    st.sampled_from(sorted(set(Tile) - {Tile.END_OF_MAP, Tile.UNSEEN, Tile.EMPTY})),
    st.sampled_from(sorted(set(Color) - {Color.END_OF_MAP, Color.UNSEEN, Color.EMPTY})),
).map(lambda tc: pack_entity(*tc))


@st.composite
def grid_and_agent(draw, max_side=7):
    h = draw(st.integers(3, max_side))
    w = draw(st.integers(3, max_side))
    cells = bytes(draw(st.lists(entity_codes, min_size=h * w, max_size=h * w)))
    r = draw(st.integers(0, h - 1))
    c = draw(st.integers(0, w - 1))
    d = draw(st.sampled_from(list(Direction)))
    return Grid(h, w, cells), agent(r, c, d)


@given(ga=grid_and_agent(), view=st.sampled_from([3, 5, 7]), through=st.booleans())
@settings(max_examples=150, deadline=None)
def test_observation_values_always_legal(ga, view, through):
    grid, a = ga
    obs = observe(grid, a, view, see_through_walls=through)
    assert obs.shape == (view, view, 2)
    assert obs[..., 0].max() <= max(Tile) and obs[..., 1].max() <= max(Color)
    coords = view_world_coords(a, view)
    for vr in range(view):
        for vc in range(view):
            r, c = coords[vr][vc]
            if not (0 <= r < grid.height and 0 <= c < grid.width):
                assert tuple(obs[vr, vc]) == (Tile.END_OF_MAP, Color.END_OF_MAP)
            elif through:
                assert tuple(obs[vr, vc]) == tuple(divmod(grid.cells[r * grid.width + c], 16))


@given(ga=grid_and_agent(max_side=6))
@settings(max_examples=60, deadline=None)
def test_visibility_matches_reference(ga):
    grid, a = ga
    r0, c0 = a.position.row, a.position.col
    for r in range(grid.height):
        for c in range(grid.width):
            assert cell_visible(grid, r0, c0, r, c) == los_reference(grid, r0, c0, r, c), (
                f"disagree at ({r}, {c}) from ({r0}, {c0})"
            )


@given(ga=grid_and_agent(max_side=6), target=st.tuples(st.integers(0, 5), st.integers(0, 5)))
@settings(max_examples=100, deadline=None)
def test_visibility_is_symmetric(ga, target):
    grid, a = ga
    r1, c1 = target
    if r1 >= grid.height or c1 >= grid.width:
        return
    r0, c0 = a.position.row, a.position.col
    assert cell_visible(grid, r0, c0, r1, c1) == cell_visible(grid, r1, c1, r0, c0)
