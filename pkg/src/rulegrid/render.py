"""ASCII and RGB rendering of states and observations.

Sprites are built procedurally from a few geometric masks, cached per
(tile, color, pixel size), and never touched again, so two renders of the
same thing are byte-identical in any process.  The 224x224 observation
image path reuses the same sprites; when the view size does not divide
224 the image is centered and the margin takes the UNSEEN shade.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np

from .core import Color, Direction, Tile
from .env import EnvState

IMAGE_SIDE = 224

_TILE_GLYPH = {
    Tile.END_OF_MAP: "?",
    Tile.UNSEEN: "~",
    Tile.EMPTY: " ",
    Tile.FLOOR: ".",
    Tile.WALL: "#",
    Tile.BALL: "b",
    Tile.SQUARE: "s",
    Tile.PYRAMID: "p",
    Tile.GOAL: "G",
    Tile.KEY: "k",
    Tile.DOOR_LOCKED: "L",
    Tile.DOOR_CLOSED: "D",
    Tile.DOOR_OPEN: "/",
    Tile.HEX: "h",
    Tile.STAR: "*",
}

_AGENT_GLYPH = {
    Direction.UP: "^",
    Direction.RIGHT: ">",
    Direction.DOWN: "v",
    Direction.LEFT: "<",
}

# One RGB triple per color name.  The exact values are house style; only
# the name-to-hue correspondence matters to consumers.
_COLOR_RGB = {
    Color.END_OF_MAP: (0, 0, 0),
    Color.UNSEEN: (12, 12, 12),
    Color.EMPTY: (0, 0, 0),
    Color.RED: (220, 50, 50),
    Color.GREEN: (60, 180, 75),
    Color.BLUE: (65, 105, 225),
    Color.PURPLE: (145, 70, 200),
    Color.YELLOW: (235, 200, 50),
    Color.GREY: (150, 150, 150),
    Color.BLACK: (25, 25, 25),
    Color.ORANGE: (240, 140, 40),
    Color.WHITE: (245, 245, 245),
    Color.BROWN: (150, 100, 60),
    Color.PINK: (240, 130, 180),
}

_BG = (30, 30, 30)
_GRID_LINE = (45, 45, 45)
_UNSEEN_SHADE = _COLOR_RGB[Color.UNSEEN]


def render_ascii(state: EnvState) -> str:
    """One glyph per cell, the agent drawn over its cell, then a legend."""
    grid = state.grid
    rows = []
    for r in range(grid.height):
        line = []
        for c in range(grid.width):
            line.append(_TILE_GLYPH[Tile(grid.tile_at(r, c))])
        rows.append(line)
    pos = state.agent.position
    rows[pos.row][pos.col] = _AGENT_GLYPH[Direction(state.agent.direction)]
    legend = (
        "agent ^>v<  wall #  floor .  ball b  square s  pyramid p  goal G  "
        "key k  locked L  closed D  open /  hex h  star *"
    )
    pocket = state.agent.pocket
    footer = f"pocket: {'empty' if pocket == 0 else pocket}  steps: {state.step_count}"
    return "\n".join("".join(line) for line in rows) + "\n" + legend + "\n" + footer + "\n"


# -- sprites ----------------------------------------------------------------

_SPRITE_CACHE: dict[tuple[int, int, int], np.ndarray] = {}


def _shape_masks(px: int):
    """Center-relative coordinate grids used by every sprite shape."""
    y, x = np.mgrid[0:px, 0:px]
    cy = cx = (px - 1) / 2.0
    return y, x, (y - cy) / px, (x - cx) / px


def _paint(canvas: np.ndarray, mask: np.ndarray, rgb: tuple[int, int, int]) -> None:
    canvas[mask] = rgb


def _build_sprite(tile: int, color: int, px: int) -> np.ndarray:
    rgb = _COLOR_RGB[Color(color)]
    canvas = np.empty((px, px, 3), dtype=np.uint8)
    canvas[:] = _BG
    y, x, dy, dx = _shape_masks(px)
    tile = Tile(tile)

    if tile == Tile.END_OF_MAP:
        canvas[:] = (0, 0, 0)
    elif tile == Tile.UNSEEN:
        canvas[:] = _UNSEEN_SHADE
    elif tile == Tile.EMPTY:
        canvas[:] = (0, 0, 0)
    elif tile == Tile.FLOOR:
        # Tint the grid line with the floor color so the sprite stays a
        # bijective function of the entity code.
        line = tuple((g + v) // 2 for g, v in zip(_GRID_LINE, rgb))
        canvas[-1, :] = line
        canvas[:, -1] = line
    elif tile == Tile.WALL:
        canvas[:] = rgb
    elif tile == Tile.BALL:
        _paint(canvas, dy * dy + dx * dx <= 0.35 * 0.35, rgb)
    elif tile == Tile.SQUARE:
        _paint(canvas, (np.abs(dy) <= 0.30) & (np.abs(dx) <= 0.30), rgb)
    elif tile == Tile.PYRAMID:
        _paint(canvas, (dy >= -0.35) & (dy <= 0.35) & (np.abs(dx) <= (dy + 0.35) / 2), rgb)
    elif tile == Tile.GOAL:
        dim = tuple(v // 2 for v in rgb)
        canvas[:] = dim
        edge = (y < px // 8 + 1) | (y >= px - px // 8 - 1) | (x < px // 8 + 1) | (x >= px - px // 8 - 1)
        _paint(canvas, edge, rgb)
    elif tile == Tile.KEY:
        _paint(canvas, (np.abs(dx) <= 0.13) & (dy >= -0.15) & (dy <= 0.38), rgb)
        ring = dx * dx + (dy + 0.22) ** 2
        _paint(canvas, (ring <= 0.18 * 0.18) & (ring >= 0.08 * 0.08), rgb)
        _paint(canvas, (np.abs(dy - 0.30) <= 0.05) & (dx >= 0.0) & (dx <= 0.2), rgb)
    elif tile in (Tile.DOOR_LOCKED, Tile.DOOR_CLOSED, Tile.DOOR_OPEN):
        frame = (np.abs(dy) >= 0.36) | (np.abs(dx) >= 0.36)
        _paint(canvas, frame, rgb)
        if tile == Tile.DOOR_LOCKED:
            _paint(canvas, ~frame, tuple(v // 2 for v in rgb))
            _paint(canvas, dy * dy + dx * dx <= 0.07 * 0.07, (0, 0, 0))
        elif tile == Tile.DOOR_CLOSED:
            _paint(canvas, ~frame, tuple(v * 3 // 4 for v in rgb))
            _paint(canvas, ((dx - 0.22) ** 2 + dy * dy) <= 0.06 * 0.06, (0, 0, 0))
    elif tile == Tile.HEX:
        _paint(canvas, (np.abs(dy) <= 0.32) & (np.abs(dx) + 0.5 * np.abs(dy) <= 0.38), rgb)
    elif tile == Tile.STAR:
        spokes = (np.abs(dx) <= 0.09) | (np.abs(dy) <= 0.09)
        _paint(canvas, spokes & (np.abs(dx) + np.abs(dy) <= 0.42), rgb)
        _paint(canvas, np.abs(dx) + np.abs(dy) <= 0.16, rgb)
    return canvas


def sprite(tile: int, color: int, px: int) -> np.ndarray:
    """Cached (px, px, 3) uint8 sprite for one entity code; pre: px >= 4."""
    if px < 4:
        raise ValueError(f"tile_px must be >= 4, got {px}")
    key = (int(tile), int(color), px)
    cached = _SPRITE_CACHE.get(key)
    if cached is None:
        cached = _build_sprite(*key)
        cached.setflags(write=False)
        _SPRITE_CACHE[key] = cached
    return cached


def _agent_overlay(base: np.ndarray, direction: int) -> np.ndarray:
    """The cell sprite with a red agent triangle stamped over it."""
    px = base.shape[0]
    out = base.copy()
    _, _, dy, dx = _shape_masks(px)
    mask = (dy >= -0.38) & (dy <= 0.38) & (np.abs(dx) <= (dy + 0.38) / 2)
    # The base mask points up; rot90 is counterclockwise, directions wind
    # clockwise (UP, RIGHT, DOWN, LEFT), so negate.
    mask = np.rot90(mask, k=(-int(direction)) % 4)
    out[mask] = _COLOR_RGB[Color.RED]
    return out


def render_rgb(target, tile_px: int = 8) -> np.ndarray:
    """RGB image of a state or a symbolic observation.

    States render as (H*tile_px, W*tile_px, 3) with the agent drawn;
    observations, given as an (N, N, 2) array of [tile, color] pairs,
    render without an agent.
    """
    if isinstance(target, EnvState):
        grid = target.grid
        h, w = grid.height, grid.width
        image = np.empty((h * tile_px, w * tile_px, 3), dtype=np.uint8)
        for r in range(h):
            for c in range(w):
                code = grid.code_at(r, c)
                image[r * tile_px:(r + 1) * tile_px, c * tile_px:(c + 1) * tile_px] = (
                    sprite(code >> 4, code & 15, tile_px)
                )
        pos, direction = target.agent.position, target.agent.direction
        cell = image[pos.row * tile_px:(pos.row + 1) * tile_px,
                     pos.col * tile_px:(pos.col + 1) * tile_px]
        cell[:] = _agent_overlay(sprite(grid.tile_at(pos.row, pos.col),
                                        grid.code_at(pos.row, pos.col) & 15, tile_px), direction)
        return image

    obs = np.asarray(target)
    if obs.ndim != 3 or obs.shape[2] != 2:
        raise ValueError(f"expected an (N, N, 2) observation, got shape {obs.shape}")
    h, w = obs.shape[:2]
    image = np.empty((h * tile_px, w * tile_px, 3), dtype=np.uint8)
    for r in range(h):
        for c in range(w):
            image[r * tile_px:(r + 1) * tile_px, c * tile_px:(c + 1) * tile_px] = (
                sprite(int(obs[r, c, 0]), int(obs[r, c, 1]), tile_px)
            )
    return image


def image_observation(obs: np.ndarray) -> np.ndarray:
    """Render a symbolic observation as a fixed 224x224x3 image.

    The per-cell pixel size is IMAGE_SIDE // view_size; any remainder
    becomes a centered margin in the UNSEEN shade.
    """
    obs = np.asarray(obs)
    if obs.ndim != 3 or obs.shape[0] != obs.shape[1] or obs.shape[2] != 2:
        raise ValueError(f"expected a square (N, N, 2) observation, got shape {obs.shape}")
    view = obs.shape[0]
    px = IMAGE_SIDE // view
    if px < 4:
        raise ValueError(f"view size {view} leaves tiles under 4px")
    image = np.empty((IMAGE_SIDE, IMAGE_SIDE, 3), dtype=np.uint8)
    image[:] = _UNSEEN_SHADE
    offset = (IMAGE_SIDE - view * px) // 2
    inner = render_rgb(obs, px)
    image[offset:offset + view * px, offset:offset + view * px] = inner
    return image


def decode_image_observation(image: np.ndarray, view: int) -> np.ndarray:
    """Nearest-sprite decoding: recover the symbolic observation.

    The inverse of image_observation for any observation it produced;
    useful as an oracle that the rendering keeps cells distinguishable.
    """
    px = IMAGE_SIDE // view
    offset = (IMAGE_SIDE - view * px) // 2
    templates = []
    codes = []
    sentinel = (Tile.END_OF_MAP, Tile.UNSEEN, Tile.EMPTY)
    for tile in Tile:
        for color in Color:
            # Sentinel tiles render color-blind and only ever appear with
            # their own color id, so skip the indistinguishable pairs.
            if tile in sentinel and int(color) != int(tile):
                continue
            templates.append(sprite(tile, color, px).astype(np.int32))
            codes.append((int(tile), int(color)))
    stack = np.stack(templates)
    out = np.zeros((view, view, 2), dtype=np.uint8)
    for r in range(view):
        for c in range(view):
            cell = image[offset + r * px:offset + (r + 1) * px,
                         offset + c * px:offset + (c + 1) * px].astype(np.int32)
            errs = np.abs(stack - cell).sum(axis=(1, 2, 3))
            out[r, c] = codes[int(errs.argmin())]
    return out


# -- files ------------------------------------------------------------------


def ppm_bytes(image: np.ndarray) -> bytes:
    """P6 byte encoding: header then raw RGB, rows top to bottom."""
    image = np.ascontiguousarray(image, dtype=np.uint8)
    h, w = image.shape[:2]
    return b"P6\n%d %d\n255\n" % (w, h) + image.tobytes()


def read_ppm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.readline().strip()
        if magic != b"P6":
            raise OSError(f"{path}: not a P6 PPM file")
        w, h = map(int, fh.readline().split())
        fh.readline()  # maxval, always 255 here
        data = fh.read(h * w * 3)
    return np.frombuffer(data, dtype=np.uint8).reshape(h, w, 3)


def write_image(path, image: np.ndarray) -> None:
    """Write an RGB buffer; .png uses PIL when installed, else PPM format."""
    path = Path(path)
    if path.suffix.lower() == ".png":
        try:
            from PIL import Image
        except ImportError:
            pass
        else:
            Image.fromarray(np.ascontiguousarray(image, dtype=np.uint8), "RGB").save(path, "PNG")
            return
    path.write_bytes(ppm_bytes(image))
