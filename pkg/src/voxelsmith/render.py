"""Isometric PNG render for people to look at; nothing parses it."""
from __future__ import annotations

import hashlib
from pathlib import Path

from .world import BoundingBox, WorldState

TILE = 12

_COLOURS = {
    "oak_planks": (162, 130, 78), "spruce_planks": (114, 84, 48), "dark_oak_planks": (66, 43, 20),
    "oak_log": (109, 85, 50), "stone_bricks": (122, 121, 122), "cobblestone": (127, 127, 127),
    "stone": (125, 125, 125), "bricks": (150, 97, 83), "glass_pane": (200, 230, 240),
    "glass": (200, 230, 240), "snow_block": (249, 254, 254), "ice": (145, 183, 253),
    "packed_ice": (141, 180, 250), "blue_ice": (116, 167, 253), "dirt": (134, 96, 67),
    "redstone_lamp": (173, 104, 61), "daylight_detector": (130, 116, 94), "oak_leaves": (60, 120, 40),
}


def colour(block: str) -> tuple[int, int, int]:
    if block in _COLOURS:
        return _COLOURS[block]
    h = hashlib.blake2b(block.encode(), digest_size=3).digest()
    return (64 + h[0] // 2, 64 + h[1] // 2, 64 + h[2] // 2)


def _shade(rgb, f):
    return tuple(max(0, min(255, int(c * f))) for c in rgb)


def render_png(world: WorldState, bbox: BoundingBox, path: str | Path) -> Path:
    from PIL import Image, ImageDraw

    lo, hi = bbox.min, bbox.max
    sx, sy, sz = hi.x - lo.x + 1, hi.y - lo.y + 1, hi.z - lo.z + 1
    w = (sx + sz) * TILE + 2 * TILE
    h = (sx + sz) * TILE // 2 + sy * TILE + 2 * TILE
    img = Image.new("RGB", (w, h), (235, 235, 235))
    draw = ImageDraw.Draw(img)
    ox, oy = (sz + 1) * TILE, sy * TILE + TILE
    cells = [c for c in world.blocks if c in bbox]
    # painter's order: far (low x+z) and low cells first
    for c in sorted(cells, key=lambda c: (c.x + c.z, c.y, c.x)):
        cell = world.blocks[c]
        base = colour(cell.id)
        if cell.id == "redstone_lamp" and c in world.lit:
            base = (255, 214, 120)
        x, y, z = c.x - lo.x, c.y - lo.y, c.z - lo.z
        px = ox + (x - z) * TILE
        py = oy + (x + z) * TILE // 2 - y * TILE
        top = [(px, py), (px + TILE, py + TILE // 2), (px, py + TILE), (px - TILE, py + TILE // 2)]
        left = [(px - TILE, py + TILE // 2), (px, py + TILE), (px, py + 2 * TILE), (px - TILE, py + TILE + TILE // 2)]
        right = [(px + TILE, py + TILE // 2), (px, py + TILE), (px, py + 2 * TILE), (px + TILE, py + TILE + TILE // 2)]
        draw.polygon(top, fill=base, outline=_shade(base, 0.6))
        draw.polygon(left, fill=_shade(base, 0.8), outline=_shade(base, 0.5))
        draw.polygon(right, fill=_shade(base, 0.65), outline=_shade(base, 0.45))
    path = Path(path)
    with open(path, "xb") as fh:
        img.save(fh, format="PNG")
    return path
