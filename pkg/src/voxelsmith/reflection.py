"""Text renders of a built region and the repair round-trip with the model."""
from __future__ import annotations

from dataclasses import dataclass
from string import ascii_uppercase, ascii_lowercase, digits

from . import prompts
from .llm import JsonShapeError, Message, extract_json
from .world import BoundingBox, Coord, WorldState

AIR = "."
SIDES = ("north", "south", "east", "west")


@dataclass(frozen=True)
class View:
    label: str
    grid: tuple[tuple[str, ...], ...]
    rows: str  # what the rows and columns run over, for the caption
    cols: str


@dataclass(frozen=True)
class ViewSet:
    views: tuple[View, ...]
    bbox: BoundingBox

    def get(self, label: str) -> View:
        for v in self.views:
            if v.label == label:
                return v
        raise KeyError(label)

    @property
    def labels(self) -> list[str]:
        return [v.label for v in self.views]


def _first_hit(world: WorldState, cells) -> str:
    for c in cells:
        cell = world.blocks.get(c)
        if cell is not None:
            return cell.id
    return AIR


def _span(lo: int, hi: int, descending: bool = False) -> list[int]:
    r = list(range(lo, hi + 1))
    return r[::-1] if descending else r


def render_views(world: WorldState, bbox: BoundingBox) -> ViewSet:
    """Four side projections, a top projection and one slice per y level.

    Side views put the highest y in the first row and are laid out as seen
    by someone standing on that side facing the structure; the top view and
    the slices have z growing down the rows and x growing across.
    """
    lo, hi = bbox.min, bbox.max
    ys_down = _span(lo.y, hi.y, descending=True)
    views = []

    def side(label, cols, ray, caption_cols):
        grid = tuple(tuple(_first_hit(world, ray(y, u)) for u in cols) for y in ys_down)
        views.append(View(label, grid, f"y {hi.y}..{lo.y}", caption_cols))

    xs_desc, xs_asc = _span(lo.x, hi.x, True), _span(lo.x, hi.x)
    zs_desc, zs_asc = _span(lo.z, hi.z, True), _span(lo.z, hi.z)
    # north side looks towards +z, so east (+x) is on the viewer's left
    side("north", xs_desc, lambda y, x: (Coord(x, y, z) for z in zs_asc), f"x {hi.x}..{lo.x}")
    side("south", xs_asc, lambda y, x: (Coord(x, y, z) for z in zs_desc), f"x {lo.x}..{hi.x}")
    side("east", zs_desc, lambda y, z: (Coord(x, y, z) for x in xs_desc), f"z {hi.z}..{lo.z}")
    side("west", zs_asc, lambda y, z: (Coord(x, y, z) for x in xs_asc), f"z {lo.z}..{hi.z}")

    top = tuple(tuple(_first_hit(world, (Coord(x, y, z) for y in ys_down)) for x in xs_asc) for z in zs_asc)
    views.append(View("top", top, f"z {lo.z}..{hi.z}", f"x {lo.x}..{hi.x}"))
    for k, y in enumerate(_span(lo.y, hi.y)):
        grid = tuple(tuple(world.blocks[Coord(x, y, z)].id if Coord(x, y, z) in world.blocks else AIR
                           for x in xs_asc) for z in zs_asc)
        views.append(View(f"layer_{k}", grid, f"z {lo.z}..{hi.z}", f"x {lo.x}..{hi.x} at y={y}"))
    return ViewSet(tuple(views), bbox)


_SYMBOLS = ascii_uppercase + ascii_lowercase + digits


def legend(vs: ViewSet) -> dict[str, str]:
    ids = sorted({c for v in vs.views for row in v.grid for c in row if c != AIR})
    if len(ids) > len(_SYMBOLS):
        raise ValueError("too many distinct blocks to render as text")
    return {b: _SYMBOLS[i] for i, b in enumerate(ids)}


def serialize(vs: ViewSet) -> str:
    key = legend(vs)
    lines = ["legend: " + (" ".join(f"{s}={b}" for b, s in key.items()) or "(empty)") + f" {AIR}=air"]
    for v in vs.views:
        lines.append(f"view {v.label} (rows {v.rows}, columns {v.cols})")
        lines.append("```")
        lines.extend("".join(key.get(c, AIR) for c in row) for row in v.grid)
        lines.append("```")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ReflectionResult:
    reflection_text: str
    repaired_dsl: str
    raw: str


def reflect(client, structure: str, views: ViewSet, previous_dsl: str, mismatches: list[str], *,
            image: str | None = None, temperature: float = 0.0) -> ReflectionResult:
    if not mismatches:
        raise ValueError("reflection needs at least one reported problem")
    text = prompts.render("self_reflection", {
        "structure": structure,
        "Image": serialize(views),
        "blueprint": previous_dsl,
    })
    attach = image if (image is not None and client.supports_images) else None
    messages = [
        Message("user", text, attach),
        Message("user", prompts.DSL_INSTRUCTIONS),
        Message("user", prompts.mismatch_hints(mismatches)),
    ]
    reply = client.complete(messages, temperature=temperature, json_mode=True)
    try:
        obj = extract_json(reply, ("reflection", "code"))
    except JsonShapeError as exc:
        messages += [Message("assistant", reply), Message("user", prompts.fill(prompts.JSON_REPAIR, error=str(exc)))]
        reply = client.complete(messages, temperature=temperature, json_mode=True)
        obj = extract_json(reply, ("reflection", "code"))
    return ReflectionResult(obj["reflection"], obj["code"], reply)
