"""Sparse voxel world with a single creative-mode bot.

The world is a superflat plane: every cell at ``y <= ground_y`` is solid
ground and is never stored.  Stored cells above the plane map a coordinate
to a block id and an optional facing.  Only the bot is subject to gravity.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple

from . import blocks
from .blocks import DEFAULT_FACING, FACINGS, SCAFFOLD_BLOCK

DAY_LENGTH = 24000
NIGHT_START = 13000
NIGHT_END = 23000

DEFAULT_REACH = 4
MAX_STEP_UP = 1
MAX_SAFE_FALL = 3


class Coord(NamedTuple):
    x: int
    y: int
    z: int

    def __add__(self, other) -> Coord:  # type: ignore[override]
        return Coord(self.x + other[0], self.y + other[1], self.z + other[2])

    def __sub__(self, other) -> Coord:
        return Coord(self.x - other[0], self.y - other[1], self.z - other[2])

    def offset(self, dx: int = 0, dy: int = 0, dz: int = 0) -> Coord:
        return Coord(self.x + dx, self.y + dy, self.z + dz)

    def neighbors(self) -> Iterator[Coord]:
        for d in FACE_DIRECTIONS:
            yield self + d

    def yxz(self) -> tuple[int, int, int]:
        return (self.y, self.x, self.z)


FACE_DIRECTIONS = ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1))
HORIZONTAL = ((1, 0), (-1, 0), (0, 1), (0, -1))
UP = (0, 1, 0)
DOWN = (0, -1, 0)


def chebyshev(a: Coord, b: Coord) -> int:
    return max(abs(a.x - b.x), abs(a.y - b.y), abs(a.z - b.z))


class Cell(NamedTuple):
    id: str
    facing: str | None = None


class WorldError(Exception):
    """Base class for simulator rule violations."""

    kind = "WorldError"

    def __init__(self, message: str, at: Coord | None = None):
        super().__init__(message)
        self.at = at


class OutOfReach(WorldError):
    kind = "OutOfReach"


class Occupied(WorldError):
    kind = "Occupied"


class Floating(WorldError):
    kind = "Floating"


class NothingThere(WorldError):
    kind = "NothingThere"


class IllegalMove(WorldError):
    kind = "IllegalMove"


class NoPath(WorldError):
    kind = "NoPath"


def is_night(time: int) -> bool:
    return NIGHT_START <= time % DAY_LENGTH < NIGHT_END


@dataclass
class WorldState:
    blocks: dict[Coord, Cell] = field(default_factory=dict)
    time: int = 0
    ground_y: int = 0
    scaffold: set[Coord] = field(default_factory=set)
    # derived redstone state, recomputed by redstone_update
    powered: frozenset[Coord] = frozenset()
    lit: frozenset[Coord] = frozenset()

    def copy(self) -> WorldState:
        return WorldState(dict(self.blocks), self.time, self.ground_y, set(self.scaffold),
                          self.powered, self.lit)

    def get(self, c: Coord) -> Cell | None:
        return self.blocks.get(c)

    def is_ground(self, c: Coord) -> bool:
        return c.y <= self.ground_y

    def is_solid(self, c: Coord) -> bool:
        if c.y <= self.ground_y:
            return True
        cell = self.blocks.get(c)
        return cell is not None and blocks.REGISTRY[cell.id].solid

    def is_empty(self, c: Coord) -> bool:
        return c.y > self.ground_y and c not in self.blocks

    def has_support(self, c: Coord) -> bool:
        return any(self.is_solid(n) for n in c.neighbors())

    def is_standable(self, c: Coord) -> bool:
        return (not self.is_solid(c) and not self.is_solid(c + UP)
                and self.is_solid(c + DOWN))

    def bounds(self) -> tuple[Coord, Coord] | None:
        if not self.blocks:
            return None
        xs = [c.x for c in self.blocks]
        ys = [c.y for c in self.blocks]
        zs = [c.z for c in self.blocks]
        return Coord(min(xs), min(ys), min(zs)), Coord(max(xs), max(ys), max(zs))

    def snapshot(self) -> dict:
        rows = []
        for c in sorted(self.blocks, key=Coord.yxz):
            cell = self.blocks[c]
            row = {"x": c.x, "y": c.y, "z": c.z, "id": cell.id, "facing": cell.facing}
            if c in self.scaffold:
                row["scaffold"] = True
            rows.append(row)
        return {"time": self.time, "ground_y": self.ground_y, "blocks": rows}

    def to_json(self) -> str:
        """Snapshot text with one block per line, sorted by (y, x, z)."""
        snap = self.snapshot()
        lines = [json.dumps(row) for row in snap["blocks"]]
        body = ",\n    ".join(lines)
        blocks_part = f"[\n    {body}\n  ]" if lines else "[]"
        return (f'{{\n  "time": {snap["time"]},\n  "ground_y": {snap["ground_y"]},\n'
                f'  "blocks": {blocks_part}\n}}\n')

    @classmethod
    def from_snapshot(cls, data: dict) -> WorldState:
        world = cls(time=int(data.get("time", 0)) % DAY_LENGTH, ground_y=int(data.get("ground_y", 0)))
        for row in data.get("blocks", []):
            c = Coord(int(row["x"]), int(row["y"]), int(row["z"]))
            block_id = blocks.resolve(row["id"])
            if block_id == "air":
                continue
            if c.y <= world.ground_y:
                raise ValueError(f"block at {tuple(c)} lies inside the ground plane")
            world.blocks[c] = Cell(block_id, _normal_facing(block_id, row.get("facing")))
            if row.get("scaffold"):
                world.scaffold.add(c)
        return redstone_update(world)

    @classmethod
    def from_json(cls, text: str) -> WorldState:
        return cls.from_snapshot(json.loads(text))


@dataclass
class BotState:
    position: Coord
    reach: int = DEFAULT_REACH
    mode: str = "creative"

    def copy(self) -> BotState:
        return BotState(self.position, self.reach, self.mode)

    def body(self) -> tuple[Coord, Coord]:
        return self.position, self.position + UP


def _normal_facing(block_id: str, facing: str | None) -> str | None:
    if not blocks.REGISTRY[block_id].orientable:
        return None
    if facing is None:
        return DEFAULT_FACING
    if facing not in FACINGS:
        raise ValueError(f"bad facing {facing!r}")
    return facing


def _check_reach(bot: BotState, at: Coord) -> None:
    if chebyshev(bot.position, at) > bot.reach:
        raise OutOfReach(f"{tuple(at)} is {chebyshev(bot.position, at)} blocks from the bot "
                         f"(reach {bot.reach})", at)


def place_block(world: WorldState, bot: BotState, block: str, at: Coord,
                facing: str | None = None, *, scaffold: bool = False) -> WorldState:
    """Place ``block`` at ``at`` in place; returns ``world`` for chaining."""
    block = blocks.resolve(block)
    if block == "air":
        raise ValueError("air cannot be placed")
    at = Coord(*at)
    _check_reach(bot, at)
    if world.is_ground(at) or at in world.blocks:
        raise Occupied(f"{tuple(at)} is already occupied", at)
    if at in bot.body():
        raise Occupied(f"{tuple(at)} is occupied by the bot", at)
    if not world.has_support(at):
        raise Floating(f"{tuple(at)} has no adjacent solid block", at)
    world.blocks[at] = Cell(block, _normal_facing(block, facing))
    if scaffold:
        world.scaffold.add(at)
    return redstone_update(world)


def mine_block(world: WorldState, bot: BotState, at: Coord) -> WorldState:
    at = Coord(*at)
    if at not in world.blocks:
        raise NothingThere(f"no block at {tuple(at)}", at)
    _check_reach(bot, at)
    del world.blocks[at]
    world.scaffold.discard(at)
    fall(world, bot)
    return redstone_update(world)


def fall(world: WorldState, bot: BotState) -> int:
    """Drop the bot until it stands on something; returns the distance fallen."""
    start = bot.position.y
    while not world.is_solid(bot.position + DOWN):
        bot.position = bot.position + DOWN
    return start - bot.position.y


def jump_place(world: WorldState, bot: BotState, block: str = SCAFFOLD_BLOCK) -> WorldState:
    """Pillar jump: jump and place ``block`` in the cell the feet just left."""
    feet = bot.position
    if feet in world.blocks:
        raise Occupied(f"{tuple(feet)} already holds {world.blocks[feet].id}", feet)
    if world.is_solid(feet + (0, 2, 0)):
        raise IllegalMove(f"no headroom to jump at {tuple(feet)}", feet)
    if not world.is_solid(feet + DOWN):
        raise IllegalMove(f"bot at {tuple(feet)} is not standing on anything", feet)
    block = blocks.resolve(block)
    bot.position = feet + UP
    world.blocks[feet] = Cell(block, _normal_facing(block, None))
    world.scaffold.add(feet)
    return redstone_update(world)


def advance_time(world: WorldState, ticks: int) -> WorldState:
    if ticks < 0:
        raise ValueError("ticks must be non-negative")
    world.time = (world.time + ticks) % DAY_LENGTH
    return redstone_update(world)


def redstone_update(world: WorldState) -> WorldState:
    """Daylight sensors (inverted) power during the night; adjacent lamps light up."""
    powered: set[Coord] = set()
    lamps = []
    for c, cell in world.blocks.items():
        d = blocks.REGISTRY[cell.id]
        if d.power_source:
            powered.add(c)
        elif d.lamp:
            lamps.append(c)
    if not is_night(world.time):
        powered = set()
    world.powered = frozenset(powered)
    world.lit = frozenset(c for c in lamps if any(n in powered for n in c.neighbors()))
    return world


# -- movement -------------------------------------------------------------

def moves(world: WorldState, c: Coord) -> list[Coord]:
    """Cells reachable in one step from standable ``c``, sorted by (y, x, z)."""
    out = []
    head_clear = not world.is_solid(c + (0, 2, 0))
    for dx, dz in HORIZONTAL:
        n = Coord(c.x + dx, c.y, c.z + dz)
        if world.is_solid(n):
            up = n + UP
            if head_clear and world.is_standable(up):
                out.append(up)
            continue
        if world.is_solid(n + UP):
            continue
        land = n
        while not world.is_solid(land + DOWN):
            land = land + DOWN
            if c.y - land.y > MAX_SAFE_FALL:
                break
        if c.y - land.y <= MAX_SAFE_FALL:
            out.append(land)
    out.sort(key=Coord.yxz)
    return out


def is_legal_step(world: WorldState, a: Coord, b: Coord) -> bool:
    return b in moves(world, a)


@dataclass(frozen=True)
class BoundingBox:
    min: Coord
    max: Coord

    def __contains__(self, c: Coord) -> bool:
        return (self.min.x <= c.x <= self.max.x and self.min.y <= c.y <= self.max.y
                and self.min.z <= c.z <= self.max.z)


def search_box(world: WorldState, points: Iterable[Coord], margin: int = 16) -> BoundingBox:
    pts = list(points)
    b = world.bounds()
    if b:
        pts.extend(b)
    lo = Coord(min(p.x for p in pts) - margin, world.ground_y + 1, min(p.z for p in pts) - margin)
    hi = Coord(max(p.x for p in pts) + margin, max(p.y for p in pts) + 2, max(p.z for p in pts) + margin)
    return BoundingBox(lo, hi)


def bfs(world: WorldState, start: Coord, box: BoundingBox) -> dict[Coord, Coord | None]:
    """Breadth-first parents map over standable cells inside ``box``."""
    parents: dict[Coord, Coord | None] = {start: None}
    queue = deque([start])
    while queue:
        c = queue.popleft()
        for n in moves(world, c):
            if n not in parents and n in box:
                parents[n] = c
                queue.append(n)
    return parents


def walk_back(parents: dict[Coord, Coord | None], goal: Coord) -> list[Coord]:
    path = []
    c: Coord | None = goal
    while parents[c] is not None:
        path.append(c)
        c = parents[c]
    path.reverse()
    return path


def pathfind(world: WorldState, bot: BotState, goal: Coord, box: BoundingBox | None = None) -> list[Coord]:
    """Shortest walk from the bot to ``goal``; the start cell is excluded from the path."""
    goal = Coord(*goal)
    start = bot.position
    if goal == start:
        return []
    if not world.is_standable(goal):
        raise NoPath(f"goal {tuple(goal)} is not standable", goal)
    if box is None:
        box = search_box(world, [start, goal])
    parents: dict[Coord, Coord | None] = {start: None}
    queue = deque([start])
    while queue:
        c = queue.popleft()
        for n in moves(world, c):
            if n in parents or n not in box:
                continue
            parents[n] = c
            if n == goal:
                return walk_back(parents, goal)
            queue.append(n)
    raise NoPath(f"no walkable route from {tuple(start)} to {tuple(goal)}", goal)


def follow(world: WorldState, bot: BotState, path: list[Coord]) -> None:
    """Walk ``path`` step by step, rejecting any step the movement rules forbid."""
    for step in path:
        step = Coord(*step)
        if not is_legal_step(world, bot.position, step):
            raise IllegalMove(f"cannot step from {tuple(bot.position)} to {tuple(step)}", step)
        bot.position = step
