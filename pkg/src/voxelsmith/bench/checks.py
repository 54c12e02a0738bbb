"""Deterministic structural predicates for the five benchmark tasks.

Every checker looks only at the world snapshot: all non-scaffold blocks
above the ground count as the structure.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable

from .. import blocks
from ..world import Coord, WorldState, advance_time, redstone_update

MIN_TOWER_HEIGHT = 12
SLAB_COVERAGE = 0.9
MIN_STOREY_GAP = 3
VILLAGE_PALETTE = frozenset({"torch", "cobblestone", "oak_log", "oak_planks"})
NIGHT_TICK = 18000
DAY_TICK = 6000


@dataclass(frozen=True)
class Predicate:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class CheckReport:
    task: str
    predicates: list[Predicate] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(p.passed for p in self.predicates)

    @property
    def failures(self) -> list[Predicate]:
        return [p for p in self.predicates if not p.passed]

    def add(self, name: str, passed: bool, detail: str = "") -> None:
        self.predicates.append(Predicate(name, bool(passed), detail))

    def to_dict(self) -> dict:
        return {"task": self.task, "passed": self.passed,
                "predicates": [{"name": p.name, "passed": p.passed, "detail": p.detail} for p in self.predicates]}


def structure_cells(world: WorldState) -> dict[Coord, str]:
    return {c: cell.id for c, cell in world.blocks.items() if c not in world.scaffold}


def _extent(cells) -> tuple[int, int, int, int]:
    xs = [c.x for c in cells]
    zs = [c.z for c in cells]
    return min(xs), max(xs), min(zs), max(zs)


def check_wooden_house(world: WorldState, origin: Coord) -> CheckReport:
    r = CheckReport("wooden_house")
    cells = structure_cells(world)
    if not cells:
        r.add("non-empty", False, "nothing was built")
        return r
    x0, x1, z0, z1 = _extent(cells)
    w, d = x1 - x0 + 1, z1 - z0 + 1
    r.add("footprint at most 8x8", w <= 8 and d <= 8, f"footprint is {w}x{d}")
    ids = set(cells.values())
    r.add("has a door", any(blocks.is_door(b) for b in ids))
    r.add("has a window", any(blocks.is_window(b) for b in ids))

    def inside(pred: Callable[[str], bool], label: str) -> None:
        found = [c for c, b in cells.items() if pred(b)]
        ok = any(x0 < c.x < x1 and z0 < c.z < z1 for c in found)
        detail = "none placed" if not found else ("" if ok else "only on or outside the walls")
        r.add(f"{label} inside the walls", ok, detail)

    inside(blocks.is_bed, "bed")
    inside(lambda b: b == "crafting_table", "crafting table")
    return r


def check_snow_pyramid(world: WorldState, origin: Coord) -> CheckReport:
    r = CheckReport("snow_pyramid")
    cells = structure_cells(world)
    if not cells:
        r.add("non-empty", False, "nothing was built")
        return r
    allowed = blocks.SNOW_FAMILY | blocks.ICE_FAMILY
    stray = sorted({b for b in cells.values() if b not in allowed})
    r.add("only snow and ice", not stray, ", ".join(stray))
    layers: dict[int, list[Coord]] = defaultdict(list)
    for c in cells:
        layers[c.y].append(c)
    sides = []
    for y in sorted(layers):
        x0, x1, z0, z1 = _extent(layers[y])
        sides.append(max(x1 - x0 + 1, z1 - z0 + 1))
    r.add("at least two layers", len(sides) >= 2, f"{len(sides)} layer(s)")
    shrinking = all(a > b for a, b in zip(sides, sides[1:]))
    r.add("layers shrink with height", shrinking, "side lengths " + ",".join(map(str, sides)))
    return r


def lamp_states(world: WorldState, tick: int) -> tuple[int, int]:
    """(lit, total) lamp counts at ``tick``, evaluated on a copy."""
    w = world.copy()
    advance_time(w, (tick - w.time) % 24000)
    redstone_update(w)
    lamps = [c for c, cell in w.blocks.items() if blocks.get(cell.id).lamp]
    return sum(1 for c in lamps if c in w.lit), len(lamps)


def check_watchtower(world: WorldState, origin: Coord, min_height: int = MIN_TOWER_HEIGHT) -> CheckReport:
    r = CheckReport("watchtower")
    cells = structure_cells(world)
    if not cells:
        r.add("non-empty", False, "nothing was built")
        return r
    height = max(c.y for c in cells) - min(c.y for c in cells) + 1
    r.add(f"at least {min_height} tall", height >= min_height, f"height {height}")
    ids = set(cells.values())
    has_lamp = any(blocks.get(b).lamp for b in ids)
    has_sensor = any(blocks.get(b).power_source for b in ids)
    r.add("has a lamp", has_lamp)
    r.add("has a daylight sensor", has_sensor)
    lit_night, n = lamp_states(world, NIGHT_TICK)
    lit_day, _ = lamp_states(world, DAY_TICK)
    r.add("lamp lit at night", n > 0 and lit_night > 0, f"{lit_night}/{n} lit at tick {NIGHT_TICK}")
    r.add("lamp dark by day", n > 0 and lit_day == 0, f"{lit_day}/{n} lit at tick {DAY_TICK}")
    return r


def check_mansion(world: WorldState, origin: Coord) -> CheckReport:
    """Two storeys: exactly two near-complete floor slabs with headroom between.

    The footprint is the horizontal extent of the building proper; garden and
    chimney blocks are left out so they do not dilute floor coverage.
    """
    r = CheckReport("mansion")
    cells = structure_cells(world)
    ids = set(cells.values())
    body = {c: b for c, b in cells.items() if b not in blocks.GARDEN_FAMILY and b not in blocks.CHIMNEY_FAMILY}
    if not body:
        r.add("non-empty", False, "nothing was built")
        return r
    x0, x1, z0, z1 = _extent(body)
    area = (x1 - x0 + 1) * (z1 - z0 + 1)
    per_level: dict[int, int] = defaultdict(int)
    for c, b in body.items():
        if blocks.get(b).solid:
            per_level[c.y] += 1
    slabs = sorted(y for y, n in per_level.items() if n >= SLAB_COVERAGE * area)
    r.add("exactly two floor slabs", len(slabs) == 2, "slab levels " + (",".join(map(str, slabs)) or "none"))
    if len(slabs) == 2:
        lo, hi = slabs
        inner = [(x, z) for x in range(x0 + 1, x1) for z in range(z0 + 1, z1)]
        open_rows = 0
        for y in range(lo + 1, hi):
            filled = sum(1 for x, z in inner if Coord(x, y, z) in body)
            if inner and filled * 2 < len(inner):
                open_rows += 1
        r.add(f"at least {MIN_STOREY_GAP} open rows between floors", open_rows >= MIN_STOREY_GAP,
              f"{open_rows} open row(s)")
    else:
        r.add(f"at least {MIN_STOREY_GAP} open rows between floors", False, "needs two slabs")
    r.add("has flowers", bool(ids & blocks.FLOWER_FAMILY))
    r.add("has a chimney", bool(ids & blocks.CHIMNEY_FAMILY))
    return r


def check_village_house(world: WorldState, origin: Coord) -> CheckReport:
    r = CheckReport("village_house")
    cells = structure_cells(world)
    r.add("non-empty", bool(cells))
    stray = sorted(set(cells.values()) - VILLAGE_PALETTE)
    r.add("palette within reference", not stray, ", ".join(stray))
    return r


CHECKERS: dict[str, Callable[[WorldState, Coord], CheckReport]] = {
    "wooden_house": check_wooden_house,
    "snow_pyramid": check_snow_pyramid,
    "watchtower": check_watchtower,
    "mansion": check_mansion,
    "village_house": check_village_house,
}


def structural_check(task: str, world: WorldState, origin: Coord) -> CheckReport:
    try:
        fn = CHECKERS[task]
    except KeyError:
        raise KeyError(f"no structural checker named {task!r}") from None
    return fn(world, Coord(*origin))
