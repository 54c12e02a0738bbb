"""Blueprint data model: placements relative to a start position."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import blocks
from .blocks import DEFAULT_FACING, FACINGS
from .world import BoundingBox, Coord, WorldState


@dataclass(frozen=True)
class Placement:
    block: str
    offset: Coord
    facing: str | None = None

    @property
    def effective_facing(self) -> str | None:
        d = blocks.REGISTRY.get(self.block)
        if d is None or not d.orientable:
            return None
        return self.facing or DEFAULT_FACING

    def label(self) -> str:
        f = self.effective_facing
        return f"{self.block}[{f}]" if f else self.block


@dataclass(frozen=True)
class Blueprint:
    placements: tuple[Placement, ...] = ()
    name: str = ""

    def __len__(self) -> int:
        return len(self.placements)

    def __iter__(self):
        return iter(self.placements)

    def to_dict(self) -> dict:
        return {
            "v": 1,
            "name": self.name,
            "placements": [
                {"id": p.block, "x": p.offset.x, "y": p.offset.y, "z": p.offset.z, "facing": p.facing}
                for p in self.placements
            ],
        }

    def to_json(self) -> str:
        head = json.dumps({"v": 1, "name": self.name})[:-1]
        rows = [json.dumps(r) for r in self.to_dict()["placements"]]
        if not rows:
            return head + ', "placements": []}\n'
        return head + ', "placements": [\n  ' + ",\n  ".join(rows) + "\n]}\n"

    @classmethod
    def from_dict(cls, data: dict) -> Blueprint:
        if data.get("v", 1) != 1:
            raise ValueError(f"unsupported blueprint version {data.get('v')!r}")
        placements = tuple(
            Placement(str(r["id"]), Coord(int(r["x"]), int(r["y"]), int(r["z"])), r.get("facing"))
            for r in data.get("placements", [])
        )
        return cls(placements, str(data.get("name", "")))

    @classmethod
    def from_json(cls, text: str) -> Blueprint:
        return cls.from_dict(json.loads(text))


class EmptyBlueprint(ValueError):
    pass


@dataclass(frozen=True)
class Violation:
    kind: str
    index: int
    message: str
    severity: str = "error"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    def __bool__(self) -> bool:
        return bool(self.violations)

    @property
    def errors(self) -> list[Violation]:
        return [v for v in self.violations if v.severity == "error"]

    @property
    def warnings(self) -> list[Violation]:
        return [v for v in self.violations if v.severity == "warning"]

    @property
    def ok(self) -> bool:
        return not self.errors

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}


def validate(bp: Blueprint, limits: BoundingBox | None = None) -> ValidationReport:
    """Report every rule violation; an empty report means the blueprint is valid.

    An orientable block without a facing is only a warning: it is built
    facing north.
    """
    report = ValidationReport()
    add = report.violations.append
    seen: dict[Coord, int] = {}
    for i, p in enumerate(bp.placements):
        if p.offset in seen:
            add(Violation("DuplicateCoord", i,
                          f"offset {tuple(p.offset)} already used by placement {seen[p.offset]}"))
        else:
            seen[p.offset] = i
        if limits is not None and p.offset not in limits:
            add(Violation("OutOfBounds", i, f"offset {tuple(p.offset)} outside limits"))
        if p.block == "air":
            add(Violation("AirBlock", i, "air must not be part of a blueprint"))
            continue
        d = blocks.REGISTRY.get(p.block)
        if d is None:
            add(Violation("UnknownBlockId", i, f"unknown block id {p.block!r}"))
            continue
        if p.facing is not None and p.facing not in FACINGS:
            add(Violation("SpuriousFacing", i, f"invalid facing {p.facing!r}"))
        elif d.orientable and p.facing is None:
            add(Violation("MissingFacing", i, f"{p.block} has no facing, defaulting to {DEFAULT_FACING}",
                          severity="warning"))
        elif not d.orientable and p.facing is not None:
            add(Violation("SpuriousFacing", i, f"{p.block} cannot face {p.facing}"))
    return report


def bbox(bp: Blueprint) -> BoundingBox:
    if not bp.placements:
        raise EmptyBlueprint("blueprint has no placements")
    offs = [p.offset for p in bp.placements]
    return BoundingBox(
        Coord(min(o.x for o in offs), min(o.y for o in offs), min(o.z for o in offs)),
        Coord(max(o.x for o in offs), max(o.y for o in offs), max(o.z for o in offs)),
    )


def absolute_box(bp: Blueprint, origin: Coord) -> BoundingBox:
    box = bbox(bp)
    return BoundingBox(origin + box.min, origin + box.max)


@dataclass(frozen=True)
class Mismatch:
    kind: str  # Missing | Wrong | Extra
    at: Coord
    expected: str | None
    found: str | None

    def describe(self) -> str:
        where = f"({self.at.x},{self.at.y},{self.at.z})"
        if self.kind == "Missing":
            return f"Missing {self.expected} at {where}"
        if self.kind == "Wrong":
            return f"Wrong block at {where}: expected {self.expected}, found {self.found}"
        return f"Extra {self.found} at {where}"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "at": list(self.at), "expected": self.expected, "found": self.found}


def _cell_label(world: WorldState, c: Coord) -> str | None:
    cell = world.blocks.get(c)
    if cell is None:
        return None
    return f"{cell.id}[{cell.facing}]" if cell.facing else cell.id


def diff(world: WorldState, origin: Coord, bp: Blueprint) -> list[Mismatch]:
    """Missing and Wrong in placement order, then Extra in (y, x, z) order."""
    out: list[Mismatch] = []
    if not bp.placements:
        return out
    origin = Coord(*origin)
    wanted: set[Coord] = set()
    for p in bp.placements:
        at = origin + p.offset
        if at in wanted:
            continue
        wanted.add(at)
        found = _cell_label(world, at)
        if found is None:
            out.append(Mismatch("Missing", at, p.label(), None))
        elif found != p.label():
            out.append(Mismatch("Wrong", at, p.label(), found))
    box = absolute_box(bp, origin)
    extras = [c for c in world.blocks if c in box and c not in wanted and c not in world.scaffold]
    for c in sorted(extras, key=Coord.yxz):
        out.append(Mismatch("Extra", c, None, _cell_label(world, c)))
    return out
