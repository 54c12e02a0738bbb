import json

import pytest
from hypothesis import given, settings, strategies as st

from voxelsmith.blueprint import Blueprint, EmptyBlueprint, Placement, bbox, diff, validate
from voxelsmith.world import BoundingBox, Cell, Coord, WorldState

from conftest import START, build, golden_blueprint


def bp_of(*items):
    return Blueprint(tuple(Placement(b, Coord(*o), f) for b, o, f in items))


def test_empty_blueprint_is_valid():
    assert validate(Blueprint()).violations == []


def test_duplicate_names_second_index():
    rep = validate(bp_of(("stone", (0, 0, 0), None), ("dirt", (0, 0, 0), None)))
    dups = [v for v in rep.violations if v.kind == "DuplicateCoord"]
    assert len(dups) == 1 and dups[0].index == 1


def test_air_is_rejected():
    assert validate(bp_of(("air", (0, 0, 0), None))).kinds() == {"AirBlock"}


def test_other_violation_kinds():
    limits = BoundingBox(Coord(0, 0, 0), Coord(3, 3, 3))
    rep = validate(bp_of(("unobtainium", (0, 0, 0), None), ("stone", (9, 0, 0), None),
                         ("stone", (1, 0, 0), "east"), ("oak_door", (2, 0, 0), None)), limits)
    assert rep.kinds() == {"UnknownBlockId", "OutOfBounds", "SpuriousFacing", "MissingFacing"}
    # a door without facing only warns
    assert [v.kind for v in rep.warnings] == ["MissingFacing"]


def test_bbox_examples():
    assert bbox(bp_of(("stone", (2, 3, 4), None))) == BoundingBox(Coord(2, 3, 4), Coord(2, 3, 4))
    two = bp_of(("stone", (0, 0, 0), None), ("stone", (7, 4, 7), None))
    assert bbox(two) == BoundingBox(Coord(0, 0, 0), Coord(7, 4, 7))
    with pytest.raises(EmptyBlueprint):
        bbox(Blueprint())


def test_wooden_house_spans_eight_cells():
    bp = golden_blueprint("wooden_house")
    xs = [p.offset.x for p in bp]
    zs = [p.offset.z for p in bp]
    assert max(xs) - min(xs) + 1 == 8
    assert max(zs) - min(zs) + 1 == 8
    box = bbox(bp)
    assert (box.max.x - box.min.x + 1, box.max.z - box.min.z + 1) == (8, 8)


def test_diff_of_exact_build_is_empty_and_mutations_are_detected():
    bp = golden_blueprint("wooden_house")
    world, _, rep = build(bp)
    assert rep.success
    assert diff(world, START, bp) == []

    removed = START + bp.placements[10].offset
    w1 = world.copy()
    del w1.blocks[removed]
    d1 = diff(w1, START, bp)
    assert [(m.kind, m.at) for m in d1] == [("Missing", removed)]

    plank = next(START + p.offset for p in bp if p.block == "oak_planks")
    w2 = world.copy()
    w2.blocks[plank] = Cell("stone", None)
    d2 = diff(w2, START, bp)
    assert [(m.kind, m.at, m.expected, m.found) for m in d2] == [("Wrong", plank, "oak_planks", "stone")]


def test_extra_inside_box_but_not_scaffold():
    bp = bp_of(("stone", (0, 0, 0), None), ("stone", (2, 0, 0), None))
    w = WorldState()
    w.blocks[Coord(0, 1, 0)] = Cell("stone", None)
    w.blocks[Coord(2, 1, 0)] = Cell("stone", None)
    w.blocks[Coord(1, 1, 0)] = Cell("dirt", None)
    assert [m.kind for m in diff(w, START, bp)] == ["Extra"]
    w.scaffold.add(Coord(1, 1, 0))
    assert diff(w, START, bp) == []


def test_json_round_trip():
    bp = bp_of(("oak_door", (1, 0, 0), "south"), ("stone", (0, 0, 0), None))
    text = bp.to_json()
    assert json.loads(text)["v"] == 1
    assert Blueprint.from_json(text) == bp


coords = st.tuples(st.integers(-3, 3), st.integers(0, 3), st.integers(-3, 3))
items = st.lists(st.tuples(st.sampled_from(["stone", "oak_planks", "air", "oak_door", "bogus"]), coords,
                           st.sampled_from([None, "east"])), max_size=12)


@settings(max_examples=80, deadline=None)
@given(items, st.randoms())
def test_violation_kinds_are_permutation_invariant(rows, rnd):
    bp = bp_of(*rows)
    shuffled = list(rows)
    rnd.shuffle(shuffled)
    assert validate(bp).kinds() == validate(bp_of(*shuffled)).kinds()


def grounded(cells):
    """Cells face-connected to the bottom layer; anything else would float."""
    keep = {c for c in cells if c[1] == 0}
    frontier = list(keep)
    while frontier:
        x, y, z = frontier.pop()
        for dx, dy, dz in ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)):
            n = (x + dx, y + dy, z + dz)
            if n in cells and n not in keep:
                keep.add(n)
                frontier.append(n)
    return keep


@settings(max_examples=40, deadline=None)
@given(st.sets(coords, min_size=1, max_size=25), st.sampled_from(["stone", "oak_planks", "glass"]))
def test_build_then_diff_is_empty(cells, block):
    cells = grounded(cells)
    bp = Blueprint(tuple(Placement(block, Coord(*c)) for c in sorted(cells)))
    if not cells:
        return
    world, plan, rep = build(bp)
    assert rep.success
    assert diff(world, START, bp) == []
    assert not world.scaffold
