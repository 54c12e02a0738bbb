import pytest

from voxelsmith import dsl
from voxelsmith.llm import JsonShapeError, ScriptedClient
from voxelsmith.reflection import AIR, reflect, render_views, serialize
from voxelsmith.world import BoundingBox, Cell, Coord, WorldState

from conftest import build


def box(a, b):
    return BoundingBox(Coord(*a), Coord(*b))


def test_empty_region_is_all_air():
    vs = render_views(WorldState(), box((0, 1, 0), (2, 2, 1)))
    assert vs.labels == ["north", "south", "east", "west", "top", "layer_0", "layer_1"]
    for v in vs.views:
        assert all(c == AIR for row in v.grid for c in row)
    assert len(vs.get("north").grid) == 2 and len(vs.get("north").grid[0]) == 3
    assert len(vs.get("east").grid[0]) == 2
    assert len(vs.get("top").grid) == 2


def test_single_block_shows_once_everywhere():
    w = WorldState()
    w.blocks[Coord(0, 1, 0)] = Cell("stone", None)
    vs = render_views(w, box((0, 1, 0), (0, 1, 0)))
    assert all(v.grid == (("stone",),) for v in vs.views)
    assert "A=stone" in serialize(vs)


def test_shell_projections_are_solid_and_core_is_hollow():
    w, _, rep = build(dsl.compile_text("shell stone (0,0,0) (2,2,2)"))
    assert rep.success
    vs = render_views(w, box((0, 1, 0), (2, 3, 2)))
    for label in ("north", "south", "east", "west", "top"):
        assert all(c == "stone" for row in vs.get(label).grid for c in row)
    mid = vs.get("layer_1").grid
    assert mid[1][1] == AIR
    assert sum(c == "stone" for row in mid for c in row) == 8


def test_side_views_are_mirrored_pairs():
    w = WorldState()
    w.blocks[Coord(0, 1, 0)] = Cell("stone", None)
    w.blocks[Coord(2, 1, 0)] = Cell("glass", None)
    vs = render_views(w, box((0, 1, 0), (2, 1, 0)))
    north, south = vs.get("north").grid[0], vs.get("south").grid[0]
    assert south == ("stone", AIR, "glass")
    assert north == tuple(reversed(south))
    # the layer index counts from the bottom of the box
    assert vs.get("layer_0").grid == (("stone", AIR, "glass"),)


def test_serialize_is_stable():
    w = WorldState()
    w.blocks[Coord(1, 1, 1)] = Cell("oak_planks", None)
    vs = render_views(w, box((0, 1, 0), (1, 1, 1)))
    assert serialize(vs) == serialize(render_views(w.copy(), box((0, 1, 0), (1, 1, 1))))
    text = serialize(vs)
    assert text.startswith("legend: A=oak_planks .=air\n")
    assert "view top (rows z 0..1, columns x 0..1)\n```\n..\n.A\n```" in text


def _views():
    w = WorldState()
    w.blocks[Coord(0, 1, 0)] = Cell("stone", None)
    return render_views(w, box((0, 1, 0), (0, 1, 0)))


def test_reflect_retries_once_on_missing_key():
    client = ScriptedClient([
        {"expect_substring": "Current Blueprint Code:", "response": '{"code": "place stone (0,0,0)"}'},
        {"expect_substring": "reflection", "response": '{"reflection": "ok", "code": "place stone (0,0,0)"}'},
    ])
    rr = reflect(client, "a stone", _views(), "place dirt (0,0,0)", ["Wrong block"])
    assert rr.reflection_text == "ok" and rr.repaired_dsl == "place stone (0,0,0)"
    assert client.remaining == 0


def test_reflect_gives_up_after_one_retry():
    bad = {"expect_substring": "", "response": '{"code": "x"}'}
    with pytest.raises(JsonShapeError):
        reflect(ScriptedClient([bad, bad]), "s", _views(), "place stone (0,0,0)", ["Missing stone"])


def test_prompt_carries_views_code_and_hints():
    seen = []

    class Spy:
        supports_images = False

        def complete(self, messages, **kw):
            seen.extend(messages)
            return '{"reflection": "r", "code": "c"}'

    reflect(Spy(), "STRUCT", _views(), "PREVIOUS CODE", ["Missing stone at (0,1,0)"])
    assert len(seen) == 3
    assert "STRUCT" in seen[0].text and "PREVIOUS CODE" in seen[0].text and "legend:" in seen[0].text
    assert "Missing stone at (0,1,0)" in seen[2].text
