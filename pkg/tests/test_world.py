from collections import deque

import pytest
from hypothesis import given, settings, strategies as st

from voxelsmith.world import (
    BotState, Cell, Coord, Floating, NoPath, NothingThere, Occupied, OutOfReach, WorldState,
    advance_time, is_night, mine_block, pathfind, place_block, redstone_update,
)


def test_place_next_to_ground_grows_world():
    w, bot = WorldState(), BotState(Coord(0, 1, 0))
    place_block(w, bot, "stone", Coord(1, 1, 0))
    assert len(w.blocks) == 1
    assert w.get(Coord(1, 1, 0)) == Cell("stone", None)


def test_reach_boundary():
    w, bot = WorldState(), BotState(Coord(0, 1, 0))
    place_block(w, bot, "stone", Coord(4, 1, 0))
    with pytest.raises(OutOfReach):
        place_block(w, bot, "stone", Coord(5, 1, 0))


def test_floating_when_all_six_neighbours_empty():
    w, bot = WorldState(), BotState(Coord(0, 1, 0))
    target = Coord(2, 3, 0)
    # oracle: enumerate the 6-neighbourhood directly
    offsets = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]
    assert all(Coord(target.x + a, target.y + b, target.z + c) not in w.blocks
               and target.y + b > w.ground_y for a, b, c in offsets)
    with pytest.raises(Floating):
        place_block(w, bot, "stone", target)


def test_occupied_cell_and_bot_body():
    w, bot = WorldState(), BotState(Coord(0, 1, 0))
    place_block(w, bot, "stone", Coord(1, 1, 0))
    with pytest.raises(Occupied):
        place_block(w, bot, "dirt", Coord(1, 1, 0))
    with pytest.raises(Occupied):
        place_block(w, bot, "dirt", Coord(0, 1, 0))


def test_mine_is_inverse_of_place():
    w, bot = WorldState(), BotState(Coord(0, 1, 0))
    before = dict(w.blocks)
    place_block(w, bot, "stone", Coord(1, 1, 1))
    mine_block(w, bot, Coord(1, 1, 1))
    assert w.blocks == before


def test_mine_empty_cell():
    w, bot = WorldState(), BotState(Coord(0, 1, 0))
    with pytest.raises(NothingThere):
        mine_block(w, bot, Coord(1, 1, 0))


def test_mining_support_makes_bot_fall():
    w = WorldState()
    for y in range(1, 4):
        w.blocks[Coord(0, y, 0)] = Cell("dirt", None)
    bot = BotState(Coord(0, 4, 0))
    mine_block(w, bot, Coord(0, 3, 0))
    # oracle: step-wise gravity, drop one cell while nothing solid is below
    pos = Coord(0, 4, 0)
    while not w.is_solid(Coord(pos.x, pos.y - 1, pos.z)):
        pos = Coord(pos.x, pos.y - 1, pos.z)
    assert bot.position == pos == Coord(0, 3, 0)


def test_orientable_blocks_default_north_and_others_drop_facing():
    w, bot = WorldState(), BotState(Coord(0, 1, 0))
    place_block(w, bot, "oak_door", Coord(1, 1, 0))
    place_block(w, bot, "stone", Coord(2, 1, 0), "east")
    assert w.get(Coord(1, 1, 0)).facing == "north"
    assert w.get(Coord(2, 1, 0)).facing is None


def bfs_len(w, start, goal, radius=24):
    """Independent shortest-path length over standable cells with the same step rules.

    The search is confined to a square of ``radius`` around the start.
    """
    seen, q = {start}, deque([(start, 0)])
    while q:
        c, d = q.popleft()
        if c == goal:
            return d
        for dx, dz in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            for dy in (1, 0, -1, -2, -3):
                n = Coord(c.x + dx, c.y + dy, c.z + dz)
                if max(abs(n.x - start.x), abs(n.z - start.z)) > radius:
                    continue
                if n in seen or not w.is_standable(n):
                    continue
                if dy == 1 and w.is_solid(Coord(c.x, c.y + 2, c.z)):
                    continue
                if dy < 0 and any(w.is_solid(Coord(n.x, y, n.z)) for y in range(n.y + 1, c.y + 2)):
                    continue
                seen.add(n)
                q.append((n, d + 1))
                break
    return None


def test_pathfind_identity():
    w, bot = WorldState(), BotState(Coord(0, 1, 0))
    assert pathfind(w, bot, Coord(0, 1, 0)) == []


def test_pathfind_corridor_length():
    w, bot = WorldState(), BotState(Coord(0, 1, 0))
    for x in range(-1, 12):
        for y in (1, 2):
            w.blocks[Coord(x, y, -1)] = Cell("stone", None)
            w.blocks[Coord(x, y, 1)] = Cell("stone", None)
    goal = Coord(10, 1, 0)
    path = pathfind(w, bot, goal)
    assert len(path) == bfs_len(w, Coord(0, 1, 0), goal) == 10
    assert path[-1] == goal


def test_pathfind_onto_tall_pillar_is_impossible():
    w, bot = WorldState(), BotState(Coord(0, 1, 0))
    for y in range(1, 6):
        w.blocks[Coord(3, y, 0)] = Cell("stone", None)
    goal = Coord(3, 6, 0)
    assert w.is_standable(goal)
    assert bfs_len(w, Coord(0, 1, 0), goal) is None
    with pytest.raises(NoPath):
        pathfind(w, bot, goal)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(-4, 4), st.integers(1, 3), st.integers(-4, 4)), max_size=25),
       st.tuples(st.integers(-4, 4), st.integers(-4, 4)))
def test_pathfind_steps_are_legal(blocks, goal_xz):
    w = WorldState()
    for x, y, z in blocks:
        if (x, z) != (0, 0):
            w.blocks[Coord(x, y, z)] = Cell("stone", None)
    bot = BotState(Coord(0, 1, 0))
    goal = next((Coord(goal_xz[0], y, goal_xz[1]) for y in range(1, 6)
                 if w.is_standable(Coord(goal_xz[0], y, goal_xz[1]))), None)
    if goal is None:
        return
    try:
        path = pathfind(w, bot, goal)
    except NoPath:
        assert bfs_len(w, Coord(0, 1, 0), goal) is None
        return
    assert len(path) == bfs_len(w, Coord(0, 1, 0), goal)
    prev = Coord(0, 1, 0)
    for c in path:
        assert not w.is_solid(c) and not w.is_solid(Coord(c.x, c.y + 1, c.z))
        assert abs(c.x - prev.x) + abs(c.z - prev.z) == 1
        assert -3 <= c.y - prev.y <= 1
        prev = c


def test_advance_time():
    w = WorldState()
    advance_time(w, 0)
    assert w.time == 0
    advance_time(w, 24000)
    assert w.time == 0
    w.time = 6000
    advance_time(w, 8000)
    assert w.time == 14000
    assert 13000 <= w.time < 23000 and is_night(w.time)


def lamp_with_sensor():
    w = WorldState()
    w.blocks[Coord(0, 1, 0)] = Cell("redstone_lamp", None)
    w.blocks[Coord(0, 2, 0)] = Cell("daylight_detector", None)
    return w


def test_lamp_lit_at_night_only():
    w = lamp_with_sensor()
    w.time = 18000
    redstone_update(w)
    assert Coord(0, 1, 0) in w.lit
    w.time = 6000
    redstone_update(w)
    assert Coord(0, 1, 0) not in w.lit


def test_lamp_without_source_never_lit():
    w = WorldState()
    w.blocks[Coord(0, 1, 0)] = Cell("redstone_lamp", None)
    for t in range(0, 24000, 1000):
        w.time = t
        redstone_update(w)
        assert not w.lit


@given(st.integers(0, 23999))
def test_redstone_update_idempotent(t):
    w = lamp_with_sensor()
    w.time = t
    once = redstone_update(w).lit
    assert redstone_update(w).lit == once
    assert (Coord(0, 1, 0) in once) == (13000 <= t < 23000)


ops = st.lists(st.tuples(st.sampled_from(["place", "mine"]), st.integers(-2, 2), st.integers(1, 3),
                         st.integers(-2, 2), st.sampled_from(["stone", "oak_planks", "air", "dirt"])), max_size=30)


def replay(seq):
    w, bot = WorldState(), BotState(Coord(0, 1, -4))
    for op, x, y, z, block in seq:
        try:
            if op == "place":
                place_block(w, bot, block, Coord(x, y, z))
            else:
                mine_block(w, bot, Coord(x, y, z))
        except Exception:
            pass
    return w, bot


@settings(max_examples=60, deadline=None)
@given(ops)
def test_evolution_is_deterministic_and_never_stores_air(seq):
    a, bot_a = replay(seq)
    b, bot_b = replay(seq)
    assert a.to_json() == b.to_json()
    assert bot_a.position == bot_b.position
    assert all(cell.id != "air" for cell in a.blocks.values())


def test_snapshot_round_trip_is_sorted_and_stable():
    w = lamp_with_sensor()
    w.blocks[Coord(-1, 1, 3)] = Cell("oak_door", "east")
    w.scaffold.add(Coord(-1, 1, 3))
    text = w.to_json()
    again = WorldState.from_json(text)
    assert again.to_json() == text
    rows = again.snapshot()["blocks"]
    assert [(r["y"], r["x"], r["z"]) for r in rows] == sorted((r["y"], r["x"], r["z"]) for r in rows)
