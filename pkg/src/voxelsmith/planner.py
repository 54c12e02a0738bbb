"""Blueprint to primitive-action planning, with pillar scaffolding."""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Union

from . import blocks
from .blocks import SCAFFOLD_BLOCK
from .blueprint import Blueprint, Placement
from .world import (
    DOWN, UP, BotState, BoundingBox, Coord, IllegalMove, NothingThere, WorldError, WorldState,
    chebyshev, follow, jump_place, mine_block, moves, place_block,
)

DEFAULT_SCAFFOLD_BUDGET = 256


@dataclass(frozen=True)
class Move:
    path: tuple[Coord, ...]
    op = "move"

    def to_dict(self) -> dict:
        return {"op": self.op, "path": [list(c) for c in self.path]}


@dataclass(frozen=True)
class Place:
    block: str
    at: Coord
    facing: str | None = None
    op = "place"

    def to_dict(self) -> dict:
        return {"op": self.op, "id": self.block, "at": list(self.at), "facing": self.facing}


@dataclass(frozen=True)
class Mine:
    at: Coord
    op = "mine"

    def to_dict(self) -> dict:
        return {"op": self.op, "at": list(self.at)}


@dataclass(frozen=True)
class ScaffoldPlace:
    at: Coord
    op = "scaffold_place"

    def to_dict(self) -> dict:
        return {"op": self.op, "at": list(self.at)}


@dataclass(frozen=True)
class ScaffoldRemove:
    at: Coord
    op = "scaffold_remove"

    def to_dict(self) -> dict:
        return {"op": self.op, "at": list(self.at)}


Action = Union[Move, Place, Mine, ScaffoldPlace, ScaffoldRemove]


def action_from_dict(d: dict) -> Action:
    op = d["op"]
    if op == "move":
        return Move(tuple(Coord(*c) for c in d["path"]))
    if op == "place":
        return Place(d["id"], Coord(*d["at"]), d.get("facing"))
    at = Coord(*d["at"])
    return {"mine": Mine, "scaffold_place": ScaffoldPlace, "scaffold_remove": ScaffoldRemove}[op](at)


@dataclass
class ActionPlan:
    actions: list[Action] = field(default_factory=list)
    scaffold_budget: int = DEFAULT_SCAFFOLD_BUDGET

    def __len__(self) -> int:
        return len(self.actions)

    def count(self, op: str) -> int:
        return sum(1 for a in self.actions if a.op == op)

    def stats(self) -> dict:
        ops = ("move", "place", "mine", "scaffold_place", "scaffold_remove")
        out = {"actions": len(self.actions)}
        out.update({op: self.count(op) for op in ops})
        out["steps"] = sum(len(a.path) for a in self.actions if isinstance(a, Move))
        return out

    def to_jsonl(self) -> str:
        return "".join(json.dumps(a.to_dict()) + "\n" for a in self.actions)

    @classmethod
    def from_jsonl(cls, text: str) -> ActionPlan:
        return cls([action_from_dict(json.loads(line)) for line in text.splitlines() if line.strip()])


class PlanningError(Exception):
    pass


class Unplannable(PlanningError):
    def __init__(self, placement: Placement | None, at: Coord | None, reason: str):
        where = f" at {tuple(at)}" if at is not None else ""
        what = placement.block if placement is not None else "block"
        super().__init__(f"cannot plan {what}{where}: {reason}")
        self.placement = placement
        self.at = at
        self.reason = reason


class ScaffoldBudgetExceeded(PlanningError):
    pass


def _phase(block: str) -> int:
    d = blocks.REGISTRY.get(block)
    return 1 if d is not None and (d.orientable or d.furniture) else 0


def order_placements(bp: Blueprint) -> list[Placement]:
    """Structural blocks before furniture, bottom-up, centre-out, then (x, z)."""
    if not bp.placements:
        return []
    xs = [p.offset.x for p in bp.placements]
    zs = [p.offset.z for p in bp.placements]
    # doubled coordinates keep the footprint centre integral
    cx2, cz2 = min(xs) + max(xs), min(zs) + max(zs)

    def key(p: Placement):
        o = p.offset
        return (_phase(p.block), o.y, abs(2 * o.x - cx2) + abs(2 * o.z - cz2), o.x, o.z)

    return sorted(bp.placements, key=key)


@dataclass(frozen=True)
class _Target:
    placement: Placement
    at: Coord


class _Planner:
    def __init__(self, world: WorldState, bot: BotState, *, scaffold: bool, budget: int):
        self.world = world.copy()
        self.bot = bot.copy()
        self.scaffold = scaffold
        self.budget = budget
        self.scaffold_used = 0
        self.tower: list[Coord] = []
        self.actions: list[Action] = []
        self.pending: set[Coord] = set()
        self.box: BoundingBox | None = None

    # -- simulation-backed emitters --------------------------------------

    def _emit(self, action: Action) -> None:
        self.actions.append(action)
        w, b = self.world, self.bot
        if isinstance(action, Move):
            follow(w, b, list(action.path))
        elif isinstance(action, Place):
            place_block(w, b, action.block, action.at, action.facing)
        elif isinstance(action, Mine):
            mine_block(w, b, action.at)
        elif isinstance(action, ScaffoldPlace):
            jump_place(w, b, SCAFFOLD_BLOCK)
        else:
            mine_block(w, b, action.at)

    # -- reachability ----------------------------------------------------

    def _spot_ok(self, spot: Coord, at: Coord) -> bool:
        return (chebyshev(spot, at) <= self.bot.reach and at != spot and at != spot + UP
                and at != spot + DOWN)

    def _bfs(self, stop_at: Coord | None = None):
        """Distances over standable cells; with ``stop_at`` return the nearest usable spot."""
        start = self.bot.position
        dist = {start: 0}
        parents: dict[Coord, Coord | None] = {start: None}
        queue = deque([start])
        best: Coord | None = None
        while queue:
            c = queue.popleft()
            if stop_at is not None:
                if best is not None and dist[c] > dist[best]:
                    break
                if self._spot_ok(c, stop_at) and (best is None or c.yxz() < best.yxz()):
                    best = c
                    continue
            for n in moves(self.world, c):
                if n not in dist and n in self.box:
                    dist[n] = dist[c] + 1
                    parents[n] = c
                    queue.append(n)
        return dist, parents, best

    @staticmethod
    def _path(parents, goal: Coord) -> tuple[Coord, ...]:
        path = []
        c = goal
        while parents[c] is not None:
            path.append(c)
            c = parents[c]
        return tuple(reversed(path))

    def _go(self, parents, spot: Coord) -> None:
        path = self._path(parents, spot)
        if path:
            self._emit(Move(path))

    def _column_clear(self, base: Coord, top: int) -> bool:
        return all(self.world.is_empty(Coord(base.x, y, base.z)) for y in range(base.y, top + 1))

    def _spend(self, n: int, target: _Target) -> None:
        if self.scaffold_used + n > self.budget:
            raise ScaffoldBudgetExceeded(
                f"{self.scaffold_used + n} scaffold blocks needed for {target.placement.block} at "
                f"{tuple(target.at)}, budget is {self.budget}")
        self.scaffold_used += n

    def _pillar(self, n: int) -> None:
        for _ in range(n):
            feet = self.bot.position
            self._emit(ScaffoldPlace(feet))
            self.tower.append(feet)

    def _teardown(self) -> None:
        while self.tower:
            self._emit(ScaffoldRemove(self.tower.pop()))

    def _try_extend(self, t: _Target) -> bool:
        feet, at, reach = self.bot.position, t.at, self.bot.reach
        if max(abs(feet.x - at.x), abs(feet.z - at.z)) > reach or (feet.x, feet.z) == (at.x, at.z):
            return False
        h = at.y - reach - feet.y
        if h < 1 or not self._column_clear(feet + (0, 2, 0), feet.y + h + 1):
            return False
        self._spend(h, t)
        self._pillar(h)
        return True

    def _build_tower(self, t: _Target, dist, parents) -> None:
        at, reach = t.at, self.bot.reach
        best_key, best = None, None
        for base, d in dist.items():
            if max(abs(base.x - at.x), abs(base.z - at.z)) > reach or (base.x, base.z) == (at.x, at.z):
                continue
            h = at.y - reach - base.y
            if h < 1:
                continue
            top = base.y + h + 1
            if not self._column_clear(base, top):
                continue
            collides = any(Coord(base.x, y, base.z) in self.pending for y in range(base.y, top + 1))
            key = (collides, d, h, base.yxz())
            if best_key is None or key < best_key:
                best_key, best = key, (base, h)
        if best is None:
            raise Unplannable(t.placement, at, "no standing spot or scaffold column within reach")
        base, h = best
        self._spend(h, t)
        self._go(parents, base)
        self._pillar(h)

    def _reach(self, t: _Target) -> None:
        at = t.at
        if self.tower:
            if at not in self.tower and self._spot_ok(self.bot.position, at):
                return
            if at not in self.tower and self._try_extend(t):
                return
            self._teardown()
        _, parents, spot = self._bfs(stop_at=at)
        if spot is not None:
            self._go(parents, spot)
            return
        if not self.scaffold:
            raise Unplannable(t.placement, at, "out of reach and scaffolding is disabled")
        dist, parents, _ = self._bfs()
        self._build_tower(t, dist, parents)

    # -- placement loop --------------------------------------------------

    def _place(self, t: _Target) -> None:
        at = t.at
        if at in self.world.blocks and at not in self.tower:
            raise Unplannable(t.placement, at, f"cell already holds {self.world.blocks[at].id}")
        if all(self.world.is_solid(n) for n in at.neighbors()) and at not in self.tower:
            raise Unplannable(t.placement, at, "cell is enclosed on all six faces")
        self._reach(t)
        p = t.placement
        self._emit(Place(p.block, at, p.effective_facing))
        self.pending.discard(at)

    def _mine(self, at: Coord) -> None:
        if self.tower and not self._spot_ok(self.bot.position, at):
            self._teardown()
        if not self.tower:
            _, parents, spot = self._bfs(stop_at=at)
            if spot is None:
                raise Unplannable(None, at, "no standing spot within reach to mine from")
            self._go(parents, spot)
        self._emit(Mine(at))

    def run(self, origin: Coord, bp: Blueprint, remove: Iterable[Coord]) -> ActionPlan:
        origin = Coord(*origin)
        targets = []
        for p in order_placements(bp):
            at = origin + p.offset
            cell = self.world.blocks.get(at)
            if cell is not None and cell.id == p.block and cell.facing == p.effective_facing:
                continue
            targets.append(_Target(p, at))
        removals = sorted({Coord(*c) for c in remove}, key=lambda c: (-c.y, c.x, c.z))
        self.pending = {t.at for t in targets}
        pts = [t.at for t in targets] + removals + [self.bot.position]
        margin = self.bot.reach + 3
        self.box = BoundingBox(
            Coord(min(p.x for p in pts) - margin, self.world.ground_y + 1, min(p.z for p in pts) - margin),
            Coord(max(p.x for p in pts) + margin, max(p.y for p in pts) + 3, max(p.z for p in pts) + margin),
        )
        try:
            for c in removals:
                if c in self.world.blocks:
                    self._mine(c)
            deferred: list[_Target] = []
            for t in targets:
                if self.world.has_support(t.at):
                    self._place(t)
                    self._flush(deferred)
                else:
                    deferred.append(t)
            self._flush(deferred)
            if deferred:
                t = deferred[0]
                raise Unplannable(t.placement, t.at, "no adjacent solid block to build against")
            self._teardown()
        except WorldError as exc:  # the simulator disagrees with the planner
            raise PlanningError(f"internal planning error: {exc}") from exc
        return ActionPlan(self.actions, self.budget)

    def _flush(self, deferred: list[_Target]) -> None:
        progress = True
        while progress and deferred:
            progress = False
            for i, t in enumerate(deferred):
                if self.world.has_support(t.at):
                    del deferred[i]
                    self._place(t)
                    progress = True
                    break


def plan(world: WorldState, bot: BotState, origin: Coord, bp: Blueprint, *,
         scaffold: bool = True, scaffold_budget: int = DEFAULT_SCAFFOLD_BUDGET,
         remove: Iterable[Coord] = ()) -> ActionPlan:
    """Plan the construction of ``bp`` at ``origin``; neither input is modified.

    Cells listed in ``remove`` are mined first, top-down.  Placements whose
    cell already holds the right block are skipped.
    """
    return _Planner(world, bot, scaffold=scaffold, budget=scaffold_budget).run(origin, bp, remove)


@dataclass
class ActionOutcome:
    index: int
    op: str
    ok: bool
    error: str | None = None

    def to_dict(self) -> dict:
        return {"index": self.index, "op": self.op, "ok": self.ok, "error": self.error}


@dataclass
class ExecutionReport:
    outcomes: list[ActionOutcome] = field(default_factory=list)
    total_actions: int = 0
    scaffold_peak: int = 0
    failed_index: int | None = None
    error_kind: str | None = None
    error: str | None = None

    @property
    def success(self) -> bool:
        return self.failed_index is None

    @property
    def failures(self) -> list[ActionOutcome]:
        return [o for o in self.outcomes if not o.ok]

    def summary(self) -> dict:
        return {
            "success": self.success,
            "total_actions": self.total_actions,
            "executed": len(self.outcomes),
            "scaffold_peak": self.scaffold_peak,
            "failed_index": self.failed_index,
            "error_kind": self.error_kind,
            "error": self.error,
        }


def _apply(action: Action, world: WorldState, bot: BotState) -> None:
    if isinstance(action, Move):
        follow(world, bot, list(action.path))
    elif isinstance(action, Place):
        place_block(world, bot, action.block, action.at, action.facing)
    elif isinstance(action, Mine):
        mine_block(world, bot, action.at)
    elif isinstance(action, ScaffoldPlace):
        if action.at != bot.position:
            raise IllegalMove(f"scaffold at {tuple(action.at)} is not under the bot at "
                              f"{tuple(bot.position)}", action.at)
        jump_place(world, bot, SCAFFOLD_BLOCK)
    else:
        if action.at not in world.scaffold:
            raise NothingThere(f"no scaffold block at {tuple(action.at)}", action.at)
        mine_block(world, bot, action.at)


def execute(plan: ActionPlan, world: WorldState, bot: BotState) -> ExecutionReport:
    """Replay ``plan`` in ``world``, mutating it; stops at the first failing action."""
    report = ExecutionReport(total_actions=len(plan.actions))
    for i, action in enumerate(plan.actions):
        try:
            _apply(action, world, bot)
        except WorldError as exc:
            report.outcomes.append(ActionOutcome(i, action.op, False, f"{exc.kind}: {exc}"))
            report.failed_index = i
            report.error_kind = exc.kind
            report.error = str(exc)
            break
        report.outcomes.append(ActionOutcome(i, action.op, True))
        report.scaffold_peak = max(report.scaffold_peak, len(world.scaffold))
    return report
