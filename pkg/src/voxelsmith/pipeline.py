"""Instruction to finished build: synopsis, blueprint, construction, repair."""
from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from . import dsl, prompts
from .bench.checks import CHECKERS, CheckReport
from .blueprint import Blueprint, BoundingBox, absolute_box, diff, validate
from .llm import JsonShapeError, LlmError, Message, extract_json
from .memory import MemoryPool
from .planner import ActionPlan, PlanningError, execute, plan
from .reflection import ViewSet, reflect, render_views, serialize
from .world import BotState, Coord, WorldState

log = logging.getLogger(__name__)

# offsets a generated blueprint may use, relative to the start position
DEFAULT_LIMITS = BoundingBox(Coord(-32, 0, -32), Coord(32, 64, 32))


class PipelineError(RuntimeError):
    pass


class MultimodalUnsupported(PipelineError):
    pass


class SectionMissing(PipelineError):
    def __init__(self, name: str):
        super().__init__(f"layout synopsis has no {name!r} section")
        self.name = name


@dataclass(frozen=True)
class TaskConfig:
    memory: bool = True
    max_reflections: int = 1
    temperature: float = 0.0
    top_k: int = 1

    def __post_init__(self):
        if self.max_reflections < 0:
            raise ValueError("max_reflections must be >= 0")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")


@dataclass(frozen=True)
class TaskInput:
    name: str
    instruction: str = ""
    image_ref: str | None = None
    config: TaskConfig = field(default_factory=TaskConfig)

    def __post_init__(self):
        if not self.instruction.strip() and not self.image_ref:
            raise ValueError("a task needs an instruction, an image, or both")

    @classmethod
    def from_dict(cls, d: dict, base_dir: Path | None = None) -> TaskInput:
        cfg = d.get("config") or {}
        known = {k: cfg[k] for k in ("memory", "max_reflections", "temperature", "top_k") if k in cfg}
        image = d.get("image_ref")
        if image and base_dir is not None and not Path(image).is_absolute():
            image = str(base_dir / image)
        return cls(str(d["name"]), str(d.get("instruction") or ""), image, TaskConfig(**known))

    @classmethod
    def load(cls, path: str | Path) -> TaskInput:
        path = Path(path)
        return cls.from_dict(json.loads(path.read_text(encoding="utf-8")), path.parent)

    def to_dict(self) -> dict:
        c = self.config
        return {"name": self.name, "instruction": self.instruction, "image_ref": self.image_ref,
                "config": {"memory": c.memory, "max_reflections": c.max_reflections,
                           "temperature": c.temperature, "top_k": c.top_k}}

    def with_config(self, **changes) -> TaskInput:
        c = self.config
        merged = {"memory": c.memory, "max_reflections": c.max_reflections,
                  "temperature": c.temperature, "top_k": c.top_k, **changes}
        return TaskInput(self.name, self.instruction, self.image_ref, TaskConfig(**merged))


@dataclass(frozen=True)
class LayoutSynopsis:
    components_positioning: str
    dimensional_layout: str
    description_sequence: str
    raw: str

    def to_dict(self) -> dict:
        return {"components_positioning": self.components_positioning,
                "dimensional_layout": self.dimensional_layout,
                "description_sequence": self.description_sequence}


SECTIONS = (
    ("components_positioning", "Components and Positioning"),
    ("dimensional_layout", "Dimensional Layout"),
    ("description_sequence", "Description"),
)

_HEADING = re.compile(
    r"^[ \t]*(?:#+[ \t]*)?(?:\d+[.)][ \t]*)?(?:[*_]{1,2}[ \t]*)?"
    r"(components\s+and\s+positioning|dimensional\s+layout|description(?:\s+and\s+construction\s+sequence)?)"
    r"(?:[ \t]*[*_]{0,2}[ \t]*:[ \t]*[*_]{0,2}|[ \t]*[*_]{0,2}[ \t]*$)(.*)$",
    re.I | re.M,
)


def _section_key(heading: str) -> str:
    h = " ".join(heading.lower().split())
    if h.startswith("components"):
        return "components_positioning"
    if h.startswith("dimensional"):
        return "dimensional_layout"
    return "description_sequence"


def parse_synopsis(text: str) -> LayoutSynopsis:
    """Split a reply into the three sections by their headings.

    Numbering, markdown emphasis and a trailing colon around a heading are
    all accepted. The first occurrence of each heading wins.
    """
    found: list[tuple[int, int, str]] = []
    seen = set()
    for m in _HEADING.finditer(text):
        key = _section_key(m.group(1))
        if key in seen:
            continue
        seen.add(key)
        found.append((m.start(), m.start(2), key))
    parts: dict[str, str] = {}
    for i, (_, body_start, key) in enumerate(found):
        end = found[i + 1][0] if i + 1 < len(found) else len(text)
        parts[key] = text[body_start:end].strip()
    for key, label in SECTIONS:
        if not parts.get(key):
            raise SectionMissing(label)
    return LayoutSynopsis(parts["components_positioning"], parts["dimensional_layout"],
                          parts["description_sequence"], text)


IMAGE_ONLY_TEXT = "(no text description; see the attached reference image)"


def synopsis(client, task: TaskInput) -> LayoutSynopsis:
    if task.image_ref and not client.supports_images:
        raise MultimodalUnsupported(f"task {task.name!r} has a reference image but the client is text-only")
    text = task.instruction.strip() or IMAGE_ONLY_TEXT
    messages = [Message("user", prompts.render("layout_synopsis", {"text": text}), task.image_ref)]
    temp = task.config.temperature
    reply = client.complete(messages, temperature=temp)
    try:
        return parse_synopsis(reply)
    except SectionMissing as exc:
        messages += [Message("assistant", reply),
                     Message("user", prompts.fill(prompts.SECTION_REPAIR, section=exc.name))]
        reply = client.complete(messages, temperature=temp)
        return parse_synopsis(reply)


@dataclass(frozen=True)
class GeneratedBlueprint:
    program: dsl.DslProgram
    code: str
    repairs: int


def generate_blueprint(client, syn: LayoutSynopsis, retrieved: list, temperature: float = 0.0) -> GeneratedBlueprint:
    """Ask for the blueprint program; ``retrieved`` holds memory records or (record, score) pairs."""
    plans = [(r[0] if isinstance(r, tuple) else r).plan_dsl for r in retrieved]
    messages = [
        Message("system", prompts.BLUEPRINT_SYSTEM),
        Message("user", prompts.render("blueprint_user", {
            "retrievedPlans": prompts.format_retrieved(plans), "structure": syn.raw})),
        Message("user", prompts.DSL_INSTRUCTIONS),
    ]
    repairs = 0
    reply = client.complete(messages, temperature=temperature, json_mode=True)
    try:
        code = extract_json(reply, ("code",))["code"]
    except JsonShapeError as exc:
        repairs += 1
        messages += [Message("assistant", reply), Message("user", prompts.fill(prompts.JSON_REPAIR, error=str(exc)))]
        reply = client.complete(messages, temperature=temperature, json_mode=True)
        code = extract_json(reply, ("code",))["code"]
    try:
        program = dsl.parse(code)
    except dsl.DslError as exc:
        repairs += 1
        messages += [Message("assistant", reply), Message("user", prompts.fill(prompts.DSL_REPAIR, error=str(exc)))]
        reply = client.complete(messages, temperature=temperature, json_mode=True)
        code = extract_json(reply, ("code",))["code"]
        try:
            program = dsl.parse(code)
        except dsl.DslError as again:
            again.source = code
            raise
    return GeneratedBlueprint(program, code, repairs)


@dataclass
class RoundRecord:
    round: int
    dsl: str
    placements: int = 0
    validation: list[str] = field(default_factory=list)
    plan_stats: dict | None = None
    execution: dict | None = None
    mismatches: list[dict] = field(default_factory=list)
    check: dict | None = None
    issues: list[str] = field(default_factory=list)
    reflection: str | None = None

    def to_dict(self) -> dict:
        return {
            "round": self.round, "dsl": self.dsl, "placements": self.placements,
            "validation": self.validation, "plan_stats": self.plan_stats, "execution": self.execution,
            "mismatches": self.mismatches, "check": self.check, "issues": self.issues,
            "reflection": self.reflection,
        }


@dataclass
class BuildResult:
    task: str
    status: str = "error"  # success | residual | error
    error: str | None = None
    origin: Coord = Coord(0, 0, 0)
    synopsis: LayoutSynopsis | None = None
    retrieved: list[dict] = field(default_factory=list)
    rounds: list[RoundRecord] = field(default_factory=list)
    reflections_used: int = 0
    memory_record_id: int | None = None
    notes: list[str] = field(default_factory=list)
    # artifacts for the run directory; not part of the JSON result
    blueprint: Blueprint | None = None
    plan: ActionPlan | None = None
    views: ViewSet | None = None
    world_initial: str | None = None

    @property
    def success(self) -> bool:
        return self.status == "success"

    @property
    def final_dsl(self) -> str | None:
        return self.rounds[-1].dsl if self.rounds else None

    @property
    def final_issues(self) -> list[str]:
        return self.rounds[-1].issues if self.rounds else []

    @property
    def diff_history(self) -> list[int]:
        return [len(r.mismatches) for r in self.rounds]

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "status": self.status,
            "success": self.success,
            "error": self.error,
            "origin": list(self.origin),
            "synopsis": self.synopsis.to_dict() if self.synopsis else None,
            "retrieved": self.retrieved,
            "reflections_used": self.reflections_used,
            "diff_history": self.diff_history,
            "rounds": [r.to_dict() for r in self.rounds],
            "final_dsl": self.final_dsl,
            "memory_record_id": self.memory_record_id,
            "notes": self.notes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def render_region(world: WorldState, origin: Coord, bp: Blueprint | None) -> BoundingBox:
    """Box around the blueprint and everything standing in the world."""
    pts: list[Coord] = []
    if bp is not None and len(bp):
        box = absolute_box(bp, origin)
        pts += [box.min, box.max]
    pts += [c for c in world.blocks if c not in world.scaffold]
    if not pts:
        return BoundingBox(origin, origin)
    return BoundingBox(Coord(min(p.x for p in pts), min(p.y for p in pts), min(p.z for p in pts)),
                       Coord(max(p.x for p in pts), max(p.y for p in pts), max(p.z for p in pts)))


class _Builder:
    """Builds one blueprint after another into the same world, clearing leftovers."""

    def __init__(self, world: WorldState, bot: BotState, origin: Coord, checker, scaffold: bool):
        self.world, self.bot, self.origin = world, bot, origin
        self.checker = checker
        self.scaffold = scaffold
        self.untouchable = set(world.blocks)

    def attempt(self, rec: RoundRecord) -> tuple[Blueprint | None, ActionPlan | None]:
        try:
            bp = dsl.compile_text(rec.dsl)
        except dsl.DslError as exc:
            rec.issues.append(f"blueprint does not compile: {exc}")
            return None, None
        rec.placements = len(bp)
        report = validate(bp, DEFAULT_LIMITS)
        rec.validation = [f"{v.severity} {v.kind} (placement {v.index}): {v.message}" for v in report.violations]
        if not report.ok:
            rec.issues += [f"invalid blueprint: {v.kind}: {v.message}" for v in report.errors]
            return bp, None
        wanted = {self.origin + p.offset: p.label() for p in bp}
        stale = []
        for c, cell in self.world.blocks.items():
            if c in self.untouchable or c in self.world.scaffold:
                continue
            label = f"{cell.id}[{cell.facing}]" if cell.facing else cell.id
            if wanted.get(c) != label:
                stale.append(c)
        try:
            actions = plan(self.world, self.bot, self.origin, bp, scaffold=self.scaffold, remove=stale)
        except PlanningError as exc:
            rec.issues.append(f"cannot plan construction: {exc}")
            self._inspect(rec, bp)
            return bp, None
        rec.plan_stats = actions.stats()
        ex = execute(actions, self.world, self.bot)
        rec.execution = ex.summary()
        if not ex.success:
            rec.issues.append(f"construction stopped at action {ex.failed_index}: {ex.error_kind}: {ex.error}")
        self._inspect(rec, bp)
        return bp, actions

    def _inspect(self, rec: RoundRecord, bp: Blueprint) -> None:
        mism = diff(self.world, self.origin, bp)
        rec.mismatches = [m.to_dict() for m in mism]
        rec.issues += [m.describe() for m in mism]
        if self.checker is not None:
            report: CheckReport = self.checker(self.world, self.origin)
            rec.check = report.to_dict()
            for p in report.failures:
                rec.issues.append(f"requirement not met: {p.name}" + (f" ({p.detail})" if p.detail else ""))


def run_task(client, task: TaskInput, world: WorldState, bot: BotState, memory_pool: MemoryPool | None = None, *,
             checker: Callable[[WorldState, Coord], CheckReport] | None | str = "auto", scaffold: bool = True,
             render_hook: Callable[[int, WorldState, BoundingBox], str | None] | None = None) -> BuildResult:
    """Run the whole pipeline; errors end up in the result, never raised.

    ``checker="auto"`` picks the structural checker registered under the
    task name, if any. ``render_hook(round, world, box)`` may write an image
    and return its path, which is attached to reflection prompts for
    clients that accept images.
    """
    if checker == "auto":
        checker = CHECKERS.get(task.name)
    origin = bot.position
    result = BuildResult(task.name, origin=origin, world_initial=world.to_json())
    cfg = task.config
    builder = _Builder(world, bot, origin, checker, scaffold)
    try:
        syn = synopsis(client, task)
        result.synopsis = syn
        hits = []
        if cfg.memory and memory_pool is not None and task.instruction.strip():
            hits = memory_pool.retrieve(task.instruction, cfg.top_k)
            result.retrieved = [{"id": r.id, "score": s, "task_text": r.task_text} for r, s in hits]
        try:
            gen = generate_blueprint(client, syn, hits, cfg.temperature)
        except dsl.DslError as exc:
            # handed to reflection like any other defect
            code = getattr(exc, "source", "")
            result.notes.append(f"generated blueprint did not compile after repair: {exc}")
        else:
            code = gen.code
            if gen.repairs:
                result.notes.append(f"blueprint reply repaired {gen.repairs} time(s)")

        rnd = 0
        while True:
            rec = RoundRecord(rnd, code)
            result.rounds.append(rec)
            if code:
                bp, actions = builder.attempt(rec)
            else:
                bp, actions = None, None
                rec.issues.append("no blueprint program was produced")
            if bp is not None:
                result.blueprint = bp
            if actions is not None:
                result.plan = actions
            box = render_region(world, origin, bp)
            result.views = render_views(world, box)
            if not rec.issues:
                result.status = "success"
                break
            if result.reflections_used >= cfg.max_reflections:
                result.status = "residual"
                break
            image = render_hook(rnd, world, box) if render_hook else None
            result.reflections_used += 1
            if result.reflections_used == 1:
                result.notes.append("reflection prompts carry automated mismatch hints after the template")
            try:
                rr = reflect(client, syn.raw, result.views, code, rec.issues, image=image,
                             temperature=cfg.temperature)
            except JsonShapeError as exc:
                # the round is spent; the previous program is built again
                rec.reflection = f"(unusable reflection reply: {exc})"
                rnd += 1
                continue
            rec.reflection = rr.reflection_text
            code = rr.repaired_dsl
            rnd += 1
    except (PipelineError, JsonShapeError, LlmError, dsl.DslError, OSError, ValueError) as exc:
        result.status = "error"
        result.error = f"{type(exc).__name__}: {exc}"
        log.warning("task %s failed: %s", task.name, result.error)
        return result

    if result.success and cfg.memory and memory_pool is not None and task.instruction.strip():
        rec = memory_pool.add(task.instruction, result.final_dsl)
        result.memory_record_id = rec.id
    return result


def views_text(result: BuildResult) -> str:
    return serialize(result.views) if result.views is not None else ""
