"""Command-line entry point: ``voxelsmith <command> ...``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import dsl
from .bench.ablation import DEFAULT_GRID, run_ablation
from .bench.stats import DegenerateInput, pearson, spearman
from .bench.tasks import TaskSpec, bench_dir, load_all
from .llm import LiveClient, RecordingClient, ScriptedClient
from .memory import MemoryPool
from .pipeline import TaskInput, render_region, run_task, views_text
from .reflection import render_views, serialize
from .world import BotState, Coord, WorldState

EXIT_OK = 0
EXIT_RESIDUAL = 2
EXIT_PIPELINE = 3
EXIT_USAGE = 64
EXIT_DATA = 65

log = logging.getLogger("voxelsmith")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--llm", choices=("live", "scripted"), default="scripted")
    p.add_argument("--transcript", help="transcript file, or a directory of <task>.json transcripts")
    p.add_argument("--memory", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--memory-path", default="./memory.jsonl")
    p.add_argument("--top-k", type=int, default=1)
    p.add_argument("--reflect", type=int, default=1, metavar="N")
    p.add_argument("--out", default="./runs")
    p.add_argument("--trace", action="store_true", help="log raw HTTP bodies of the live client")
    p.add_argument("--scaffold", action=argparse.BooleanOptionalAction, default=True)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="voxelsmith", description="Build voxel structures from instructions with an LLM agent.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("build", help="run the full pipeline for one task file")
    b.add_argument("task_file")
    _common(b)

    for name, helptext in (("bench", "run and score the benchmark tasks"),
                           ("ablate", "memory x reflection ablation grid")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--tasks", default=None, help="directory of task JSON files (default: shipped set)")
        p.add_argument("--only", action="append", default=None, help="restrict to a task name (repeatable)")
        p.add_argument("--trials", type=int, default=None)
        _common(p)

    c = sub.add_parser("corr", help="Pearson and Spearman of paired scores")
    c.add_argument("files", nargs="+", help="one two-column CSV, or two single-column CSVs")

    r = sub.add_parser("render", help="text views or a PNG of a world snapshot")
    r.add_argument("snapshot")
    r.add_argument("--out", choices=("txt", "png"), default="txt")
    r.add_argument("-o", "--output", help="output path (txt defaults to stdout)")

    m = sub.add_parser("memory", help="inspect or edit the memory pool")
    m.add_argument("action", choices=("list", "add", "clear"))
    m.add_argument("--memory-path", default="./memory.jsonl")
    m.add_argument("--task")
    m.add_argument("--plan", help="blueprint program file (.vsl)")
    return parser


def _run_dir(out: str, label: str) -> Path:
    stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S")
    base = Path(out)
    base.mkdir(parents=True, exist_ok=True)
    n = 0
    while True:
        d = base / (f"{stamp}-{label}" + (f"-{n}" if n else ""))
        try:
            d.mkdir()
            return d
        except FileExistsError:
            n += 1


def _write(path: Path, text: str) -> None:
    with open(path, "x", encoding="utf-8") as fh:
        fh.write(text)


def _transcript_for(args, task_name: str) -> Path:
    src = Path(args.transcript) if args.transcript else bench_dir() / "transcripts"
    path = src / f"{task_name}.json" if src.is_dir() else src
    if not path.is_file():
        raise FileNotFoundError(f"transcript not found: {path}")
    return path


def _make_client(args, task_name: str, trace_dir: Path | None):
    if args.llm == "scripted":
        return ScriptedClient.from_file(_transcript_for(args, task_name))
    return LiveClient(trace_dir=trace_dir if args.trace else None)


def _check_flags(args) -> None:
    if args.reflect < 0:
        raise UsageError("--reflect must be >= 0")
    if args.top_k < 1:
        raise UsageError("--top-k must be >= 1")
    if getattr(args, "trials", None) is not None and args.trials < 1:
        raise UsageError("--trials must be >= 1")


def cmd_build(args) -> int:
    _check_flags(args)
    try:
        task = TaskInput.load(args.task_file)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise DataError(f"cannot read task file {args.task_file}: {exc}") from exc
    task = task.with_config(memory=args.memory, max_reflections=args.reflect, top_k=args.top_k)
    run_dir = _run_dir(args.out, task.name)
    _write(run_dir / "task.json", json.dumps(task.to_dict(), indent=2) + "\n")
    try:
        inner = _make_client(args, task.name, run_dir / "http")
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE
    client = RecordingClient(inner)
    pool = MemoryPool(args.memory_path) if args.memory else None
    world, bot = WorldState(), BotState(Coord(0, 1, 0))

    def render_hook(rnd, w, box):
        from .render import render_png
        return str(render_png(w, box, run_dir / f"render_{rnd}.png"))

    result = run_task(client, task, world, bot, pool, scaffold=args.scaffold, render_hook=render_hook)
    _write(run_dir / "world_initial.json", result.world_initial or "")
    _write(run_dir / "world_final.json", world.to_json())
    if result.blueprint is not None:
        _write(run_dir / "blueprint.json", result.blueprint.to_json())
    if result.final_dsl is not None:
        _write(run_dir / "blueprint.vsl", result.final_dsl)
    if result.plan is not None:
        _write(run_dir / "plan.jsonl", result.plan.to_jsonl())
    _write(run_dir / "views.txt", views_text(result))
    _write(run_dir / "llm_trace.jsonl", client.to_jsonl())
    _write(run_dir / "build_result.json", result.to_json())
    if result.views is not None and world.blocks:
        render_hook("final", world, result.views.bbox)

    print(f"{task.name}: {result.status} (reflections used: {result.reflections_used})")
    print(f"run directory: {run_dir}")
    if result.status == "error":
        print(f"error: {result.error}", file=sys.stderr)
        return EXIT_PIPELINE
    if result.status == "residual":
        for issue in result.final_issues[:20]:
            print(f"  residual: {issue}", file=sys.stderr)
        return EXIT_RESIDUAL
    return EXIT_OK


def _specs(args) -> list[TaskSpec]:
    try:
        specs = load_all(args.tasks)
    except (OSError, ValueError, KeyError) as exc:
        raise DataError(f"cannot load task specs: {exc}") from exc
    if args.only:
        unknown = set(args.only) - {s.name for s in specs}
        if unknown:
            raise UsageError(f"unknown task(s): {', '.join(sorted(unknown))}")
        specs = [s for s in specs if s.name in args.only]
    if not specs:
        raise DataError("no task specs found")
    return specs


def _grid_run(args, grid, label: str) -> int:
    _check_flags(args)
    specs = _specs(args)
    specs = [TaskSpec(s.name, s.instruction, s.applicable_aspects, s.checker, s.image_ref, s.trials,
                      s.task_input(top_k=args.top_k).config, s.title) for s in specs]
    run_dir = _run_dir(args.out, label)
    seed = MemoryPool(args.memory_path) if Path(args.memory_path).exists() else None

    def factory(cell, spec, trial):
        return _make_client(args, spec.name, run_dir / "http" / f"{cell}-{spec.name}-{trial}")

    report = run_ablation(specs, factory, grid=grid, trials=args.trials, seed_pool=seed,
                          max_reflections=max(args.reflect, 1), scaffold=args.scaffold)
    report.write(run_dir)
    sys.stdout.write(report.to_text())
    print(f"run directory: {run_dir}")
    return EXIT_OK


def cmd_bench(args) -> int:
    return _grid_run(args, [(args.memory, args.reflect > 0)], "bench")


def cmd_ablate(args) -> int:
    return _grid_run(args, list(DEFAULT_GRID), "ablate")


def _numbers(path: str) -> list[list[float]]:
    rows = []
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.reader(fh):
                cells = [c.strip() for c in row if c.strip()]
                if not cells:
                    continue
                try:
                    rows.append([float(c) for c in cells])
                except ValueError:
                    if rows:
                        raise DataError(f"{path}: non-numeric row {row}") from None
                    # header line
    except OSError as exc:
        raise DataError(str(exc)) from exc
    return rows


def cmd_corr(args) -> int:
    if len(args.files) == 1:
        rows = _numbers(args.files[0])
        if any(len(r) < 2 for r in rows):
            raise DataError("expected two columns: human, machine")
        xs, ys = [r[-2] for r in rows], [r[-1] for r in rows]
    elif len(args.files) == 2:
        xs = [r[-1] for r in _numbers(args.files[0])]
        ys = [r[-1] for r in _numbers(args.files[1])]
    else:
        raise UsageError("corr takes one or two files")
    try:
        r, rho = pearson(xs, ys), spearman(xs, ys)
    except DegenerateInput as exc:
        raise DataError(str(exc)) from exc
    print(f"pearson {round(r, 12)!r}")
    print(f"spearman {round(rho, 12)!r}")
    return EXIT_OK


def cmd_render(args) -> int:
    try:
        world = WorldState.from_json(Path(args.snapshot).read_text(encoding="utf-8"))
    except (OSError, ValueError, KeyError) as exc:
        raise DataError(f"cannot read snapshot {args.snapshot}: {exc}") from exc
    if not world.blocks:
        raise DataError("snapshot contains no blocks")
    box = render_region(world, Coord(0, world.ground_y + 1, 0), None)
    if args.out == "txt":
        text = serialize(render_views(world, box))
        if args.output:
            _write(Path(args.output), text)
        else:
            sys.stdout.write(text)
        return EXIT_OK
    from .render import render_png
    out = Path(args.output or Path(args.snapshot).with_suffix(".png"))
    try:
        render_png(world, box, out)
    except FileExistsError as exc:
        raise DataError(f"{out} already exists") from exc
    print(out)
    return EXIT_OK


def cmd_memory(args) -> int:
    try:
        pool = MemoryPool(args.memory_path)
    except (OSError, ValueError, KeyError) as exc:
        raise DataError(f"cannot read memory pool {args.memory_path}: {exc}") from exc
    if args.action == "list":
        for rec in pool.records:
            first = rec.plan_dsl.strip().splitlines()[0] if rec.plan_dsl.strip() else ""
            print(f"{rec.id}\t{rec.created_at}\t{rec.task_text}\t{first}")
        return EXIT_OK
    if args.action == "clear":
        pool.clear()
        return EXIT_OK
    if not args.task or not args.plan:
        raise UsageError("memory add needs --task and --plan")
    try:
        plan_text = Path(args.plan).read_text(encoding="utf-8")
        dsl.parse(plan_text)
    except OSError as exc:
        raise DataError(str(exc)) from exc
    except dsl.DslError as exc:
        raise DataError(f"{args.plan}: {exc}") from exc
    rec = pool.add(args.task, plan_text)
    print(f"added record {rec.id}")
    return EXIT_OK


COMMANDS = {"build": cmd_build, "bench": cmd_bench, "ablate": cmd_ablate, "corr": cmd_corr,
            "render": cmd_render, "memory": cmd_memory}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
