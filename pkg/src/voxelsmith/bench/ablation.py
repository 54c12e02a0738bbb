"""Memory x reflection ablation grid over the benchmark tasks."""
from __future__ import annotations

import csv
import io
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

from ..memory import MemoryPool
from ..pipeline import BuildResult, run_task, views_text
from ..world import BotState, Coord, WorldState
from .checks import CHECKERS
from .judge import EvalScore, judge
from .tasks import TaskSpec

DEFAULT_GRID = ((False, False), (False, True), (True, False), (True, True))
START = Coord(0, 1, 0)


def cell_name(memory: bool, reflection: bool) -> str:
    return f"m{int(memory)}r{int(reflection)}"


@dataclass
class Trial:
    cell: str
    task: str
    index: int
    percentage: float
    aspects: dict[str, float] = field(default_factory=dict)
    failed: bool = False
    status: str = ""
    error: str | None = None


@dataclass(frozen=True)
class AblationCell:
    memory: bool
    reflection: bool
    task: str  # "*" for the pooled cell
    mean_pct: float
    stddev_pct: float
    n_trials: int
    failures: int = 0

    @property
    def name(self) -> str:
        return cell_name(self.memory, self.reflection)


@dataclass(frozen=True)
class Delta:
    factor: str  # memory | reflection
    context: str  # the other factor's setting, e.g. "r1"
    task: str
    baseline: float
    treated: float

    @property
    def absolute(self) -> float:
        return self.treated - self.baseline

    @property
    def relative(self) -> float | None:
        if self.baseline == 0:
            return None
        return (self.treated - self.baseline) / self.baseline * 100


def summarize(values: list[float]) -> tuple[float, float]:
    """Mean and sample standard deviation (0 for a single trial)."""
    mean = statistics.mean(values)
    sd = statistics.stdev(values) if len(values) > 1 else 0.0
    return mean, sd


@dataclass
class AblationReport:
    trials: list[Trial]
    cells: list[AblationCell]
    deltas: list[Delta]

    def cell(self, name: str, task: str = "*") -> AblationCell:
        for c in self.cells:
            if c.name == name and c.task == task:
                return c
        raise KeyError((name, task))

    def to_text(self) -> str:
        rows = [("cell", "task", "mean %", "stddev", "n", "failed")]
        for c in self.cells:
            rows.append((c.name, c.task, f"{c.mean_pct:.2f}", f"{c.stddev_pct:.2f}", str(c.n_trials), str(c.failures)))
        widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
        lines = ["  ".join(v.ljust(w) if i < 2 else v.rjust(w) for i, (v, w) in enumerate(zip(r, widths)))
                 for r in rows]
        lines.insert(1, "  ".join("-" * w for w in widths))
        if self.deltas:
            lines += ["", "deltas (treated vs baseline)"]
            for d in self.deltas:
                rel = "n/a" if d.relative is None else f"{d.relative:+.1f}%"
                lines.append(f"  {d.factor} on vs off [{d.context}] task={d.task}: "
                             f"{d.baseline:.2f} -> {d.treated:.2f}  relative {rel}  absolute {d.absolute:+.2f} pts")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["cell", "task", "trial", "percentage", "aspects", "failed"])
        for t in self.trials:
            aspects = ";".join(f"{a}={s:g}" for a, s in sorted(t.aspects.items()))
            w.writerow([t.cell, t.task, t.index, f"{t.percentage:.4f}", aspects, int(t.failed)])
        return buf.getvalue()

    def write(self, out_dir: str | Path) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "report.csv", "x", encoding="utf-8") as fh:
            fh.write(self.to_csv())
        with open(out / "report.txt", "x", encoding="utf-8") as fh:
            fh.write(self.to_text())


ClientFactory = Callable[[str, TaskSpec, int], object]


def run_trial(client, spec: TaskSpec, memory: bool, reflection: bool, pool: MemoryPool | None,
              max_reflections: int = 1, scaffold: bool = True) -> tuple[BuildResult | None, EvalScore | None, str | None]:
    task = spec.task_input(memory=memory, max_reflections=max_reflections if reflection else 0)
    world, bot = WorldState(), BotState(START)
    checker = CHECKERS[spec.checker] if spec.checker else None
    result = run_task(client, task, world, bot, pool if memory else None, checker=checker, scaffold=scaffold)
    if result.status == "error":
        return result, None, result.error
    try:
        ev = judge(client, spec.instruction, spec.applicable_aspects, views_text(result),
                   temperature=task.config.temperature)
    except Exception as exc:  # any judge failure scores the trial as 0
        return result, None, f"{type(exc).__name__}: {exc}"
    return result, ev, None


def run_ablation(tasks: Iterable[TaskSpec], client_factory: ClientFactory, *,
                 grid: Iterable[tuple[bool, bool]] = DEFAULT_GRID, trials: int | None = None,
                 seed_pool: MemoryPool | None = None, max_reflections: int = 1,
                 scaffold: bool = True) -> AblationReport:
    """Run every (cell, task, trial) combination.

    Each trial works on a fresh world and a private copy of ``seed_pool``,
    so trials never see each other's memories. A failed trial scores 0 and
    is flagged instead of stopping the grid.
    """
    tasks = list(tasks)
    grid = list(grid)
    all_trials: list[Trial] = []
    for memory, reflection in grid:
        name = cell_name(memory, reflection)
        for spec in tasks:
            for i in range(trials or spec.trials):
                pool = seed_pool.copy_to(None) if seed_pool is not None else MemoryPool()
                try:
                    client = client_factory(name, spec, i)
                    result, ev, err = run_trial(client, spec, memory, reflection, pool, max_reflections, scaffold)
                except Exception as exc:
                    result, ev, err = None, None, f"{type(exc).__name__}: {exc}"
                status = result.status if result is not None else "error"
                if ev is None:
                    all_trials.append(Trial(name, spec.name, i, 0.0, {}, True, status, err))
                else:
                    all_trials.append(Trial(name, spec.name, i, ev.percentage, dict(ev.per_aspect), False, status))
    return aggregate(all_trials, grid, [s.name for s in tasks])


def aggregate(trials: list[Trial], grid: list[tuple[bool, bool]], task_names: list[str]) -> AblationReport:
    cells = []
    means: dict[tuple[str, str], float] = {}
    for memory, reflection in grid:
        name = cell_name(memory, reflection)
        for task in [*task_names, "*"]:
            sel = [t for t in trials if t.cell == name and (task == "*" or t.task == task)]
            if not sel:
                continue
            mean, sd = summarize([t.percentage for t in sel])
            cells.append(AblationCell(memory, reflection, task, mean, sd, len(sel), sum(t.failed for t in sel)))
            means[(name, task)] = mean
    deltas = []
    for task in [*task_names, "*"]:
        for other in (False, True):
            for factor in ("memory", "reflection"):
                off = cell_name(False, other) if factor == "memory" else cell_name(other, False)
                on = cell_name(True, other) if factor == "memory" else cell_name(other, True)
                if (off, task) in means and (on, task) in means:
                    ctx = f"r{int(other)}" if factor == "memory" else f"m{int(other)}"
                    deltas.append(Delta(factor, ctx, task, means[(off, task)], means[(on, task)]))
    return AblationReport(trials, cells, deltas)
