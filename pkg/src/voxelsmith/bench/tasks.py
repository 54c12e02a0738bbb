"""Benchmark task specifications shipped as JSON files."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from ..pipeline import TaskConfig, TaskInput
from .checks import CHECKERS

ASPECTS = ("Correctness", "Complexity", "Creativity", "Functionality")
TASK_NAMES = ("wooden_house", "snow_pyramid", "village_house", "watchtower", "mansion")
DEFAULT_TRIALS = 10


def bench_dir() -> Path:
    return Path(str(resources.files("voxelsmith") / "data" / "bench"))


@dataclass(frozen=True)
class TaskSpec:
    name: str
    instruction: str
    applicable_aspects: tuple[str, ...]
    checker: str | None  # None: no structural check
    image_ref: str | None = None
    trials: int = DEFAULT_TRIALS
    config: TaskConfig = field(default_factory=TaskConfig)
    title: str = ""

    def __post_init__(self):
        if not self.applicable_aspects:
            raise ValueError(f"{self.name}: at least one aspect must apply")
        unknown = set(self.applicable_aspects) - set(ASPECTS)
        if unknown:
            raise ValueError(f"{self.name}: unknown aspects {sorted(unknown)}")
        if self.checker is not None and self.checker not in CHECKERS:
            raise ValueError(f"{self.name}: no checker named {self.checker!r}")
        if self.trials < 1:
            raise ValueError(f"{self.name}: trials must be >= 1")

    @classmethod
    def from_dict(cls, d: dict, base_dir: Path | None = None) -> TaskSpec:
        task = TaskInput.from_dict(d, base_dir)
        return cls(task.name, task.instruction, tuple(d["applicable_aspects"]), d.get("checker", task.name),
                   task.image_ref, int(d.get("trials", DEFAULT_TRIALS)), task.config, d.get("title", ""))

    @classmethod
    def load(cls, path: str | Path) -> TaskSpec:
        path = Path(path)
        return cls.from_dict(json.loads(path.read_text(encoding="utf-8")), path.parent)

    def task_input(self, **config_changes) -> TaskInput:
        t = TaskInput(self.name, self.instruction, self.image_ref, self.config)
        return t.with_config(**config_changes) if config_changes else t


def load_all(directory: str | Path | None = None) -> list[TaskSpec]:
    d = Path(directory) if directory is not None else bench_dir()
    specs = [TaskSpec.load(p) for p in sorted(d.glob("*.json"))]
    order = {n: i for i, n in enumerate(TASK_NAMES)}
    return sorted(specs, key=lambda s: (order.get(s.name, len(order)), s.name))


def golden_dsl(name: str) -> str:
    return (bench_dir() / f"{name}.vsl").read_text(encoding="utf-8")
