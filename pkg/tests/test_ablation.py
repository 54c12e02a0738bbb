import math

import pytest

from voxelsmith.bench.ablation import Trial, aggregate, run_ablation, summarize
from voxelsmith.bench.tasks import TaskSpec, golden_dsl
from voxelsmith.llm import ScriptedClient
from voxelsmith.memory import MemoryPool


def test_summarize():
    assert summarize([70.0, 90.0]) == (80.0, pytest.approx(math.sqrt(200)))
    assert summarize([80.0] * 5) == (80.0, 0.0)
    assert summarize([42.0]) == (42.0, 0.0)


def grid_trials(values):
    return [Trial(cell, "t", i, v) for cell, vs in values.items() for i, v in enumerate(vs)]


def test_deltas_both_kinds():
    rep = aggregate(grid_trials({"m0r0": [40, 60], "m1r0": [60, 60], "m0r1": [80], "m1r1": [100]}),
                    [(False, False), (False, True), (True, False), (True, True)], ["t"])
    assert rep.cell("m0r0").mean_pct == 50
    d = {(x.factor, x.context, x.task): x for x in rep.deltas}
    assert d[("memory", "r0", "*")].absolute == 10
    assert d[("memory", "r0", "*")].relative == pytest.approx(20.0)
    assert d[("reflection", "m0", "t")].relative == pytest.approx(60.0)
    assert d[("reflection", "m1", "t")].absolute == 40
    assert "relative +20.0%" in rep.to_text() and "absolute +10.00 pts" in rep.to_text()


def test_zero_baseline_has_no_relative():
    rep = aggregate(grid_trials({"m0r0": [0], "m1r0": [50]}), [(False, False), (True, False)], ["t"])
    assert rep.deltas[0].relative is None
    assert "n/a" in rep.to_text()


def _spec(trials=2):
    return TaskSpec(name="tiny", instruction="a single stone block", applicable_aspects=("Correctness",),
                    checker=None, image_ref=None, trials=trials)


def _factory(cell, spec, trial):
    return ScriptedClient([
        {"expect_substring": "", "response": "Components and Positioning: a stone.\n"
                                             "Dimensional Layout: 1x1x1.\nDescription: place it."},
        {"expect_substring": "", "response": '{"code": "place stone (0,0,0)"}'},
        {"expect_substring": "", "response": f"Correctness: {5 + trial}/10"},
    ])


def test_run_ablation_end_to_end(tmp_path):
    seed = MemoryPool()
    rep = run_ablation([_spec()], _factory, seed_pool=seed)
    assert len(rep.trials) == 8
    assert rep.cell("m1r1").mean_pct == 55.0
    assert rep.cell("m0r0", "tiny").stddev_pct == pytest.approx(math.sqrt(50))
    assert len(seed) == 0  # trials only touch private copies
    rep.write(tmp_path)
    lines = (tmp_path / "report.csv").read_text().splitlines()
    assert lines[0] == "cell,task,trial,percentage,aspects,failed"
    assert lines[1] == "m0r0,tiny,0,50.0000,Correctness=5,0"
    with pytest.raises(FileExistsError):
        rep.write(tmp_path)


def test_failed_trials_score_zero():
    def broken(cell, spec, trial):
        return ScriptedClient([])

    rep = run_ablation([_spec(1)], broken, grid=[(True, True)])
    t = rep.trials[0]
    assert t.failed and t.percentage == 0.0 and "TranscriptExhausted" in t.error
    assert rep.cell("m1r1").failures == 1


def test_golden_dsl_is_packaged():
    assert "shell oak_planks" in golden_dsl("wooden_house")
