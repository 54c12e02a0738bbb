import json
import subprocess
import sys

import pytest

from voxelsmith.cli import EXIT_DATA, EXIT_OK, EXIT_PIPELINE, EXIT_RESIDUAL, EXIT_USAGE, main

from conftest import BENCH, TRANSCRIPTS


def only_run(out):
    (d,) = [p for p in out.iterdir() if p.is_dir()]
    return d


def test_build_writes_run_directory(tmp_path, capsys):
    code = main(["build", str(BENCH / "wooden_house.json"), "--out", str(tmp_path), "--no-memory"])
    assert code == EXIT_OK
    run = only_run(tmp_path)
    names = {p.name for p in run.iterdir()}
    assert {"task.json", "world_initial.json", "world_final.json", "blueprint.json", "blueprint.vsl",
            "plan.jsonl", "views.txt", "llm_trace.jsonl", "build_result.json", "render_final.png"} <= names
    assert json.loads((run / "build_result.json").read_text())["status"] == "success"
    assert "wooden_house: success" in capsys.readouterr().out


def test_build_residual_and_missing_transcript(tmp_path):
    broken = str(TRANSCRIPTS / "wooden_house_missing_door.json")
    task = str(BENCH / "wooden_house.json")
    assert main(["build", task, "--transcript", broken, "--reflect", "0", "--no-memory",
                 "--out", str(tmp_path / "a")]) == EXIT_RESIDUAL
    assert main(["build", task, "--transcript", broken, "--no-memory", "--out", str(tmp_path / "b")]) == EXIT_OK
    assert main(["build", task, "--transcript", str(tmp_path / "nope.json"), "--no-memory",
                 "--out", str(tmp_path / "c")]) == EXIT_PIPELINE


def test_usage_and_data_errors(tmp_path):
    assert main([]) == EXIT_USAGE
    assert main(["build", "x.json", "--reflect", "-1"]) == EXIT_USAGE
    assert main(["build", str(tmp_path / "missing.json")]) == EXIT_DATA
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["render", str(bad)]) == EXIT_DATA


def test_corr(tmp_path, capsys):
    f = tmp_path / "s.csv"
    f.write_text("human,model\n1,2\n2,4\n3,6\n")
    assert main(["corr", str(f)]) == EXIT_OK
    assert capsys.readouterr().out == "pearson 1.0\nspearman 1.0\n"
    f.write_text("1,1\n1,2\n")
    assert main(["corr", str(f)]) == EXIT_DATA


def test_render_is_byte_stable(tmp_path, capsys):
    assert main(["build", str(BENCH / "snow_pyramid.json"), "--out", str(tmp_path), "--no-memory"]) == EXIT_OK
    snap = only_run(tmp_path) / "world_final.json"
    capsys.readouterr()
    main(["render", str(snap)])
    first = capsys.readouterr().out
    main(["render", str(snap)])
    assert capsys.readouterr().out == first
    assert first.startswith("legend: ")
    assert main(["render", str(snap), "--out", "png", "-o", str(tmp_path / "a.png")]) == EXIT_OK
    assert main(["render", str(snap), "--out", "png", "-o", str(tmp_path / "b.png")]) == EXIT_OK
    assert (tmp_path / "a.png").read_bytes() == (tmp_path / "b.png").read_bytes()
    assert main(["render", str(snap), "--out", "png", "-o", str(tmp_path / "a.png")]) == EXIT_DATA


def test_memory_commands(tmp_path, capsys):
    mem = str(tmp_path / "m.jsonl")
    plan = tmp_path / "p.vsl"
    plan.write_text("place stone (0,0,0)\n")
    assert main(["memory", "add", "--memory-path", mem, "--task", "one stone", "--plan", str(plan)]) == EXIT_OK
    assert main(["memory", "list", "--memory-path", mem]) == EXIT_OK
    out = capsys.readouterr().out
    assert "added record 1" in out and "\tone stone\tplace stone (0,0,0)" in out
    plan.write_text("place (0,0,0)")
    assert main(["memory", "add", "--memory-path", mem, "--task", "t", "--plan", str(plan)]) == EXIT_DATA
    assert main(["memory", "add", "--memory-path", mem]) == EXIT_USAGE
    assert main(["memory", "clear", "--memory-path", mem]) == EXIT_OK
    main(["memory", "list", "--memory-path", mem])
    assert capsys.readouterr().out == ""


def test_bench_subset(tmp_path, capsys):
    code = main(["bench", "--only", "wooden_house", "--trials", "1", "--out", str(tmp_path),
                 "--memory-path", str(tmp_path / "none.jsonl")])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "m1r1" in out and "100.00" in out
    assert main(["bench", "--only", "castle", "--out", str(tmp_path)]) == EXIT_USAGE


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "voxelsmith", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "build" in proc.stdout
