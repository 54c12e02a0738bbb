import socket
from pathlib import Path

import pytest

from voxelsmith import dsl, planner
from voxelsmith.bench.tasks import bench_dir
from voxelsmith.world import BotState, Coord, WorldState

GOLDEN_DIR = Path(__file__).parent / "golden"
BENCH = bench_dir()
TRANSCRIPTS = BENCH / "transcripts"
TASK_NAMES = ("wooden_house", "snow_pyramid", "village_house", "watchtower", "mansion")
START = Coord(0, 1, 0)


def golden_blueprint(name):
    return dsl.compile_text((BENCH / f"{name}.vsl").read_text(), name)


def build(bp, world=None, start=START, **plan_kw):
    """Plan and execute ``bp`` with the bot starting at ``start``; returns (world, plan, report)."""
    world = world if world is not None else WorldState()
    bot = BotState(start)
    p = planner.plan(world, bot, start, bp, **plan_kw)
    report = planner.execute(p, world, bot)
    return world, p, report


@pytest.fixture
def fresh():
    return WorldState(), BotState(START)


# per-criterion outcomes, printed at the end of the run
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def _no_network(*args, **kwargs):
    raise RuntimeError("network access is disabled during tests")


@pytest.fixture(autouse=True, scope="session")
def offline():
    mp = pytest.MonkeyPatch()
    mp.setattr(socket.socket, "connect", _no_network)
    mp.setattr(socket, "create_connection", _no_network)
    mp.setattr(socket, "getaddrinfo", _no_network)
    yield
    mp.undo()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, label = ACCEPTANCE[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {n:>2}: {label}")
