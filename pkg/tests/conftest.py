import functools
import time

import pytest

from macc.durations import ONE_TWO, ONE_TWO_THREE, TERMES, UNIT, scale
from macc.instance import E1, E2
from macc.oracle import brute_force_plan
from macc.solve import SolverConfig, find_cbc, plan_lexicographic

INSTANCES = {"E1": E1, "E2": E2}
DURATION_SETS = {"1": UNIT, "1-2": ONE_TWO, "1-2-3": ONE_TWO_THREE, "termes": TERMES}

CFG = SolverConfig(time_limit=600)

# wall-clock seconds of each cached computation, keyed ("milp"|"oracle", inst, durations)
TIMINGS = {}
# (criterion, passed, detail) lines filled in by test_acceptance.py
ACCEPTANCE = []


def pytest_collection_modifyitems(config, items):
    if find_cbc() is None:
        skip = pytest.mark.skip(reason="no CBC binary available")
        for item in items:
            if "solver" in item.keywords:
                item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")


@functools.lru_cache(maxsize=None)
def solved(inst_name: str, dur_name: str):
    """Pipeline result, shared across test modules (solves are the slow part)."""
    inst = INSTANCES[inst_name]
    unit = None
    if dur_name != "1":
        unit = solved(inst_name, "1").plan
    t0 = time.monotonic()
    res = plan_lexicographic(inst, scale(DURATION_SETS[dur_name]), CFG, unit_plan=unit)
    TIMINGS[("milp", inst_name, dur_name)] = time.monotonic() - t0
    return res


@functools.lru_cache(maxsize=None)
def oracle(inst_name: str, dur_name: str):
    t0 = time.monotonic()
    res = brute_force_plan(INSTANCES[inst_name], scale(DURATION_SETS[dur_name]), T_max=32)
    TIMINGS[("oracle", inst_name, dur_name)] = time.monotonic() - t0
    return res


@pytest.fixture
def cfg():
    return CFG
