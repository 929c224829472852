import pytest

from macc.durations import TERMES, UNIT, scale
from macc.instance import E1, make_instance
from macc.oracle import MAX_HORIZON, OracleError, brute_force_plan
from macc.validate import validate_plan

from conftest import oracle

UNIT_SD = scale(UNIT)


def test_empty_target():
    res = brute_force_plan(make_instance([[0] * 3] * 3, z=2), UNIT_SD, 8)
    assert (res.makespan, res.sum_of_costs, res.plan.actions) == (4, 0, [])


def test_e1_unit():
    res = oracle("E1", "1")
    assert (res.makespan, res.sum_of_costs) == (4, 3)


def test_e1_termes_above_lr():
    res = oracle("E1", "termes")
    assert res.makespan >= 9
    assert validate_plan(E1, scale(TERMES), res.plan).ok


def test_nothing_within_tmax():
    assert brute_force_plan(E1, scale(TERMES), 9) is None


@pytest.mark.parametrize("inst, T_max, msg", [
    (make_instance([[0] * 5] * 5, z=2), 8, "columns"),
    (make_instance([[0, 0, 0, 0], [0, 2, 2, 0], [0, 0, 0, 0], [0, 0, 0, 0]], z=3), 8, "blocks"),
    (make_instance([[0] * 3] * 3, z=2, agent_limit=3), 8, "agent limit"),
    (E1, MAX_HORIZON + 1, "T_max"),
])
def test_guard(inst, T_max, msg):
    with pytest.raises(OracleError, match=msg):
        brute_force_plan(inst, UNIT_SD, T_max)


def test_deterministic():
    a = brute_force_plan(E1, scale(TERMES), 12)
    b = brute_force_plan(E1, scale(TERMES), 12)
    assert a.plan.actions == b.plan.actions


def test_two_agents_small():
    inst = make_instance([[0, 0, 0, 0], [0, 1, 1, 0], [0, 0, 0, 0], [0, 0, 0, 0]], z=2, agent_limit=2)
    res = brute_force_plan(inst, UNIT_SD, 12)
    # both blocks can be carried in at once from opposite sides
    assert (res.makespan, res.sum_of_costs) == (4, 6)
    assert res.plan.agents_used() == 2
    assert validate_plan(inst, UNIT_SD, res.plan).ok
