import random

import highspy
import pytest

from macc.catalog import build_catalog
from macc.durations import TERMES, UNIT, scale
from macc.instance import E1, E2, make_instance
from macc.model import action_name, block_name, build_model, export_model, write_model
from macc.oracle import brute_force_plan

from helpers import plan_vector

UNIT_SD = scale(UNIT)
EMPTY = make_instance([[0] * 3] * 3, z=2)


@pytest.fixture(scope="module")
def e1_model():
    return build_model(E1, build_catalog(E1, UNIT_SD, 4))


def test_c6_rows(e1_model):
    assert len(e1_model.rows("c6")) == 36


def test_c11_one_row_per_timestep():
    for T in (4, 7):
        m = build_model(E2, build_catalog(E2, scale(TERMES), T))
        assert len(m.rows("c11")) == T


def test_objective_is_duration():
    cat = build_catalog(E2, scale(TERMES), 8)
    m = build_model(E2, cat)
    for i, a in enumerate(cat.actions):
        assert m.objective[i] == a.d
    assert all(j < m.n_r for j in m.objective)


def test_no_duplicate_terms():
    m = build_model(E2, build_catalog(E2, scale(TERMES), 8))
    for row in m.constraints:
        cols = [j for j, _ in row.terms]
        assert len(cols) == len(set(cols)), row.name


def test_empty_target_feasible_with_nothing():
    cat = build_catalog(EMPTY, UNIT_SD, 4)
    m = build_model(EMPTY, cat)
    x = [0] * m.n_vars
    for b in cat.block_actions:
        if b.z == b.z2 == 0:
            x[m.n_r + cat.block_index[b]] = 1
    assert m.violated(x) == []
    assert m.objective_value(x) == 0


def test_empty_assignment_breaks_e1(e1_model):
    x = [0] * e1_model.n_vars
    assert {r.tag for r in e1_model.violated(x)} >= {"c2", "c3", "c4", "c6"}


def test_export_deterministic(e1_model):
    again = build_model(E1, build_catalog(E1, UNIT_SD, 4))
    assert export_model(e1_model) == export_model(again)


def test_names():
    cat = build_catalog(E1, UNIT_SD, 4)
    entry = next(a for a in cat.actions if a.x < 0)
    assert action_name(entry).startswith("r_0_1_S_S_S_")
    assert block_name(cat.block_actions[0]) == "h_0_0_0_0_0"


def test_lp_round_trip(tmp_path, e1_model):
    path = tmp_path / "e1.lp"
    write_model(e1_model, path)
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    assert h.readModel(str(path)) == highspy.HighsStatus.kOk
    lp = h.getLp()
    assert lp.num_col_ == e1_model.n_vars == e1_model.n_r + e1_model.n_h
    assert lp.num_row_ == len(e1_model.constraints)


def test_lp_solves_to_oracle_value(tmp_path):
    """HiGHS on the exported file reaches the exhaustive optimum for E1."""
    sd = scale(TERMES)
    best = brute_force_plan(E1, sd, 12)
    m = build_model(E1, build_catalog(E1, sd, best.makespan))
    path = tmp_path / "m.lp"
    write_model(m, path)
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.readModel(str(path))
    h.run()
    assert h.getModelStatus() == highspy.HighsModelStatus.kOptimal
    assert round(h.getInfo().objective_function_value) == best.sum_of_costs


def test_oracle_plan_satisfies_rows():
    """A plan accepted by the validator satisfies every row when substituted."""
    for sd in (UNIT_SD, scale(TERMES)):
        res = brute_force_plan(E1, sd, 12)
        m = build_model(E1, build_catalog(E1, sd, res.makespan))
        x = plan_vector(m, res.plan, E1)
        assert m.violated(x) == []
        assert m.objective_value(x) == res.sum_of_costs


def test_random_perturbation_breaks_rows():
    res = brute_force_plan(E1, UNIT_SD, 12)
    m = build_model(E1, build_catalog(E1, UNIT_SD, res.makespan))
    x = plan_vector(m, res.plan, E1)
    rng = random.Random(7)
    for _ in range(50):
        y = list(x)
        j = rng.randrange(m.n_vars)
        y[j] = 1 - y[j]
        assert m.violated(y), m.names[j]
