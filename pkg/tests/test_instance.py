import json

import pytest
from hypothesis import given, strategies as st

from macc.instance import (
    E1, E2, GridDims, Instance, InstanceError, border_cells, load_instance, make_instance,
    min_border_distance, neighbors, parse_instance,
)


def doc(hm, z=2, a=1):
    return json.dumps({"x": len(hm[0]), "y": len(hm), "z": z, "agent_limit": a, "heightmap": hm})


def test_parse_e1():
    inst = parse_instance(doc([[0, 0, 0], [0, 1, 0], [0, 0, 0]]))
    assert (inst.X, inst.Y, inst.Z, inst.agent_limit) == (3, 3, 2, 1)
    assert inst.target(1, 1) == 1
    assert inst.total_blocks == 1
    assert inst.heightmap == E1.heightmap


def test_border_target_rejected():
    with pytest.raises(InstanceError, match="border target"):
        parse_instance(doc([[1, 0, 0], [0, 0, 0], [0, 0, 0]]))


def test_e2_shape():
    assert (E2.X, E2.Y, E2.Z, E2.agent_limit) == (4, 4, 3, 2)
    assert E2.target(1, 1) == 2 and E2.target(1, 2) == 1
    assert E2.total_blocks == 3


@pytest.mark.parametrize("text, msg", [
    ("{", "malformed"),
    ("[]", "JSON object"),
    (json.dumps({"x": 3, "y": 3, "z": 2, "heightmap": []}), "missing"),
    (doc([[0, 0, 0], [0, 2, 0], [0, 0, 0]], z=2), "outside"),
    (doc([[0, 0], [0, 0]]), "3x3"),
    (json.dumps({"x": 4, "y": 3, "z": 2, "agent_limit": 1, "heightmap": [[0, 0, 0]] * 3}), "shape"),
    (doc([[0, 0, 0], [0, 0, 0], [0, 0, 0]], a=0), "agent_limit"),
    (doc([[0, 0, 0], [0, "a", 0], [0, 0, 0]]), "non-integer"),
])
def test_parse_errors(text, msg):
    with pytest.raises(InstanceError, match=msg):
        parse_instance(text)


def test_load_instance_uses_stem(tmp_path):
    p = tmp_path / "tiny.json"
    p.write_text(doc([[0, 0, 0], [0, 1, 0], [0, 0, 0]]))
    assert load_instance(p).name == "tiny"


def test_border_cells():
    assert len(border_cells(E1)) == 8
    assert len(border_cells(E2)) == 12
    assert all(z == 0 for _, _, z in border_cells(E2))
    assert (1, 1, 0) not in border_cells(E1)


def test_neighbors():
    assert set(neighbors(E1, 0, 0)) == {(1, 0), (0, 1)}
    assert len(neighbors(E1, 1, 1)) == 4
    assert set(neighbors(E1, 0, 1)) == {(0, 0), (0, 2), (1, 1)}


def test_min_border_distance():
    five = make_instance([[0] * 5 for _ in range(5)])
    assert min_border_distance(E1, 1, 1) == 0
    assert min_border_distance(five, 2, 2) == 1
    assert min_border_distance(five, 1, 1) == 0


def brute_distance(inst, x, y):
    ring = [(bx, by) for bx, by, _ in border_cells(inst)]
    return min(abs(nx - bx) + abs(ny - by) for nx, ny in neighbors(inst, x, y) for bx, by in ring)


@given(st.integers(3, 8), st.integers(3, 8), st.data())
def test_grid_properties(X, Y, data):
    inst = Instance(GridDims(X, Y, 2), tuple(tuple(0 for _ in range(X)) for _ in range(Y)), 1)
    assert len(border_cells(inst)) == 2 * X + 2 * Y - 4
    x = data.draw(st.integers(0, X - 1))
    y = data.draw(st.integers(0, Y - 1))
    nb = neighbors(inst, x, y)
    assert 2 <= len(nb) <= 4
    for q in nb:
        assert (x, y) in neighbors(inst, *q)
    d = min_border_distance(inst, x, y)
    assert d == brute_distance(inst, x, y)
    assert (d == 0) == any(inst.is_border(*q) for q in nb)


def test_to_dict_round_trip():
    assert parse_instance(json.dumps(E2.to_dict())).heightmap == E2.heightmap
