from fractions import Fraction
from itertools import combinations

import pytest

from macc.catalog import ActionTemplate, M, D, P
from macc.durations import (
    CONFIGURABLE, MAX_MULTIPLE, PRESETS, TERMES, UNIT, ActionType, DurationError, DurationSpec,
    parse_durations, parse_rational, scale,
)
from macc.instance import E, S


def tmpl(kind, z2=0):
    # representative template of each type, ending at level z2
    return {
        "entry": ActionTemplate(0, S, S, S, 0, M, 0, 1, 0),
        "leave": ActionTemplate(2, 0, 1, 0, 0, M, E, E, E),
        "move_block": ActionTemplate(1, 1, 1, 1, 1, M, 2, 1, z2),
        "move_empty": ActionTemplate(1, 1, 1, 1, 0, M, 2, 1, z2),
        "pick_up": ActionTemplate(1, 1, 1, z2, 0, P, 2, 1, z2),
        "deliver": ActionTemplate(1, 1, 1, z2, 1, D, 2, 1, z2),
        "wait": ActionTemplate(1, 1, 1, z2, 0, M, 1, 1, z2),
    }[kind]


def test_lcm_scaling():
    spec = DurationSpec.per_type(entry=1, leave=1, move_block=1, move_empty=1, pick_up="3/2", deliver="12/5")
    sd = scale(spec)
    assert sd.m == 10
    assert sd.table[ActionType.PICK_UP] == 15
    assert sd.table[ActionType.DELIVER] == 24
    assert sd.table[ActionType.ENTRY] == 10
    assert sd.table[ActionType.WAIT] == 1


def test_unit_identity():
    sd = scale(UNIT)
    assert sd.m == 1 and sd.is_unit
    assert set(sd.table.values()) == {1}


def test_termes_unchanged():
    sd = scale(TERMES)
    assert sd.m == 1
    assert [sd.table[a] for a in CONFIGURABLE] == [3, 3, 3, 2, 2, 3]
    assert sd.duration_of(tmpl("deliver")) == 3


def test_ratios_preserved():
    spec = DurationSpec.per_type(entry="1/3", leave="2/7", move_block=1, move_empty="5/2", pick_up=4, deliver="9/14")
    sd = scale(spec)
    for a, b in combinations(CONFIGURABLE, 2):
        assert Fraction(sd.table[a], sd.table[b]) == Fraction(spec.durations[a]) / Fraction(spec.durations[b])


def test_overflow_reported():
    primes = [2147483647, 2147483629, 2147483587, 2147483579, 2147483563, 2147483549]
    spec = DurationSpec.per_type(**{a.value: f"1/{p}" for a, p in zip(CONFIGURABLE, primes)})
    with pytest.raises(DurationError, match=str(MAX_MULTIPLE)):
        scale(spec)


@pytest.mark.parametrize("kind, z2, want", [
    ("move_block", 2, 5), ("wait", 1, 1), ("entry", 0, 3), ("leave", 0, 3),
    ("move_empty", 1, 3), ("pick_up", 1, 4), ("deliver", 1, 5), ("deliver", 0, 3),
])
def test_height_linear(kind, z2, want):
    sd = scale(DurationSpec.height_linear())
    assert sd.duration_of(tmpl(kind, z2)) == want


def test_duration_ignores_start_time():
    sd = scale(TERMES)
    a = tmpl("move_block", 1)
    assert sd.duration_of(a) == sd.duration_of(a._replace(ts=17))


def test_parse_document():
    spec = parse_durations({"mode": "per_type", "durations": {
        "enter": "3", "leave": "3", "move_block": "3", "move_empty": "2", "pick_up": "2", "deliver": "3"}})
    assert scale(spec).table == scale(TERMES).table
    assert parse_durations({"mode": "height_linear"}).mode == "height_linear"
    assert parse_durations("termes") is TERMES
    assert parse_durations(spec.to_dict()) == DurationSpec("per_type", spec.durations)


@pytest.mark.parametrize("doc, msg", [
    ("fast", "preset"),
    ({"mode": "per_type", "durations": {"entry": 1}}, "missing"),
    ({"mode": "per_type", "durations": {a.value: 1 for a in ActionType}}, "wait"),
    ({"mode": "per_type", "durations": {**{a.value: 1 for a in CONFIGURABLE}, "deliver": "0"}}, "positive"),
    ({"mode": "per_type", "durations": {**{a.value: 1 for a in CONFIGURABLE}, "jump": 1}}, "unknown action"),
    ({"mode": "cubic"}, "mode"),
    ({"mode": "per_type", "durations": {**{a.value: 1 for a in CONFIGURABLE}, "deliver": "x/2"}}, "rational"),
])
def test_parse_errors(doc, msg):
    with pytest.raises(DurationError, match=msg):
        parse_durations(doc)


def test_parse_rational():
    assert parse_rational("3/2") == Fraction(3, 2)
    assert parse_rational(2) == 2
    assert parse_rational("6/4") == Fraction(3, 2)


def test_presets():
    assert [scale(PRESETS["1-2"]).table[a] for a in CONFIGURABLE] == [2, 1, 1, 1, 2, 2]
    assert [scale(PRESETS["1-2-3"]).table[a] for a in CONFIGURABLE] == [3, 2, 3, 1, 3, 3]


def test_max_duration():
    assert scale(TERMES).max_duration(3) == 3
    # height-linear on Z=3: deliver at the top block level z=1 lasts 5
    assert scale(DurationSpec.height_linear()).max_duration(3) == 5
