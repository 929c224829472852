"""Action duration assignments and their integer scaling."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

# Largest scaling multiple accepted; solvers read coefficients as 32-bit ints or doubles.
MAX_MULTIPLE = 2**31 - 1


class DurationError(ValueError):
    pass


class ActionType(str, enum.Enum):
    ENTRY = "entry"
    LEAVE = "leave"
    MOVE_BLOCK = "move_block"
    MOVE_EMPTY = "move_empty"
    PICK_UP = "pick_up"
    DELIVER = "deliver"
    WAIT = "wait"

    def __str__(self):
        return self.value


ACTION_TYPES = tuple(ActionType)
CONFIGURABLE = tuple(a for a in ActionType if a is not ActionType.WAIT)

_ALIASES = {"enter": ActionType.ENTRY}

PER_TYPE = "per_type"
HEIGHT_LINEAR = "height_linear"


def parse_type(name: str) -> ActionType:
    name = name.strip().lower()
    if name in _ALIASES:
        return _ALIASES[name]
    try:
        return ActionType(name)
    except ValueError:
        raise DurationError(f"unknown action type {name!r}") from None


def parse_rational(value) -> Fraction:
    try:
        q = Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError):
        raise DurationError(f"not a rational duration: {value!r}") from None
    if q <= 0:
        raise DurationError(f"duration must be positive, got {value!r}")
    return q


@dataclass(frozen=True)
class DurationSpec:
    """Either fixed per-type rational durations or the height-linear rule."""

    mode: str = PER_TYPE
    durations: Mapping[ActionType, Fraction] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        if self.mode == PER_TYPE:
            missing = [a.value for a in CONFIGURABLE if a not in self.durations]
            if missing:
                raise DurationError(f"per_type durations missing: {', '.join(missing)}")
            if ActionType.WAIT in self.durations and self.durations[ActionType.WAIT] != 1:
                raise DurationError("wait duration is fixed at 1")
            for a, q in self.durations.items():
                if Fraction(q) <= 0:
                    raise DurationError(f"duration of {a} must be positive")
        elif self.mode != HEIGHT_LINEAR:
            raise DurationError(f"unknown duration mode {self.mode!r}")

    @classmethod
    def per_type(cls, name: str = "", **durations) -> "DurationSpec":
        table = {parse_type(k): parse_rational(v) for k, v in durations.items()}
        return cls(PER_TYPE, table, name)

    @classmethod
    def uniform(cls, value=1, name: str = "") -> "DurationSpec":
        q = parse_rational(value)
        return cls(PER_TYPE, {a: q for a in CONFIGURABLE}, name)

    @classmethod
    def height_linear(cls) -> "DurationSpec":
        return cls(HEIGHT_LINEAR, {}, "height_linear")

    def to_dict(self) -> dict:
        if self.mode == HEIGHT_LINEAR:
            return {"mode": HEIGHT_LINEAR}
        return {
            "mode": PER_TYPE,
            "durations": {a.value: str(self.durations[a]) for a in CONFIGURABLE},
        }


def parse_durations(doc) -> DurationSpec:
    """Read the durations section: ``{"mode": "per_type", "durations": {...}}`` or
    ``{"mode": "height_linear"}``. A bare name of a preset (``"termes"``) also works."""
    if isinstance(doc, str):
        if doc.lower() in PRESETS:
            return PRESETS[doc.lower()]
        raise DurationError(f"unknown duration preset {doc!r}")
    if not isinstance(doc, dict):
        raise DurationError("durations must be an object")
    mode = doc.get("mode", PER_TYPE)
    if mode == HEIGHT_LINEAR:
        return DurationSpec.height_linear()
    if mode != PER_TYPE:
        raise DurationError(f"unknown duration mode {mode!r}")
    table = doc.get("durations")
    if not isinstance(table, dict):
        raise DurationError("per_type mode needs a 'durations' table")
    if any(parse_type(k) is ActionType.WAIT for k in table):
        raise DurationError("wait duration is not configurable")
    return DurationSpec.per_type(name=str(doc.get("name", "")), **table)


@dataclass(frozen=True)
class ScaledDurations:
    """Integer durations after multiplying by the LCM of denominators."""

    m: int
    mode: str
    table: Mapping[ActionType, int]  # per_type mode only; wait maps to 1
    spec: DurationSpec | None = None

    def duration_of(self, template) -> int:
        """Duration in scaled timesteps of an action template (start time is ignored)."""
        kind = template.action_type
        if self.mode == PER_TYPE:
            return self.table[kind]
        # height-linear rule, keyed on the end level z'
        z2 = template.z2
        if kind is ActionType.ENTRY or kind is ActionType.LEAVE:
            return 3
        if kind is ActionType.MOVE_EMPTY:
            return 2 + z2
        if kind is ActionType.MOVE_BLOCK:
            return 3 + z2
        if kind is ActionType.PICK_UP:
            return 2 + 2 * z2
        if kind is ActionType.DELIVER:
            return 3 + 2 * z2
        return 1

    @property
    def is_unit(self) -> bool:
        return self.mode == PER_TYPE and all(v == 1 for v in self.table.values())

    def max_duration(self, Z: int) -> int:
        """Longest duration of any template on a grid with ``Z`` levels."""
        if self.mode == PER_TYPE:
            return max(self.table.values())
        top = Z - 1
        return max(3, 2 + top, 3 + top, 2 + 2 * (Z - 2), 3 + 2 * (Z - 2), 1)


def scale(spec: DurationSpec) -> ScaledDurations:
    if spec.mode == HEIGHT_LINEAR:
        return ScaledDurations(1, HEIGHT_LINEAR, {}, spec)
    values = [Fraction(spec.durations[a]) for a in CONFIGURABLE]
    m = math.lcm(*(q.denominator for q in values))
    if m > MAX_MULTIPLE:
        raise DurationError(f"scaling multiple {m} exceeds {MAX_MULTIPLE}")
    table = {a: int(Fraction(spec.durations[a]) * m) for a in CONFIGURABLE}
    table[ActionType.WAIT] = 1
    return ScaledDurations(m, PER_TYPE, table, spec)


def _preset(name, entry, leave, move_block, move_empty, pick_up, deliver):
    return DurationSpec.per_type(
        name=name, entry=entry, leave=leave, move_block=move_block,
        move_empty=move_empty, pick_up=pick_up, deliver=deliver,
    )


# Duration sets of the experiment table (one timestep = 10 s for TERMES).
UNIT = _preset("1", 1, 1, 1, 1, 1, 1)
ONE_TWO = _preset("1-2", 2, 1, 1, 1, 2, 2)
ONE_TWO_THREE = _preset("1-2-3", 3, 2, 3, 1, 3, 3)
TERMES = _preset("termes", 3, 3, 3, 2, 2, 3)

PRESETS = {
    "1": UNIT,
    "unit": UNIT,
    "1-2": ONE_TWO,
    "1-2-3": ONE_TWO_THREE,
    "termes": TERMES,
    "height_linear": DurationSpec.height_linear(),
}
