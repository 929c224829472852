"""Time-expanded action and block-action sets for a fixed planning horizon."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import NamedTuple

from .durations import ACTION_TYPES, ActionType, ScaledDurations
from .instance import END, START, E, S, Instance, border_cells, neighbors

M, P, D = "M", "P", "D"
KINDS = (M, P, D)

MIN_HORIZON = 4


class CatalogError(ValueError):
    pass


def classify(x, c, k, x2, y, z, y2, z2) -> ActionType:
    if x == S:
        return ActionType.ENTRY
    if x2 == E:
        return ActionType.LEAVE
    if k == P:
        return ActionType.PICK_UP
    if k == D:
        return ActionType.DELIVER
    if (x, y, z) == (x2, y2, z2):
        return ActionType.WAIT
    return ActionType.MOVE_BLOCK if c else ActionType.MOVE_EMPTY


class _ActionMixin:
    __slots__ = ()

    @property
    def start(self):
        return (self.x, self.y, self.z)

    @property
    def end(self):
        return (self.x2, self.y2, self.z2)

    @property
    def action_type(self) -> ActionType:
        return classify(self.x, self.c, self.k, self.x2, self.y, self.z, self.y2, self.z2)


class _TemplateFields(NamedTuple):
    ts: int
    x: int
    y: int
    z: int
    c: int
    k: str
    x2: int
    y2: int
    z2: int


class ActionTemplate(_ActionMixin, _TemplateFields):
    __slots__ = ()

    def timed(self, te: int) -> "Action":
        return Action(self.ts, te, *self[1:])


class _ActionFields(NamedTuple):
    ts: int
    te: int
    x: int
    y: int
    z: int
    c: int
    k: str
    x2: int
    y2: int
    z2: int


class Action(_ActionMixin, _ActionFields):
    __slots__ = ()

    @property
    def d(self) -> int:
        return self.te - self.ts

    @property
    def template(self) -> ActionTemplate:
        return ActionTemplate(self.ts, *self[2:])

    def active(self, t: int) -> bool:
        return self.ts <= t < self.te

    @property
    def columns(self) -> frozenset:
        """On-grid columns reserved while the action runs."""
        cols = set()
        if self.x >= 0:
            cols.add((self.x, self.y))
        if self.x2 >= 0:
            cols.add((self.x2, self.y2))
        return frozenset(cols)

    @property
    def carry_after(self) -> int:
        if self.k == P:
            return 1
        if self.k == D:
            return 0
        return self.c

    @property
    def position_after(self):
        """Agent position once the action completes (``END`` after leaving)."""
        return self.start if self.k != M else self.end


class BlockAction(NamedTuple):
    t: int
    x: int
    y: int
    z: int
    z2: int


def start_windows(T: int) -> dict[ActionType, range]:
    """Admissible start times per action type for horizon ``T``."""
    mid = range(1, T - 2)
    return {
        ActionType.ENTRY: range(0, T - 3),
        ActionType.LEAVE: range(2, T - 1),
        ActionType.MOVE_BLOCK: mid,
        ActionType.MOVE_EMPTY: mid,
        ActionType.WAIT: mid,
        ActionType.PICK_UP: mid,
        ActionType.DELIVER: mid,
    }


def enumerate_templates(inst: Instance, T: int, sd: ScaledDurations | None = None):
    """All un-timed action templates, grouped by action type.

    ``sd`` is accepted for symmetry with :func:`build_catalog`; templates do not
    depend on durations.
    """
    if T < MIN_HORIZON:
        raise CatalogError(f"horizon T={T} below minimum {MIN_HORIZON}")
    win = start_windows(T)
    Z = inst.Z
    border = sorted(border_cells(inst))
    out = {a: [] for a in ACTION_TYPES}

    for ts in win[ActionType.ENTRY]:
        for c in (0, 1):
            for bx, by, bz in border:
                out[ActionType.ENTRY].append(ActionTemplate(ts, S, S, S, c, M, bx, by, bz))
    for ts in win[ActionType.LEAVE]:
        for c in (0, 1):
            for bx, by, bz in border:
                out[ActionType.LEAVE].append(ActionTemplate(ts, bx, by, bz, c, M, E, E, E))

    nbrs = {(x, y): neighbors(inst, x, y) for x, y in inst.columns()}
    for ts in win[ActionType.WAIT]:
        for x, y in inst.columns():
            for z in range(Z):
                for c in (0, 1):
                    out[ActionType.WAIT].append(ActionTemplate(ts, x, y, z, c, M, x, y, z))
                for x2, y2 in nbrs[(x, y)]:
                    for z2 in range(max(0, z - 1), min(Z, z + 2)):
                        out[ActionType.MOVE_EMPTY].append(ActionTemplate(ts, x, y, z, 0, M, x2, y2, z2))
                        out[ActionType.MOVE_BLOCK].append(ActionTemplate(ts, x, y, z, 1, M, x2, y2, z2))
            for z in range(Z - 1):
                for x2, y2 in nbrs[(x, y)]:
                    out[ActionType.PICK_UP].append(ActionTemplate(ts, x, y, z, 0, P, x2, y2, z))
                    out[ActionType.DELIVER].append(ActionTemplate(ts, x, y, z, 1, D, x2, y2, z))
    return out


def enumerate_block_actions(inst: Instance, T: int) -> list[BlockAction]:
    Z = inst.Z
    out = []
    for t in range(T):
        for x, y in inst.columns():
            for z in range(Z):
                for z2 in range(max(0, z - 1), min(Z, z + 2)):
                    out.append(BlockAction(t, x, y, z, z2))
    return out


@dataclass
class Catalog:
    inst: Instance
    T: int
    actions_by_type: dict[ActionType, list[Action]]
    block_actions: list[BlockAction]
    templates_by_type: dict[ActionType, list[ActionTemplate]] = field(default_factory=dict)

    def __post_init__(self):
        self.actions: list[Action] = [a for t in ACTION_TYPES for a in self.actions_by_type[t]]
        self.action_index = {a: i for i, a in enumerate(self.actions)}
        self.block_index = {b: i for i, b in enumerate(self.block_actions)}
        starts, ends, finishes = defaultdict(list), defaultdict(list), defaultdict(list)
        for i, a in enumerate(self.actions):
            starts[(a.ts, a.start, a.c, a.k)].append(i)
            ends[(a.te, a.end, a.c, a.k)].append(i)
            finishes[(a.te, a.start, a.c, a.k)].append(i)
        self._starts, self._ends, self._finishes = dict(starts), dict(ends), dict(finishes)

    def starting(self, t, pos, c, k) -> list[int]:
        """Indices of actions with start time ``t``, start ``pos``, carry ``c``, kind ``k``."""
        return self._starts.get((t, pos, c, k), [])

    def ending(self, t, pos, c, k) -> list[int]:
        """Indices of actions with end time ``t`` and end position ``pos``."""
        return self._ends.get((t, pos, c, k), [])

    def finishing_from(self, t, pos, c, k) -> list[int]:
        """Indices of actions with end time ``t`` that started at ``pos``."""
        return self._finishes.get((t, pos, c, k), [])

    def counts(self) -> dict[str, int]:
        out = {a.value: len(self.actions_by_type[a]) for a in ACTION_TYPES}
        out["block_actions"] = len(self.block_actions)
        return out

    def dump_counts(self) -> str:
        rows = [f"{'type':<14}{'templates':>10}{'actions':>10}"]
        for a in ACTION_TYPES:
            nq = len(self.templates_by_type.get(a, ()))
            rows.append(f"{a.value:<14}{nq:>10}{len(self.actions_by_type[a]):>10}")
        rows.append(f"{'block_actions':<14}{'':>10}{len(self.block_actions):>10}")
        rows.append(f"{'horizon':<14}{'':>10}{self.T:>10}")
        return "\n".join(rows)


def materialize(templates, sd: ScaledDurations, T: int) -> dict[ActionType, list[Action]]:
    """Attach end times; actions that would end after ``T - 1`` are dropped."""
    out = {}
    for a, group in templates.items():
        timed = []
        for v in group:
            te = v.ts + sd.duration_of(v)
            if te <= T - 1:
                timed.append(v.timed(te))
        out[a] = timed
    return out


def build_catalog(inst: Instance, sd: ScaledDurations, T: int) -> Catalog:
    templates = enumerate_templates(inst, T, sd)
    return Catalog(inst, T, materialize(templates, sd, T), enumerate_block_actions(inst, T), templates)


__all__ = [
    "Action", "ActionTemplate", "BlockAction", "Catalog", "CatalogError", "M", "P", "D",
    "START", "END", "build_catalog", "classify", "enumerate_block_actions",
    "enumerate_templates", "materialize", "start_windows",
]
