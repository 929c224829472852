"""Binary MILP over action indicators r_i and block-action indicators h_i.

Rows are tagged by constraint family (``c2`` ... ``c14``). The exported file is
CPLEX LP text, which both CBC and HiGHS read.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .catalog import Action, BlockAction, Catalog, D, M, P
from .instance import E, S, Instance, border_cells

LE, EQ, GE = "<=", "=", ">="


class VarRef(NamedTuple):
    kind: str  # "R" or "H"
    index: int


class LinearConstraint(NamedTuple):
    name: str
    tag: str
    terms: tuple[tuple[int, int], ...]  # (column, coefficient), columns sorted
    sense: str
    rhs: int

    def activity(self, values: Sequence[int]) -> int:
        return sum(coef * values[j] for j, coef in self.terms)

    def holds(self, values: Sequence[int]) -> bool:
        lhs = self.activity(values)
        if self.sense == LE:
            return lhs <= self.rhs
        if self.sense == GE:
            return lhs >= self.rhs
        return lhs == self.rhs


def _coord(v: int) -> str:
    if v == S:
        return "S"
    if v == E:
        return "E"
    return str(v)


def action_name(a: Action) -> str:
    return "r_" + "_".join(_coord(v) if i >= 2 and i != 6 else str(v) for i, v in enumerate(a))


def block_name(b: BlockAction) -> str:
    return "h_{}_{}_{}_{}_{}".format(*b)


@dataclass
class MilpModel:
    catalog: Catalog
    names: list[str]
    objective: dict[int, int]
    constraints: list[LinearConstraint]

    @property
    def n_r(self) -> int:
        return len(self.catalog.actions)

    @property
    def n_h(self) -> int:
        return len(self.catalog.block_actions)

    @property
    def n_vars(self) -> int:
        return len(self.names)

    def ref(self, column: int) -> VarRef:
        if column < self.n_r:
            return VarRef("R", column)
        return VarRef("H", column - self.n_r)

    def column(self, ref: VarRef) -> int:
        return ref.index if ref.kind == "R" else self.n_r + ref.index

    def rows(self, tag: str) -> list[LinearConstraint]:
        return [c for c in self.constraints if c.tag == tag]

    def objective_value(self, values: Sequence[int]) -> int:
        return sum(coef * values[j] for j, coef in self.objective.items())

    def violated(self, values: Sequence[int]) -> list[LinearConstraint]:
        return [c for c in self.constraints if not c.holds(values)]


class _Builder:
    def __init__(self):
        self.rows: list[LinearConstraint] = []

    def add(self, name, tag, plus=(), minus=(), sense=EQ, rhs=0, keep_empty=False):
        terms = defaultdict(int)
        for j in plus:
            terms[j] += 1
        for j in minus:
            terms[j] -= 1
        canon = tuple(sorted((j, v) for j, v in terms.items() if v))
        if not canon and not keep_empty:
            if not _trivially(sense, rhs):
                raise AssertionError(f"empty row {name} cannot hold")
            return
        self.rows.append(LinearConstraint(name, tag, canon, sense, rhs))


def _trivially(sense, rhs) -> bool:
    return (sense == EQ and rhs == 0) or (sense == LE and rhs >= 0) or (sense == GE and rhs <= 0)


def build_model(inst: Instance, cat: Catalog, T: int | None = None) -> MilpModel:
    T = cat.T if T is None else T
    if T != cat.T:
        raise ValueError(f"catalog horizon {cat.T} differs from T={T}")
    X, Y, Z = inst.X, inst.Y, inst.Z
    nR = len(cat.actions)
    names = [action_name(a) for a in cat.actions] + [block_name(b) for b in cat.block_actions]
    objective = {i: a.d for i, a in enumerate(cat.actions)}

    hidx = {b: nR + i for i, b in enumerate(cat.block_actions)}

    def h(t, x, y, z, z2):
        return hidx[BlockAction(t, x, y, z, z2)]

    def h_into(t, x, y, z):  # H_{t,x,y,*,z}
        return [h(t, x, y, z0, z) for z0 in range(max(0, z - 1), min(Z, z + 2))]

    def h_from(t, x, y, z):  # H_{t,x,y,z,*}
        return [h(t, x, y, z, z1) for z1 in range(max(0, z - 1), min(Z, z + 2))]

    active = defaultdict(list)
    for i, a in enumerate(cat.actions):
        for t in range(a.ts, a.te):
            active[t].append(i)

    b = _Builder()
    for t in range(T):
        for x, y, z in sorted(border_cells(inst)):
            b.add(f"c2_{t}_{x}_{y}_{z}", "c2", [h(t, x, y, z, z)], rhs=1)
    for x, y in inst.columns():
        b.add(f"c3_{x}_{y}", "c3", [h(0, x, y, 0, 0)], rhs=1)
    for x, y in inst.columns():
        zt = inst.target(x, y)
        b.add(f"c4_{x}_{y}", "c4", [h(T - 1, x, y, zt, zt)], rhs=1)
    for t in range(T - 1):
        for x, y, z in inst.cells():
            b.add(f"c5_{t}_{x}_{y}_{z}", "c5", h_into(t, x, y, z), h_from(t + 1, x, y, z))
    for t in range(T):
        for x, y in inst.columns():
            cols = [h(t, x, y, z, z1) for z in range(Z) for z1 in range(max(0, z - 1), min(Z, z + 2))]
            b.add(f"c6_{t}_{x}_{y}", "c6", cols, rhs=1)

    for t in range(T):
        for x, y, z in inst.cells():
            p = (x, y, z)
            b.add(
                f"c7_{t}_{x}_{y}_{z}", "c7",
                cat.ending(t, p, 0, M) + cat.finishing_from(t, p, 1, D),
                cat.starting(t, p, 0, M) + cat.starting(t, p, 0, P),
            )
            b.add(
                f"c8_{t}_{x}_{y}_{z}", "c8",
                cat.ending(t, p, 1, M) + cat.finishing_from(t, p, 0, P),
                cat.starting(t, p, 1, M) + cat.starting(t, p, 1, D),
            )

    for t in range(T):
        by_start, by_end, by_both = defaultdict(list), defaultdict(list), defaultdict(list)
        by_cell = defaultdict(list)
        for i in active[t]:
            a = cat.actions[i]
            s_col, e_col = (a.x, a.y), (a.x2, a.y2)
            if a.x >= 0:
                by_start[s_col].append(i)
                by_cell[a.start].append(i)
            if a.x2 >= 0:
                by_end[e_col].append(i)
            if a.x >= 0 and s_col == e_col:
                by_both[s_col].append(i)
        for x, y in inst.columns():
            col = (x, y)
            plus = by_start.get(col, []) + by_end.get(col, [])
            b.add(f"c9_{t}_{x}_{y}", "c9", plus, by_both.get(col, []), sense=LE, rhs=1)
        b.add(f"c11_{t}", "c11", active[t], sense=LE, rhs=inst.agent_limit, keep_empty=True)
        for x, y, z in inst.cells():
            users = by_cell.get((x, y, z), [])
            if users:
                b.add(f"c12_{t}_{x}_{y}_{z}", "c12", h_from(t, x, y, z), users, sense=GE, rhs=0)

    for t in range(T - 1):
        for x, y in inst.columns():
            for z in range(Z - 1):
                p = (x, y, z)
                b.add(f"c13_{t}_{x}_{y}_{z}", "c13", [h(t, x, y, z + 1, z)], cat.ending(t + 1, p, 0, P))
                b.add(f"c14_{t}_{x}_{y}_{z}", "c14", [h(t, x, y, z, z + 1)], cat.ending(t + 1, p, 1, D))

    return MilpModel(cat, names, objective, b.rows)


def _lp_terms(pairs, names, first=False):
    out = []
    for j, coef in pairs:
        if coef == 1:
            tok = f"+ {names[j]}"
        elif coef == -1:
            tok = f"- {names[j]}"
        elif coef < 0:
            tok = f"- {-coef} {names[j]}"
        else:
            tok = f"+ {coef} {names[j]}"
        out.append(tok)
    if out and first and out[0].startswith("+ "):
        out[0] = out[0][2:]
    return out


def _wrap(prefix: str, tokens: list[str], suffix: str = "", width: int = 6) -> list[str]:
    lines = []
    for i in range(0, max(len(tokens), 1), width):
        chunk = " ".join(tokens[i:i + width])
        lines.append((prefix if i == 0 else "   ") + chunk)
    lines[-1] += suffix
    return lines


def export_model(m: MilpModel) -> str:
    """Serialize to CPLEX LP format; output is a pure function of the model."""
    names = m.names
    lines = [
        f"\\ macc fraction-time model T={m.catalog.T} r={m.n_r} h={m.n_h} rows={len(m.constraints)}",
        "Minimize",
    ]
    obj = sorted((j, c) for j, c in m.objective.items() if c)
    if not obj:
        obj = [(0, 0)]
    tokens = _lp_terms(obj, names, first=True) if obj[0][1] else [f"0 {names[0]}"]
    lines += _wrap(" obj: ", tokens)
    lines.append("Subject To")
    for row in m.constraints:
        terms = row.terms or ((0, 0),)
        tokens = _lp_terms(terms, names, first=True) if row.terms else [f"0 {names[0]}"]
        lines += _wrap(f" {row.name}: ", tokens, f" {row.sense} {row.rhs}")
    lines.append("Binaries")
    for i in range(0, len(names), 8):
        lines.append(" " + " ".join(names[i:i + 8]))
    lines.append("End")
    return "\n".join(lines) + "\n"


def write_model(m: MilpModel, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(export_model(m))
