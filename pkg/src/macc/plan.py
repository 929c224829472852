"""Plans, per-agent itineraries and the JSON plan file."""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field

from .bounds import BoundReport
from .catalog import Action, BlockAction
from .durations import ScaledDurations, parse_durations, scale
from .instance import E, S


class PlanError(ValueError):
    pass


@dataclass
class Itinerary:
    agent: int
    actions: list[Action]
    indices: list[int] = field(default_factory=list)  # positions in Plan.actions

    @property
    def entry(self) -> Action:
        return self.actions[0]


@dataclass
class Plan:
    T: int
    actions: list[Action]
    block_actions: list[BlockAction] = field(default_factory=list)
    durations: ScaledDurations | None = None
    bounds: BoundReport | None = None

    def __post_init__(self):
        self.actions = sorted(self.actions)
        self.block_actions = sorted(self.block_actions)

    @property
    def makespan(self) -> int:
        return self.T

    @property
    def sum_of_costs(self) -> int:
        return sum(a.d for a in self.actions)

    def agents_used(self) -> int:
        """Largest number of simultaneously running actions (agents on the grid)."""
        load = defaultdict(int)
        for a in self.actions:
            for t in range(a.ts, a.te):
                load[t] += 1
        return max(load.values(), default=0)

    def count(self, action_type) -> int:
        return sum(1 for a in self.actions if a.action_type == action_type)


def _out_node(a: Action):
    return (a.te, a.position_after, a.carry_after)


def _in_node(a: Action):
    return (a.ts, a.start, a.c)


def extract_itineraries(p: Plan) -> list[Itinerary]:
    """Decompose the two agent flow networks into one chain per entering agent.

    At each flow node (t, x, y, z, c) arrivals and departures are matched in
    sorted order; agents are interchangeable so any matching is valid.
    """
    acts = p.actions  # sorted, so index order is action order
    arrivals, departures = defaultdict(list), defaultdict(list)
    entries = []
    for i, a in enumerate(acts):
        if a.x == S:
            entries.append(i)
        else:
            departures[_in_node(a)].append(i)
        if a.x2 != E:
            arrivals[_out_node(a)].append(i)

    successor = {}
    for node in sorted(set(arrivals) | set(departures)):
        ins, outs = arrivals.get(node, []), departures.get(node, [])
        if len(ins) != len(outs):
            t, pos, c = node
            raise PlanError(f"flow imbalance at t={t} pos={pos} c={c}: {len(ins)} in, {len(outs)} out")
        successor.update(zip(ins, outs))

    entries.sort(key=lambda i: (acts[i].ts, acts[i].x2, acts[i].y2, acts[i].c, acts[i].te))
    itineraries = []
    for agent, i in enumerate(entries):
        chain = [i]
        while acts[chain[-1]].x2 != E:
            chain.append(successor[chain[-1]])
        itineraries.append(Itinerary(agent, [acts[j] for j in chain], chain))
    return itineraries


_FIELDS = ("ts", "te", "x", "y", "z", "c", "k", "x2", "y2", "z2")
_COORDS = ("x", "y", "z", "x2", "y2", "z2")


def _encode_action(a: Action) -> dict:
    out = {}
    for name, v in zip(_FIELDS, a):
        if name in _COORDS and v < 0:
            v = "S" if v == S else "E"
        out[name] = v
    return out


def _decode_action(doc: dict) -> Action:
    vals = []
    for name in _FIELDS:
        if name not in doc:
            raise PlanError(f"action missing field {name!r}: {doc}")
        v = doc[name]
        if name == "k":
            if v not in ("M", "P", "D"):
                raise PlanError(f"bad action kind {v!r}")
        elif v == "S" and name in _COORDS:
            v = S
        elif v == "E" and name in _COORDS:
            v = E
        elif not isinstance(v, int) or isinstance(v, bool):
            raise PlanError(f"field {name} must be an integer, got {v!r}")
        vals.append(v)
    return Action(*vals)


def _dump(v) -> str:
    return json.dumps(v, separators=(", ", ": "))


def serialize_plan(p: Plan, itineraries: list[Itinerary] | None = None) -> str:
    """Plan file text; one action per line, keys in fixed order."""
    if itineraries is None:
        itineraries = extract_itineraries(p)
    head = {
        "makespan": p.makespan,
        "sum_of_costs": p.sum_of_costs,
        "agents_used": p.agents_used(),
        "durations": None,
        "bounds": p.bounds.to_dict() if p.bounds else None,
    }
    if p.durations is not None and p.durations.spec is not None:
        head["durations"] = dict(p.durations.spec.to_dict(), scale=p.durations.m)
    lines = ["{"]
    for k, v in head.items():
        lines.append(f'  "{k}": {_dump(v)},')
    lines.append('  "actions": [')
    enc = [_dump(_encode_action(a)) for a in p.actions]
    lines += [f"    {e}," for e in enc[:-1]] + ([f"    {enc[-1]}"] if enc else [])
    lines.append("  ],")
    lines.append('  "itineraries": [')
    its = [_dump(it.indices) for it in itineraries]
    lines += [f"    {e}," for e in its[:-1]] + ([f"    {its[-1]}"] if its else [])
    lines.append("  ],")
    lines.append('  "block_actions": [')
    blk = [_dump(list(b)) for b in p.block_actions]
    lines += [f"    {e}," for e in blk[:-1]] + ([f"    {blk[-1]}"] if blk else [])
    lines.append("  ]")
    lines.append("}")
    return "\n".join(lines) + "\n"


def parse_plan(text: str) -> Plan:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PlanError(f"malformed plan file: {exc}") from None
    if not isinstance(doc, dict):
        raise PlanError("plan file must hold a JSON object")
    for key in ("makespan", "sum_of_costs", "actions"):
        if key not in doc:
            raise PlanError(f"plan file missing {key!r}")
    actions = [_decode_action(a) for a in doc["actions"]]
    try:
        blocks = [BlockAction(*map(int, b)) for b in doc.get("block_actions", [])]
    except (TypeError, ValueError) as exc:
        raise PlanError(f"bad block action: {exc}") from None
    sd = None
    if doc.get("durations"):
        sd = scale(parse_durations({k: v for k, v in doc["durations"].items() if k != "scale"}))
    bounds = BoundReport.from_dict(doc["bounds"]) if doc.get("bounds") else None
    p = Plan(int(doc["makespan"]), actions, blocks, sd, bounds)
    if p.sum_of_costs != doc["sum_of_costs"]:
        raise PlanError(f"sum_of_costs {doc['sum_of_costs']} does not match actions ({p.sum_of_costs})")
    n = len(p.actions)
    for chain in doc.get("itineraries", []):
        if any(not isinstance(i, int) or not 0 <= i < n for i in chain):
            raise PlanError(f"itinerary index out of range: {chain}")
    return p


def load_plan(path) -> Plan:
    with open(path, encoding="utf-8") as fh:
        return parse_plan(fh.read())


def write_plan(p: Plan, path, itineraries=None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_plan(p, itineraries))
