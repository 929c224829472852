"""Plan checker that replays a plan against the world rules.

Written from the rules themselves (exclusion zones, gravity, agent flow) and
not from the MILP rows, so it can serve as an oracle for the model builder.
"""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field

from .bounds import padded_schedule
from .catalog import Action, BlockAction, D, M, P, start_windows
from .durations import ActionType, ScaledDurations
from .instance import E, S, Instance
from .plan import Plan, extract_itineraries

RULES = (
    "gravity", "exclusion", "agent-cap", "flow", "height-flow",
    "completion", "border", "support", "geometry", "timing",
)


@dataclass(frozen=True, order=True)
class Violation:
    t: int
    rule: str
    location: tuple
    detail: str

    def to_dict(self) -> dict:
        return {"t": self.t, "rule": self.rule, "location": list(self.location), "detail": self.detail}


@dataclass
class ViolationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def rules(self) -> set[str]:
        return {v.rule for v in self.violations}

    def add(self, t, rule, location, detail):
        self.violations.append(Violation(t, rule, tuple(location), detail))

    def to_text(self) -> str:
        if self.ok:
            return "plan valid"
        lines = [f"{len(self.violations)} violation(s)"]
        for v in self.violations:
            lines.append(f"  t={v.t:<4} {v.rule:<12} {v.location}  {v.detail}")
        return "\n".join(lines)

    def to_json(self) -> str:
        return json.dumps({"valid": self.ok, "violations": [v.to_dict() for v in self.violations]}, indent=2)


def _on_grid(inst: Instance, x, y, z) -> bool:
    return 0 <= x < inst.X and 0 <= y < inst.Y and 0 <= z < inst.Z


def _adjacent(x, y, x2, y2) -> bool:
    return abs(x - x2) + abs(y - y2) == 1


def _check_shape(inst: Instance, a: Action, rep: ViolationReport) -> bool:
    """Structural legality of a single action; returns False if malformed."""
    bad = lambda msg: rep.add(a.ts, "geometry", a.start, f"{msg}: {tuple(a)}")  # noqa: E731
    if a.c not in (0, 1):
        bad("carry flag must be 0 or 1")
        return False
    if a.x == S:
        if (a.y, a.z) != (S, S) or a.k != M:
            bad("malformed entry")
            return False
        if not (_on_grid(inst, a.x2, a.y2, a.z2) and inst.is_border(a.x2, a.y2) and a.z2 == 0):
            bad("entry must reach a ground border cell")
            return False
        return True
    if not _on_grid(inst, a.x, a.y, a.z):
        bad("start off grid")
        return False
    if a.x2 == E:
        if (a.y2, a.z2) != (E, E) or a.k != M:
            bad("malformed leave")
            return False
        if not (inst.is_border(a.x, a.y) and a.z == 0):
            bad("leave must start from a ground border cell")
            return False
        return True
    if not _on_grid(inst, a.x2, a.y2, a.z2):
        bad("end off grid")
        return False
    if a.k == M:
        if a.start == a.end:
            return True
        if not _adjacent(a.x, a.y, a.x2, a.y2):
            bad("move to a non-neighbor column")
            return False
        if abs(a.z2 - a.z) > 1:
            rep.add(a.ts, "gravity", a.start, f"climb of {a.z2 - a.z} levels: {tuple(a)}")
            return False
        return True
    if a.k in (P, D):
        if a.c != (0 if a.k == P else 1):
            bad("carry flag inconsistent with block manipulation")
            return False
        if not _adjacent(a.x, a.y, a.x2, a.y2) or a.z2 != a.z or a.z > inst.Z - 2:
            bad("block target must be the neighbor column at the agent's level")
            return False
        return True
    bad(f"unknown kind {a.k!r}")
    return False


def derive_heights(inst: Instance, actions, T: int) -> list[dict]:
    """Column heights per timestep implied by pick-up/deliver completions (no checks)."""
    changes = defaultdict(list)
    for a in actions:
        if a.k == D:
            changes[a.te].append(((a.x2, a.y2), +1))
        elif a.k == P:
            changes[a.te].append(((a.x2, a.y2), -1))
    cur = {col: 0 for col in inst.columns()}
    out = []
    for t in range(T):
        for col, delta in changes.get(t, ()):
            cur[col] += delta
        out.append(dict(cur))
    return out


def derive_block_actions(inst: Instance, actions, T: int) -> list[BlockAction]:
    heights = derive_heights(inst, actions, T)
    out = []
    for t in range(T):
        nxt = heights[t + 1] if t + 1 < T else heights[t]
        for (x, y), z in heights[t].items():
            out.append(BlockAction(t, x, y, z, nxt[(x, y)]))
    return sorted(out)


def validate_plan(inst: Instance, sd: ScaledDurations, p: Plan) -> ViolationReport:
    rep = ViolationReport()
    T = p.T
    windows = start_windows(T)
    acts = [a for a in p.actions if _check_shape(inst, a, rep)]

    for a in acts:
        kind = a.action_type
        want = sd.duration_of(a.template)
        if a.d != want:
            rep.add(a.ts, "timing", a.start, f"{kind} lasts {a.d}, expected {want}: {tuple(a)}")
        if a.ts not in windows[kind]:
            rep.add(a.ts, "timing", a.start, f"{kind} may not start at t={a.ts} with T={T}")
        if a.te > T - 1:
            rep.add(a.ts, "timing", a.start, f"{kind} ends at {a.te} beyond T-1={T - 1}")

    # agent flow: every arrival at (t, cell, carry) is matched by a departure
    arrive, depart = Counter(), Counter()
    for a in acts:
        if a.x != S:
            depart[(a.ts, a.start, a.c)] += 1
        if a.x2 != E:
            arrive[(a.te, a.position_after, a.carry_after)] += 1
    for node in sorted(set(arrive) | set(depart)):
        if arrive[node] != depart[node]:
            t, pos, c = node
            rep.add(t, "flow", pos, f"carry={c}: {arrive[node]} arriving, {depart[node]} departing")

    # per-timestep occupancy: exclusion zones and the agent cap
    users = defaultdict(list)
    load = Counter()
    for a in acts:
        for t in range(a.ts, min(a.te, T)):
            load[t] += 1
            for col in a.columns:
                users[(t, col)].append(a)
    for t in sorted(load):
        if load[t] > inst.agent_limit:
            rep.add(t, "agent-cap", (), f"{load[t]} agents active, limit {inst.agent_limit}")
    for (t, col), group in sorted(users.items()):
        if len(group) > 1:
            rep.add(t, "exclusion", col, f"{len(group)} actions hold the column")

    # world replay
    heights = {col: 0 for col in inst.columns()}
    history = []
    completing = defaultdict(list)
    for a in acts:
        if a.k in (P, D):
            completing[a.te].append(a)
    for t in range(T):
        for a in sorted(completing.get(t, ())):
            col = (a.x2, a.y2)
            before = a.z + 1 if a.k == P else a.z
            if heights[col] != before:
                verb = "pick up from" if a.k == P else "deliver onto"
                rep.add(t, "gravity", col, f"{verb} column of height {heights[col]} at level {a.z}")
            heights[col] += -1 if a.k == P else 1
            if a.k == D and inst.is_border(*col):
                rep.add(t, "border", col, "block placed on a border cell")
        history.append(dict(heights))

    for a in acts:
        if a.k in (P, D):
            col = (a.x2, a.y2)
            expect = a.z + 1 if a.k == P else a.z
            if a.ts < T and history[a.ts][col] != expect:
                rep.add(a.ts, "gravity", col, f"{a.action_type} at level {a.z} while column height is {history[a.ts][col]}")
        if a.x == S:
            continue
        col = (a.x, a.y)
        for t in range(a.ts, min(a.te, T)):
            if history[t][col] != a.z:
                rep.add(t, "support", a.start, f"agent at level {a.z} on column of height {history[t][col]}")
                break

    for t, hs in enumerate(history):
        for col, z in hs.items():
            if z < 0 or z >= inst.Z:
                rep.add(t, "gravity", col, f"height {z} outside [0, {inst.Z - 1}]")
            if z and inst.is_border(*col):
                rep.add(t, "border", col, f"border column at height {z}")
    if history:
        for col, z in sorted(history[-1].items()):
            if z != inst.target(*col):
                rep.add(T - 1, "completion", col, f"final height {z}, target {inst.target(*col)}")
        for col, z in sorted(history[0].items()):
            if z != 0:
                rep.add(0, "completion", col, f"initial height {z}")

    if p.block_actions:
        expected = set(derive_block_actions(inst, p.actions, T))
        got = Counter(p.block_actions)
        for b in sorted(expected - set(got)):
            rep.add(b.t, "height-flow", (b.x, b.y), f"missing block-action {tuple(b)}")
        for b in sorted(set(got) - expected):
            rep.add(b.t, "height-flow", (b.x, b.y), f"unexpected block-action {tuple(b)}")
        for b, n in sorted(got.items()):
            if n > 1:
                rep.add(b.t, "height-flow", (b.x, b.y), f"block-action repeated {n} times")

    rep.violations.sort()
    return rep


def pad_with_waits(unit_plan: Plan, sd_target: ScaledDurations, inst: Instance) -> Plan:
    """Re-time a unit-duration plan to target durations with a barrier per unit step.

    Every action of unit step n starts at the barrier time of step n; agents that
    finish early wait in place until the next barrier.
    """
    barrier = padded_schedule(unit_plan, sd_target)
    out = []
    for it in extract_itineraries(unit_plan):
        for a in it.actions:
            ts = barrier[a.ts]
            tmpl = a.template._replace(ts=ts)
            te = ts + sd_target.duration_of(tmpl)
            out.append(tmpl.timed(te))
            if a.x2 == E:
                continue
            x, y, z = a.position_after
            c = a.carry_after
            for t in range(te, barrier[a.te]):
                out.append(Action(t, t + 1, x, y, z, c, M, x, y, z))
    T = barrier[-1]
    return Plan(T, out, derive_block_actions(inst, out, T), sd_target, unit_plan.bounds)


__all__ = [
    "RULES", "Violation", "ViolationReport", "derive_block_actions", "derive_heights",
    "pad_with_waits", "validate_plan",
]
