"""Exhaustive optimal planner for toy instances.

A first sweep finds the earliest timestep at which the finished world is
reachable. A second sweep at that horizon maps each canonical world state
(column heights, running actions with their time left, idle agents) to its
cheapest cost. Agents are interchangeable, so agent collections are kept
sorted. A state is dropped when an admissible estimate shows the world cannot
be finished by T - 1, or when it was already reached earlier at no higher cost.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product

from .bounds import lower_bound_lr
from .catalog import MIN_HORIZON, Action, ActionTemplate, D, M, P, start_windows
from .durations import ActionType, ScaledDurations
from .instance import E, S, Instance, min_border_distance
from .plan import Plan
from .validate import derive_block_actions

MAX_COLUMNS = 16
MAX_BLOCKS = 3
MAX_AGENTS = 2
MAX_HORIZON = 32


class OracleError(ValueError):
    pass


@dataclass
class OracleResult:
    makespan: int
    sum_of_costs: int
    plan: Plan
    states_explored: int = 0


def _check_guard(inst: Instance, T_max: int) -> None:
    problems = []
    if inst.X * inst.Y > MAX_COLUMNS:
        problems.append(f"{inst.X * inst.Y} columns > {MAX_COLUMNS}")
    if inst.total_blocks > MAX_BLOCKS:
        problems.append(f"{inst.total_blocks} blocks > {MAX_BLOCKS}")
    if inst.agent_limit > MAX_AGENTS:
        problems.append(f"agent limit {inst.agent_limit} > {MAX_AGENTS}")
    if T_max > MAX_HORIZON:
        problems.append(f"T_max {T_max} > {MAX_HORIZON}")
    if problems:
        raise OracleError("instance too large for exhaustive search: " + "; ".join(problems))


class _World:
    def __init__(self, inst: Instance, sd: ScaledDurations):
        self.inst = inst
        X, Y, Z = inst.X, inst.Y, inst.Z
        self.cols = [(x, y) for x in range(X) for y in range(Y)]
        self.cid = {col: i for i, col in enumerate(self.cols)}
        self.is_border = [inst.is_border(x, y) for x, y in self.cols]
        self.target = tuple(inst.target(x, y) for x, y in self.cols)
        self.exit_dist = [min(x, y, X - 1 - x, Y - 1 - y) for x, y in self.cols]
        self.reach = [min_border_distance(inst, x, y) for x, y in self.cols]

        def dur(*fields):
            return sd.duration_of(ActionTemplate(0, *fields))

        # menu[(x, y, z, c)] -> (type, x, y, z, c, k, x2, y2, z2, d, columns)
        self.menu = {}
        for x, y in self.cols:
            nbrs = [(a, b) for a, b in ((x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)) if 0 <= a < X and 0 <= b < Y]
            here = self.cid[(x, y)]
            for z in range(Z):
                for c in (0, 1):
                    opts = []
                    f = (x, y, z, c, M, x, y, z)
                    opts.append((ActionType.WAIT, *f, dur(*f), (here,)))
                    kind = ActionType.MOVE_BLOCK if c else ActionType.MOVE_EMPTY
                    for x2, y2 in nbrs:
                        for z2 in range(max(0, z - 1), min(Z, z + 2)):
                            f = (x, y, z, c, M, x2, y2, z2)
                            opts.append((kind, *f, dur(*f), (here, self.cid[(x2, y2)])))
                    if z <= Z - 2:
                        k, kind2 = (D, ActionType.DELIVER) if c else (P, ActionType.PICK_UP)
                        for x2, y2 in nbrs:
                            f = (x, y, z, c, k, x2, y2, z)
                            opts.append((kind2, *f, dur(*f), (here, self.cid[(x2, y2)])))
                    if inst.is_border(x, y) and z == 0:
                        f = (x, y, z, c, M, E, E, E)
                        opts.append((ActionType.LEAVE, *f, dur(*f), (here,)))
                    self.menu[(x, y, z, c)] = opts
        self.entries = []
        for x, y in self.cols:
            if inst.is_border(x, y):
                for c in (0, 1):
                    f = (S, S, S, c, M, x, y, 0)
                    self.entries.append((ActionType.ENTRY, *f, dur(*f), (self.cid[(x, y)],)))

        lo = {}
        for opts in [*self.menu.values(), self.entries]:
            for o in opts:
                lo[o[0]] = min(lo.get(o[0], o[9]), o[9])
        self.d_min = lo
        self.d_move = min(lo.get(ActionType.MOVE_BLOCK, 1), lo.get(ActionType.MOVE_EMPTY, 1))
        self.d_leave = lo[ActionType.LEAVE]
        self.d_entry = lo[ActionType.ENTRY]
        # per-level block manipulation minima (height-dependent durations)
        self.d_deliver_at = {}
        self.d_pick_at = {}
        for opts in self.menu.values():
            for o in opts:
                if o[0] is ActionType.DELIVER:
                    self.d_deliver_at[o[3]] = min(self.d_deliver_at.get(o[3], o[9]), o[9])
                elif o[0] is ActionType.PICK_UP:
                    self.d_pick_at[o[3]] = min(self.d_pick_at.get(o[3], o[9]), o[9])

    # --- admissible completion estimate ---------------------------------------------

    def can_finish(self, t, heights, busy, idle, T) -> bool:
        last = T - 1
        carrying = False
        pending = {}
        for a in busy:
            rem, x, y, z, c, k, x2 = a[:7]
            te = t + rem
            if x2 == E:
                continue
            px, py = (x, y) if k != M else (x2, a[7])
            if te + self.exit_dist[self.cid[(px, py)]] * self.d_move + self.d_leave > last:
                return False
            if k == P or (k == M and c):
                carrying = True
            if k in (P, D):
                col = self.cid[(x2, a[7])]
                pending[col] = max(pending.get(col, 0), te)
        for x, y, z, c in idle:
            if t + self.exit_dist[self.cid[(x, y)]] * self.d_move + self.d_leave > last:
                return False
            carrying = carrying or c == 1
        exit_tail = self.d_move, self.d_leave
        for i, h in enumerate(heights):
            goal = self.target[i]
            if h == goal:
                continue
            start = max(t, pending.get(i, t))
            if h < goal:
                if i in pending:  # an ongoing deliver already covers level h-1 -> h
                    h = h + 1 if h + 1 <= goal else h
                work = sum(self.d_deliver_at.get(z, 1) for z in range(h, goal))
                lead = 0 if carrying else min(self.d_entry + self.reach[i] * self.d_move,
                                              self.d_min.get(ActionType.PICK_UP, 1))
            else:
                if i in pending:
                    h = h - 1 if h - 1 >= goal else h
                work = sum(self.d_pick_at.get(z, 1) for z in range(goal, h))
                lead = 0
            if work and start + lead + work + self.reach[i] * exit_tail[0] + exit_tail[1] > last:
                return False
        return True


def _expand(w: _World, t, state, T, windows):
    """Yield (next_state, started_actions, cost) for every legal joint decision at t.

    ``windows`` None lifts the start-time windows (used by the feasibility sweep).
    """
    heights, busy, idle = state
    reserved = set()
    for a in busy:
        reserved.update(a[10])
    if windows is None:
        allowed = None
    else:
        allowed = {kind for kind, rng in windows.items() if t in rng}
    last = T - 1

    per_agent = []
    for x, y, z, c in idle:
        if heights[w.cid[(x, y)]] != z:
            return  # agent not standing on top of its column
        opts = []
        for o in w.menu[(x, y, z, c)]:
            kind, d = o[0], o[9]
            if (allowed is not None and kind not in allowed) or t + d > last:
                continue
            cols = o[10]
            if cols[0] in reserved or (len(cols) > 1 and cols[1] in reserved):
                continue
            if kind is ActionType.DELIVER:
                tc = cols[1]
                if w.is_border[tc] or heights[tc] != z:
                    continue
            elif kind is ActionType.PICK_UP:
                if heights[cols[1]] != z + 1:
                    continue
            opts.append(o)
        if not opts:
            return
        per_agent.append(opts)

    room = w.inst.agent_limit - len(busy) - len(idle)
    entry_opts = []
    if room > 0 and (allowed is None or ActionType.ENTRY in allowed):
        entry_opts = [o for o in w.entries if t + o[9] + w.d_leave <= last and o[10][0] not in reserved]

    for choice in product(*per_agent):
        used = set()
        ok = True
        for o in choice:
            for col in o[10]:
                if col in used:
                    ok = False
                    break
                used.add(col)
            if not ok:
                break
        if not ok:
            continue
        free_entries = [o for o in entry_opts if o[10][0] not in used]
        for n in range(0, min(room, len(free_entries)) + 1):
            for extra in combinations(free_entries, n):
                if n > 1 and len({o[10][0] for o in extra}) != n:
                    continue
                yield _advance(w, t, heights, busy, choice + extra)


def _advance(w: _World, t, heights, busy, started):
    """Apply the decisions at t; busy records hold the time left until completion."""
    hs = list(heights)
    new_busy = []
    new_idle = []
    actions = []
    cost = 0
    running = list(busy)
    for o in started:
        kind, x, y, z, c, k, x2, y2, z2, d, cols = o
        actions.append(Action(t, t + d, x, y, z, c, k, x2, y2, z2))
        cost += d
        running.append((d, x, y, z, c, k, x2, y2, z2, d, cols))
    for a in running:
        rem = a[0] - 1
        if rem > 0:
            new_busy.append((rem,) + a[1:])
            continue
        _, x, y, z, c, k, x2, y2, z2 = a[:9]
        if k == D:
            hs[w.cid[(x2, y2)]] += 1
            new_idle.append((x, y, z, 0))
        elif k == P:
            hs[w.cid[(x2, y2)]] -= 1
            new_idle.append((x, y, z, 1))
        elif x2 != E:
            new_idle.append((x2, y2, z2, c))
    state = (tuple(hs), tuple(sorted(new_busy)), tuple(sorted(new_idle)))
    return state, actions, cost


def _earliest_finish(w: _World, T_max: int):
    """First timestep at which the finished world is reachable, or None.

    States carry relative times, so a state seen earlier dominates the same
    state seen later and each state is expanded once.
    """
    start = (tuple(0 for _ in w.cols), (), ())
    goal = (w.target, (), ())
    if start == goal:
        return 0, 1
    seen = {start}
    frontier = [start]
    for t in range(T_max - 1):
        nxt = []
        for state in frontier:
            for new_state, _, _ in _expand(w, t, state, T_max, None):
                if new_state in seen:
                    continue
                if not w.can_finish(t + 1, *new_state, T_max):
                    continue
                if new_state == goal:
                    return t + 1, len(seen)
                seen.add(new_state)
                nxt.append(new_state)
        if not nxt:
            break
        frontier = nxt
    return None, len(seen)


def _cheapest(w: _World, T: int):
    """Cheapest plan finishing by ``T - 1`` or None; also returns the states visited."""
    windows = start_windows(T)
    start = (tuple(0 for _ in w.cols), (), ())
    goal = (w.target, (), ())
    best = {start: 0}
    layer = {start: (0, None, ())}
    history = [layer]
    done = (0, 0) if start == goal else None  # (cost, layer)
    for t in range(T - 1):
        nxt = {}
        for state, (cost, _, _) in layer.items():
            if state == goal:
                continue
            for new_state, acts, add in _expand(w, t, state, T, windows):
                total = cost + add
                if done is not None and total >= done[0]:
                    continue
                same = nxt.get(new_state)
                if same is not None and same[0] <= total:
                    continue
                prev = best.get(new_state)
                if prev is not None and prev <= total:
                    continue
                if same is None and not w.can_finish(t + 1, *new_state, T):
                    continue
                if t + 1 >= 2:  # leaves open at 2, so earlier layers do not dominate
                    best[new_state] = total
                nxt[new_state] = (total, state, acts)
        if goal in nxt:
            done = (nxt[goal][0], t + 1)
        layer = nxt
        history.append(layer)
        if not layer:
            break
    if done is None:
        return None, len(best)
    actions = []
    state = goal
    for t in range(done[1], 0, -1):
        _, parent, acts = history[t][state]
        actions.extend(acts)
        state = parent
    return (done[0], actions), len(best)


def brute_force_plan(inst: Instance, sd: ScaledDurations, T_max: int = MAX_HORIZON) -> OracleResult | None:
    """Lexicographically optimal (makespan, sum-of-costs) by exhaustive search.

    Returns None when no plan fits within ``T_max`` timesteps.
    """
    _check_guard(inst, T_max)
    w = _World(inst, sd)
    first, explored = _earliest_finish(w, T_max)
    if first is None:
        return None
    for T in range(max(MIN_HORIZON, lower_bound_lr(inst, sd), first + 1), T_max + 1):
        found, n = _cheapest(w, T)
        explored += n
        if found is not None:
            cost, actions = found
            plan = Plan(T, actions, derive_block_actions(inst, actions, T), sd)
            return OracleResult(T, cost, plan, explored)
    return None
