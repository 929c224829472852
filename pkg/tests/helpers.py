"""Shared test utilities (plan <-> model vectors, mutations)."""

from macc.validate import derive_block_actions


def plan_vector(model, plan, inst):
    """0/1 assignment of the model's columns selecting exactly the plan."""
    cat = model.catalog
    x = [0] * model.n_vars
    for a in plan.actions:
        x[cat.action_index[a]] += 1
    for b in derive_block_actions(inst, plan.actions, cat.T):
        x[model.n_r + cat.block_index[b]] += 1
    return x


# --- mutation catalog ---------------------------------------------------------------
# Each entry: (name, base instance, mutate(actions) -> actions, rule that must fire).
# Bases are the unit-duration witness plans of E1 (3 actions) and E2 (11 actions).

from macc.catalog import Action, BlockAction, D, M  # noqa: E402
from macc.instance import E, S  # noqa: E402


def _find(actions, **fields):
    for a in actions:
        if all(getattr(a, k) == v for k, v in fields.items()):
            return a
    raise LookupError(fields)


def _replace(actions, old, new):
    out = list(actions)
    out[out.index(old)] = new
    return out


def shift_deliver(acts):
    a = _find(acts, k=D)
    return _replace(acts, a, a._replace(ts=a.ts + 1, te=a.te + 1))


def swap_move_end(acts):
    a = _find(acts, k=M, c=1, x=0, y=2, z=0, x2=1)
    return _replace(acts, a, a._replace(x2=0, y2=3, z2=0))


def drop_move(acts):
    a = _find(acts, k=M, c=0, x=1, y=2)
    return [b for b in acts if b != a]


def duplicate_deliver(acts):
    return acts + [_find(acts, k=D, ts=4)]


def flip_carry(acts):
    a = _find(acts, k=M, c=1, x=0, y=2, z=0, x2=1)
    return _replace(acts, a, a._replace(c=0))


def climb_two(acts):
    a = _find(acts, k=M, c=1, x=0, y=2, z=0, x2=1)
    return _replace(acts, a, a._replace(z2=2))


def jump_columns(acts):
    a = _find(acts, k=M, c=1, x=0, y=2, z=0, x2=1)
    return _replace(acts, a, a._replace(x2=2))


def stretch_deliver(acts):
    a = _find(acts, k=D)
    return _replace(acts, a, a._replace(te=a.te + 1))


def late_entry(acts):
    return acts + [Action(6, 7, S, S, S, 0, M, 3, 1, 0), Action(7, 8, 3, 1, 0, 0, M, E, E, E)]


def deliver_on_border(acts):
    a = _find(acts, k=D, ts=1)
    return _replace(acts, a, a._replace(x2=0, y2=3))


def deliver_wrong_level(acts):
    a = _find(acts, k=D)
    return _replace(acts, a, a._replace(z=1, z2=1))


def drop_first_agent(acts):
    return [a for a in acts if a.ts > 2]


def extra_agent(acts):
    return acts + [
        Action(0, 1, S, S, S, 0, M, 2, 2, 0),
        Action(1, 2, 2, 2, 0, 0, M, 2, 2, 0),
        Action(2, 3, 2, 2, 0, 0, M, E, E, E),
    ]


def shared_column(acts):
    return acts + [
        Action(0, 1, S, S, S, 0, M, 0, 2, 0),
        Action(1, 2, 0, 2, 0, 0, M, 0, 2, 0),
        Action(2, 3, 0, 2, 0, 0, M, E, E, E),
    ]


def drop_everything(acts):
    return []


MUTATIONS = [
    ("time-shift", "E2", shift_deliver, "flow"),
    ("position-swap", "E2", swap_move_end, "flow"),
    ("dropped-action", "E2", drop_move, "flow"),
    ("duplicated-action", "E2", duplicate_deliver, "exclusion"),
    ("carry-flip", "E2", flip_carry, "flow"),
    ("two-level-climb", "E2", climb_two, "gravity"),
    ("non-neighbor-move", "E2", jump_columns, "geometry"),
    ("wrong-duration", "E2", stretch_deliver, "timing"),
    ("entry-after-window", "E2", late_entry, "timing"),
    ("border-placement", "E2", deliver_on_border, "border"),
    ("wrong-block-level", "E2", deliver_wrong_level, "gravity"),
    ("unsupported-agent", "E2", drop_first_agent, "support"),
    ("extra-agent", "E1", extra_agent, "agent-cap"),
    ("shared-column", "E2", shared_column, "exclusion"),
    ("unfinished-structure", "E1", drop_everything, "completion"),
]


def corrupt_block_actions(inst, plan):
    """Height-flow mutation: one block-action claims a height change that never happens."""
    blocks = derive_block_actions(inst, plan.actions, plan.T)
    i = next(i for i, b in enumerate(blocks) if b.z == b.z2 == 0 and not inst.is_border(b.x, b.y))
    blocks[i] = BlockAction(blocks[i].t, blocks[i].x, blocks[i].y, 0, 1)
    return blocks
