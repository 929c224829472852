"""Makespan lower bounds, upper bounds and the alpha-scaled estimate."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, fields
from fractions import Fraction

from .catalog import MIN_HORIZON, Catalog, enumerate_templates
from .durations import ACTION_TYPES, ActionType, ScaledDurations
from .instance import Instance, min_border_distance


class BoundError(ValueError):
    pass


@dataclass
class BoundReport:
    l_r: int
    l_f: int | None = None
    T_b: int | None = None
    alpha: Fraction | None = None
    T_h: int | None = None
    u_f: int | None = None
    u_c: int | None = None

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = str(v) if isinstance(v, Fraction) else v
        return out

    @classmethod
    def from_dict(cls, doc: dict) -> "BoundReport":
        kw = {f.name: doc.get(f.name) for f in fields(cls)}
        if kw["alpha"] is not None:
            kw["alpha"] = Fraction(kw["alpha"])
        return cls(**kw)

    def soundness_failures(self, makespan: int) -> list[str]:
        """Which of ``l_r <= makespan <= u_f <= u_c`` / ``l_f <= makespan`` fail."""
        bad = []
        if self.l_r > makespan:
            bad.append(f"l_r={self.l_r} > makespan={makespan}")
        if self.l_f is not None and self.l_f > makespan:
            bad.append(f"l_f={self.l_f} > makespan={makespan}")
        if self.u_f is not None and makespan > self.u_f:
            bad.append(f"makespan={makespan} > u_f={self.u_f}")
        if self.u_f is not None and self.u_c is not None and self.u_f > self.u_c:
            bad.append(f"u_f={self.u_f} > u_c={self.u_c}")
        return bad


def duration_extremes(inst: Instance, sd: ScaledDurations) -> dict[ActionType, tuple[int, int]]:
    """(min, max) duration per action type over every template of the grid."""
    templates = enumerate_templates(inst, MIN_HORIZON)
    out = {}
    for a, group in templates.items():
        ds = [sd.duration_of(v) for v in group]
        if ds:
            out[a] = (min(ds), max(ds))
    return out


def lower_bound_lr(inst: Instance, sd: ScaledDurations) -> int:
    """Relaxation bound: each column built by its own agents straight from the border."""
    cols = [(x, y) for x, y in inst.columns() if inst.target(x, y) > 0]
    if not cols:
        return MIN_HORIZON
    ext = duration_extremes(inst, sd)
    d_min = {a: lo for a, (lo, _) in ext.items()}
    d_move = min(d_min[ActionType.MOVE_BLOCK], d_min[ActionType.MOVE_EMPTY])
    best = 0
    for x, y in cols:
        s = min_border_distance(inst, x, y)
        t_col = (
            d_min[ActionType.ENTRY]
            + s * d_move
            + inst.target(x, y) * d_min[ActionType.DELIVER]
            + s * d_move
            + d_min[ActionType.LEAVE]
        )
        best = max(best, t_col)
    return best


def compute_alpha(cat: Catalog, allow_empty: bool = False) -> Fraction:
    """Mean over the seven action types of the mean materialized duration.

    With ``allow_empty`` types without any materialized action are left out of
    both the sum and the count.
    """
    avgs = []
    empty = []
    for a in ACTION_TYPES:
        group = cat.actions_by_type[a]
        if not group:
            empty.append(a.value)
            continue
        avgs.append(Fraction(sum(r.d for r in group), len(group)))
    if empty and not allow_empty:
        raise BoundError(f"no materialized actions of type: {', '.join(empty)}")
    return sum(avgs, Fraction(0)) / len(avgs)


def estimate_Th(l_r: int, u_f: int, alpha: Fraction, T_b: int) -> int:
    return max(l_r, min(u_f, math.ceil(Fraction(alpha) * T_b)))


def padded_schedule(unit_plan, sd_target: ScaledDurations) -> list[int]:
    """Barrier times ``u_0 = 0, ..., u_T'`` of the wait-padded unit plan.

    Step n lasts as long as the slowest target-duration action starting at unit
    step n; a step with no starting action lasts one timestep.
    """
    starts = defaultdict(list)
    for a in unit_plan.actions:
        if a.d != 1:
            raise BoundError(f"unit plan holds an action of duration {a.d}: {a}")
        starts[a.ts].append(a)
    u = [0]
    for n in range(unit_plan.T):
        step = max(
            (sd_target.duration_of(a.template._replace(ts=u[-1])) for a in starts.get(n, ())),
            default=1,
        )
        u.append(u[-1] + step)
    return u


def upper_bound_uf(unit_plan, sd_target: ScaledDurations) -> int:
    return padded_schedule(unit_plan, sd_target)[-1]


def upper_bound_uc(T_prime: int, sd: ScaledDurations, Z: int | None = None) -> int:
    if sd.mode != "per_type" and Z is None:
        raise BoundError("height-dependent durations need the grid height Z")
    return T_prime * sd.max_duration(Z or 2)


def check_dominance(inst: Instance, coarse: ScaledDurations, target: ScaledDurations) -> list[str]:
    """Action types where the coarse mapping is not uniformly faster than the target."""
    lo = duration_extremes(inst, target)
    hi = duration_extremes(inst, coarse)
    return [
        f"{a.value}: coarse max {hi[a][1]} > target min {lo[a][0]}"
        for a in ACTION_TYPES
        if a in lo and a in hi and hi[a][1] > lo[a][0]
    ]


def lower_bound_lf(coarse_makespan: int, inst: Instance | None = None,
                   coarse: ScaledDurations | None = None,
                   target: ScaledDurations | None = None) -> int:
    if coarse is not None and target is not None:
        if inst is None:
            raise BoundError("dominance check needs the instance")
        bad = check_dominance(inst, coarse, target)
        if bad:
            raise BoundError("coarse mapping does not dominate: " + "; ".join(bad))
    return coarse_makespan
