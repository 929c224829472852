"""Command-line entry point: plan, validate, bounds, sweep, oracle, render."""

from __future__ import annotations

import argparse
import itertools
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .bounds import (
    BoundReport, compute_alpha, estimate_Th, lower_bound_lf, lower_bound_lr,
    upper_bound_uc, upper_bound_uf,
)
from .catalog import build_catalog
from .durations import (
    CONFIGURABLE, UNIT, ActionType, DurationError, DurationSpec, parse_durations, parse_type, scale,
)
from .instance import E1, E2, E3, InstanceError, load_instance
from .oracle import MAX_HORIZON, OracleError, brute_force_plan
from .plan import Plan, PlanError, extract_itineraries, load_plan, write_plan
from .solve import SolverConfig, SolverError, plan_lexicographic
from .validate import validate_plan

log = logging.getLogger("macc")

BUILTIN = {"E1": E1, "E2": E2, "E3": E3}


class UsageError(Exception):
    pass


# --- input helpers -----------------------------------------------------------------


def read_instance(arg: str):
    if arg in BUILTIN:
        return BUILTIN[arg]
    if not Path(arg).is_file():
        raise UsageError(f"instance file not found: {arg}")
    return load_instance(arg)


def read_durations(arg: str | None) -> DurationSpec:
    """Preset name, path to a JSON file, or inline JSON."""
    if arg is None:
        return UNIT
    if Path(arg).is_file():
        return parse_durations(json.loads(Path(arg).read_text()))
    if arg.lstrip().startswith("{"):
        return parse_durations(json.loads(arg))
    return parse_durations(arg)


def solver_config(args) -> SolverConfig:
    return SolverConfig(command=args.solver_cmd, time_limit=args.time_limit, threads=args.threads)


def _emit(args, text: str, doc) -> None:
    if args.format == "json":
        print(json.dumps(doc, indent=2, default=str))
    else:
        print(text)


# --- plan ----------------------------------------------------------------------------

ROW_HEADER = f"{'instance':<10} {'durations':<12} {'lower bound':>11}  {'makespan (u_f; u_c)':<20} {'sum-of-costs':>12} {'agents':>6}"


def table_row(name: str, dur_name: str, p: Plan, b: BoundReport) -> str:
    span = f"{p.makespan} ({b.u_f}; {b.u_c})"
    return f"{name:<10} {dur_name:<12} {b.l_r:>11}  {span:<20} {p.sum_of_costs:>12} {p.agents_used():>6}"


def cmd_plan(args) -> int:
    inst = read_instance(args.instance)
    spec = read_durations(args.durations)
    sd = scale(spec)
    cfg = solver_config(args)
    unit_plan = load_plan(args.unit_plan) if args.unit_plan else None
    t0 = time.monotonic()
    res = plan_lexicographic(inst, sd, cfg, max_T=args.max_T, unit_plan=unit_plan,
                             on_attempt=lambda T, sol: log.info("T=%d %s (%.1fs)", T, sol.status, sol.seconds))
    elapsed = time.monotonic() - t0
    p = res.plan
    if args.out:
        write_plan(p, args.out)
    if args.dump_catalog:
        print(build_catalog(inst, sd, p.T).dump_counts(), file=sys.stderr)
    doc = {
        "instance": inst.name or args.instance,
        "durations": spec.name or spec.to_dict(),
        "makespan": p.makespan,
        "sum_of_costs": p.sum_of_costs,
        "agents_used": p.agents_used(),
        "bounds": res.bounds.to_dict(),
        "attempts": [{"T": T, "status": s, "seconds": round(sec, 3)} for T, s, sec in res.attempts],
        "seconds": round(elapsed, 3),
    }
    _emit(args, ROW_HEADER + "\n" + table_row(doc["instance"], spec.name or "custom", p, res.bounds), doc)
    return 0


# --- validate ------------------------------------------------------------------------


def cmd_validate(args) -> int:
    if not Path(args.plan).is_file():
        raise UsageError(f"plan file not found: {args.plan}")
    inst = read_instance(args.instance)
    p = load_plan(args.plan)
    if args.durations is not None:
        sd = scale(read_durations(args.durations))
    elif p.durations is not None:
        sd = p.durations
    else:
        sd = scale(UNIT)
    rep = validate_plan(inst, sd, p)
    if args.format == "json":
        print(rep.to_json())
    else:
        print(rep.to_text())
    return 0 if rep.ok else 1


# --- bounds --------------------------------------------------------------------------


def bound_report(inst, sd, unit_plan: Plan | None) -> BoundReport:
    rep = BoundReport(l_r=lower_bound_lr(inst, sd))
    if unit_plan is None:
        return rep
    T_b = unit_plan.T
    rep.T_b = T_b
    rep.l_f = lower_bound_lf(T_b, inst, scale(UNIT), sd)
    rep.u_f = upper_bound_uf(unit_plan, sd)
    rep.u_c = upper_bound_uc(T_b, sd, inst.Z)
    rep.alpha = compute_alpha(build_catalog(inst, sd, rep.u_f), allow_empty=True)
    rep.T_h = estimate_Th(rep.l_r, rep.u_f, rep.alpha, T_b)
    return rep


def cmd_bounds(args) -> int:
    inst = read_instance(args.instance)
    sd = scale(read_durations(args.durations))
    unit_plan = load_plan(args.unit_plan) if args.unit_plan else None
    rep = bound_report(inst, sd, unit_plan)
    lines = [f"{k:<6} {v}" for k, v in rep.to_dict().items() if v is not None]
    _emit(args, "\n".join(lines), rep.to_dict())
    return 0


# --- sweep ---------------------------------------------------------------------------

SWEEP_TYPES = tuple(a for a in CONFIGURABLE if a is not ActionType.LEAVE)


def parse_grid(text: str | None) -> dict[ActionType, list[Fraction]]:
    """``"entry=1,2 deliver=1,3"``; unlisted types are fixed at 1.

    The default varies every non-wait type except leave over {1, 2} (32 cells).
    """
    grid = {a: [Fraction(1)] for a in CONFIGURABLE}
    if text is None:
        for a in SWEEP_TYPES:
            grid[a] = [Fraction(1), Fraction(2)]
        return grid
    for part in text.replace(";", " ").split():
        if "=" not in part:
            raise UsageError(f"bad grid entry {part!r}; expected type=v1,v2")
        name, values = part.split("=", 1)
        kind = parse_type(name)
        if kind is ActionType.WAIT:
            raise UsageError("wait duration is fixed at 1")
        try:
            grid[kind] = sorted({Fraction(v) for v in values.split(",") if v})
        except ValueError:
            raise UsageError(f"bad duration value in {part!r}") from None
        if not grid[kind] or min(grid[kind]) <= 0:
            raise UsageError(f"durations must be positive in {part!r}")
    return grid


def grid_cells(grid) -> list[DurationSpec]:
    kinds = list(CONFIGURABLE)
    cells = []
    for combo in itertools.product(*(grid[a] for a in kinds)):
        name = "-".join(str(v) for v in combo)
        cells.append(DurationSpec.per_type(name=name, **{a.value: v for a, v in zip(kinds, combo)}))
    return cells


@dataclass
class SweepCell:
    durations: str
    T_b: int | None = None
    alpha: Fraction | None = None
    T_h: int | None = None
    l_r: int | None = None
    u_f: int | None = None
    makespan: int | None = None
    error: str | None = None
    seconds: float = 0.0

    @property
    def deviation(self) -> int | None:
        return None if self.makespan is None else self.T_h - self.makespan

    def sound(self) -> bool:
        return self.l_r <= self.makespan <= self.u_f and self.l_r <= self.T_h <= self.u_f


@dataclass
class SweepResult:
    cells: list[SweepCell] = field(default_factory=list)

    def solved(self) -> list[SweepCell]:
        return [c for c in self.cells if c.makespan is not None]

    @property
    def rmse(self) -> float:
        devs = [c.deviation for c in self.solved()]
        return math.sqrt(sum(d * d for d in devs) / len(devs)) if devs else float("nan")

    @property
    def max_relative_error(self) -> float:
        return max((abs(c.deviation) / c.makespan for c in self.solved()), default=float("nan"))

    def to_text(self) -> str:
        lines = [
            "durations: " + "-".join(a.value for a in CONFIGURABLE),
            f"{'durations':<14} {'T_b':>4} {'alpha':>8} {'T_h':>4} {'actual':>6} {'error':>6}  bounds",
        ]
        for c in self.cells:
            if c.error:
                lines.append(f"{c.durations:<14} failed: {c.error}")
                continue
            lines.append(
                f"{c.durations:<14} {c.T_b:>4} {str(c.alpha):>8} {c.T_h:>4} {c.makespan:>6} {c.deviation:>+6}"
                f"  [{c.l_r}, {c.u_f}]"
            )
        lines.append(f"cells: {len(self.solved())}/{len(self.cells)} solved")
        lines.append(f"RMSE: {self.rmse:.3f}")
        lines.append(f"max relative error: {self.max_relative_error:.3f}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "cells": [dict(vars(c), alpha=str(c.alpha) if c.alpha is not None else None) for c in self.cells],
            "rmse": self.rmse,
            "max_relative_error": self.max_relative_error,
        }


def _sweep_cell(inst, spec: DurationSpec, cfg: SolverConfig, unit_plan: Plan) -> SweepCell:
    cell = SweepCell(spec.name)
    t0 = time.monotonic()
    try:
        res = plan_lexicographic(inst, scale(spec), cfg, unit_plan=unit_plan)
        b = res.bounds
        cell.T_b, cell.alpha, cell.T_h, cell.l_r, cell.u_f = b.T_b, b.alpha, b.T_h, b.l_r, b.u_f
        cell.makespan = res.makespan
    except (SolverError, DurationError) as exc:
        cell.error = str(exc)
    cell.seconds = time.monotonic() - t0
    return cell


def run_sweep(inst, grid, cfg: SolverConfig, jobs: int = 1, unit_plan: Plan | None = None) -> SweepResult:
    """Solve every duration cell of the grid; failures are recorded per cell."""
    if unit_plan is None:
        unit_plan = plan_lexicographic(inst, scale(UNIT), cfg).plan
    cells = grid_cells(grid)
    if jobs <= 1:
        return SweepResult([_sweep_cell(inst, s, cfg, unit_plan) for s in cells])
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(_sweep_cell, inst, s, cfg, unit_plan) for s in cells]
        return SweepResult([f.result() for f in futures])


def cmd_sweep(args) -> int:
    inst = read_instance(args.instance)
    grid = parse_grid(args.grid)
    res = run_sweep(inst, grid, solver_config(args), args.jobs)
    _emit(args, res.to_text(), res.to_dict())
    return 0 if res.solved() else 1


# --- oracle --------------------------------------------------------------------------


def cmd_oracle(args) -> int:
    inst = read_instance(args.instance)
    sd = scale(read_durations(args.durations))
    res = brute_force_plan(inst, sd, args.t_max)
    if res is None:
        _emit(args, f"no plan within T_max={args.t_max}", {"makespan": None})
        return 1
    if args.out:
        write_plan(res.plan, args.out)
    doc = {"makespan": res.makespan, "sum_of_costs": res.sum_of_costs, "states": res.states_explored}
    _emit(args, f"makespan {res.makespan}\nsum-of-costs {res.sum_of_costs}\nstates {res.states_explored}", doc)
    return 0


# --- render --------------------------------------------------------------------------

GLYPH = {
    ActionType.ENTRY: "E",
    ActionType.LEAVE: "L",
    ActionType.MOVE_EMPTY: "m",
    ActionType.MOVE_BLOCK: "M",
    ActionType.PICK_UP: "P",
    ActionType.DELIVER: "D",
    ActionType.WAIT: "w",
}


def render_plan(p: Plan) -> str:
    """One lane per agent, one character per timestep ('.' = off the grid)."""
    its = extract_itineraries(p)
    out = [f"T={p.T} agents={len(its)} sum_of_costs={p.sum_of_costs}"]
    if not its:
        return out[0]
    ruler = "".join(str(t % 10) for t in range(p.T))
    out.append(f"{'t':>8} {ruler}")
    for it in its:
        lane = ["."] * p.T
        for a in it.actions:
            for t in range(a.ts, min(a.te, p.T)):
                lane[t] = GLYPH[a.action_type]
        out.append(f"agent {it.agent:<2} {''.join(lane)}")
    return "\n".join(out)


def cmd_render(args) -> int:
    if not Path(args.plan).is_file():
        raise UsageError(f"plan file not found: {args.plan}")
    print(render_plan(load_plan(args.plan)))
    return 0


# --- argument parsing ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="macc", description="Collective construction planner with per-type action durations.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, durations=True):
        p.add_argument("--instance", required=True, help="instance JSON file, or E1 / E2 / E3")
        if durations:
            p.add_argument("--durations", help="preset name (1, 1-2, 1-2-3, termes, height_linear), JSON file or inline JSON")
        p.add_argument("--format", choices=("text", "json"), default="text")

    def solver(p):
        p.add_argument("--solver-cmd", help="command template with {model} {solution} {time_limit} {threads}; {cbc} is the located CBC binary")
        p.add_argument("--time-limit", type=float, default=600.0, help="seconds per solver call")
        p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("plan", help="optimal plan: makespan first, then sum-of-costs")
    common(p)
    solver(p)
    p.add_argument("--out", help="write the plan file here")
    p.add_argument("--unit-plan", help="reuse a unit-duration plan file instead of solving it")
    p.add_argument("--max-T", type=int, default=64)
    p.add_argument("--dump-catalog", action="store_true", help="print action counts per type to stderr")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("validate", help="check a plan file against the world rules")
    common(p)
    p.add_argument("--plan", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("bounds", help="makespan bounds and the alpha estimate")
    common(p)
    p.add_argument("--unit-plan", help="unit-duration plan file (enables T_b, l_f, u_f, u_c, alpha)")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("sweep", help="estimate error of T_h over a grid of duration sets")
    common(p, durations=False)
    solver(p)
    p.add_argument("--grid", help='e.g. "entry=1,2 deliver=1,2"; default varies all but leave over {1,2}')
    p.add_argument("--jobs", type=int, default=max(1, min(4, os.cpu_count() or 1)))
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", help="exhaustive optimal planner for tiny instances")
    common(p)
    p.add_argument("--t-max", type=int, default=MAX_HORIZON)
    p.add_argument("--out", help="write the witness plan here")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("render", help="ASCII timeline of a plan file")
    p.add_argument("--plan", required=True)
    p.set_defaults(func=cmd_render)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        ap.error(str(exc))
    except (InstanceError, DurationError, PlanError, OracleError, SolverError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
