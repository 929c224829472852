"""External MILP solver driver and the makespan-first outer loop."""

from __future__ import annotations

import importlib.util
import logging
import os
import shlex
import shutil
import subprocess
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

from .bounds import (
    BoundReport, compute_alpha, estimate_Th, lower_bound_lf, lower_bound_lr,
    upper_bound_uc, upper_bound_uf,
)
from .catalog import MIN_HORIZON, Action, BlockAction, build_catalog
from .durations import UNIT, DurationSpec, ScaledDurations, scale
from .instance import Instance
from .model import MilpModel, build_model, export_model
from .plan import Plan

log = logging.getLogger(__name__)

OPTIMAL, INFEASIBLE, TIMEOUT = "optimal", "infeasible", "timeout"

CBC_TEMPLATE = "{cbc} {model} sec {time_limit} threads {threads} solve solu {solution}"


class SolverError(RuntimeError):
    pass


class SolverIntegrityError(SolverError):
    """The rounded solver assignment violates a model row."""


class SolveTimeout(SolverError):
    pass


def find_cbc() -> str | None:
    """Locate a CBC binary: $MACC_CBC, PATH, then the copy bundled with PuLP."""
    env = os.environ.get("MACC_CBC")
    if env:
        return env
    on_path = shutil.which("cbc")
    if on_path:
        return on_path
    spec = importlib.util.find_spec("pulp")
    if spec and spec.submodule_search_locations:
        root = Path(list(spec.submodule_search_locations)[0]) / "solverdir" / "cbc"
        for sub in ("linux/i64", "linux/arm64", "osx/i64", "win/i64"):
            exe = root / sub / ("cbc.exe" if sub.startswith("win") else "cbc")
            if exe.exists():
                return str(exe)
    return None


@dataclass
class SolverConfig:
    command: str | None = None  # template with {model} {solution} {time_limit} {threads}
    time_limit: float = 600.0
    threads: int = 1
    round_threshold: float = 0.5
    keep_dir: str | None = None  # keep model/solution files here

    def __post_init__(self):
        if self.time_limit <= 0:
            raise ValueError("time limit must be positive")

    def argv(self, model: Path, solution: Path) -> list[str]:
        template = self.command
        cbc = None
        if template is None or "{cbc}" in template:
            cbc = find_cbc()
            if cbc is None:
                raise SolverError("no CBC executable found (set MACC_CBC or install cbc / pulp)")
            template = template or CBC_TEMPLATE
        fields_ = {
            "cbc": cbc or "",
            "model": str(model),
            "solution": str(solution),
            "time_limit": f"{self.time_limit:g}",
            "threads": str(self.threads),
        }
        return [part.format(**fields_) for part in shlex.split(template)]


@dataclass
class Solution:
    status: str
    T: int
    objective: int | None = None
    actions: list[Action] = field(default_factory=list)
    block_actions: list[BlockAction] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def parse_cbc_solution(text: str, names: list[str]) -> tuple[str, float | None, dict[str, float]]:
    """Read CBC's ``solu`` output: a status line then ``index name value [reduced cost]``."""
    lines = text.splitlines()
    if not lines:
        raise SolverError("empty solution file")
    head = lines[0].strip()
    low = head.lower()
    if low.startswith("optimal"):
        status = OPTIMAL
    elif "infeasible" in low:
        status = INFEASIBLE
    elif low.startswith("stopped") or "time" in low:
        status = TIMEOUT
    else:
        raise SolverError(f"unrecognised solver status: {head!r}")
    objective = None
    if "objective value" in low:
        try:
            objective = float(head.rsplit(None, 1)[-1])
        except ValueError:
            pass
    known = set(names)
    values = {}
    for ln in lines[1:]:
        parts = ln.split()
        if not parts:
            continue
        if parts[0] == "**":  # CBC marks infeasible rows/columns this way
            parts = parts[1:]
        if len(parts) < 3:
            raise SolverError(f"unparsable solution line: {ln!r}")
        name, val = parts[1], parts[2]
        if name not in known:
            continue  # row activities are also listed by some CBC builds
        try:
            values[name] = float(val)
        except ValueError:
            raise SolverError(f"unparsable value in line: {ln!r}") from None
    return status, objective, values


def round_solution(model: MilpModel, values: dict[str, float], threshold: float = 0.5) -> list[int]:
    return [1 if values.get(n, 0.0) >= threshold else 0 for n in model.names]


def run_solver(model: MilpModel, cfg: SolverConfig) -> tuple[str, float | None, dict[str, float], float]:
    tmp = None
    if cfg.keep_dir:
        work = Path(cfg.keep_dir)
        work.mkdir(parents=True, exist_ok=True)
    else:
        tmp = tempfile.TemporaryDirectory(prefix="macc-")
        work = Path(tmp.name)
    try:
        model_path = work / f"model_T{model.catalog.T}.lp"
        sol_path = work / f"model_T{model.catalog.T}.sol"
        model_path.write_text(export_model(model), encoding="utf-8")
        if sol_path.exists():
            sol_path.unlink()
        argv = cfg.argv(model_path, sol_path)
        log.debug("running %s", " ".join(argv))
        t0 = time.monotonic()
        try:
            proc = subprocess.run(argv, capture_output=True, text=True, timeout=cfg.time_limit + 60)
        except FileNotFoundError:
            raise SolverError(f"solver executable not found: {argv[0]}") from None
        except subprocess.TimeoutExpired:
            return TIMEOUT, None, {}, time.monotonic() - t0
        elapsed = time.monotonic() - t0
        if not sol_path.exists():
            raise SolverError(
                f"solver wrote no solution file (exit {proc.returncode}): {proc.stdout[-500:]}{proc.stderr[-500:]}"
            )
        status, obj, values = parse_cbc_solution(sol_path.read_text(), model.names)
        return status, obj, values, elapsed
    finally:
        if tmp is not None:
            tmp.cleanup()


def solve_model(model: MilpModel, cfg: SolverConfig) -> Solution:
    cat = model.catalog
    status, obj, values, elapsed = run_solver(model, cfg)
    if status != OPTIMAL:
        return Solution(status, cat.T, seconds=elapsed)
    x = round_solution(model, values, cfg.round_threshold)
    broken = model.violated(x)
    if broken:
        names = ", ".join(c.name for c in broken[:5])
        raise SolverIntegrityError(f"rounded solution violates {len(broken)} row(s): {names}")
    total = model.objective_value(x)
    if obj is not None and abs(obj - total) > 1e-6 * max(1.0, abs(total)):
        raise SolverIntegrityError(f"solver objective {obj} differs from recomputed {total}")
    n_r = model.n_r
    actions = [cat.actions[i] for i in range(n_r) if x[i]]
    blocks = [cat.block_actions[j - n_r] for j in range(n_r, model.n_vars) if x[j]]
    return Solution(OPTIMAL, cat.T, total, actions, blocks, elapsed)


def solve_fixed_T(inst: Instance, sd: ScaledDurations, T: int, cfg: SolverConfig | None = None) -> Solution:
    cfg = cfg or SolverConfig()
    cat = build_catalog(inst, sd, T)
    return solve_model(build_model(inst, cat), cfg)


@dataclass
class LexResult:
    plan: Plan
    bounds: BoundReport
    attempts: list[tuple[int, str, float]]  # (T, status, seconds)
    unit_plan: Plan | None = None

    @property
    def makespan(self) -> int:
        return self.plan.T

    @property
    def sum_of_costs(self) -> int:
        return self.plan.sum_of_costs


def _as_scaled(sd) -> ScaledDurations:
    return scale(sd) if isinstance(sd, DurationSpec) else sd


def minimize_makespan(inst: Instance, sd: ScaledDurations, cfg: SolverConfig, start: int, cap: int,
                      on_attempt=None):
    """Solve T = start, start+1, ... until the first proven-feasible horizon."""
    attempts = []
    for T in range(max(start, MIN_HORIZON), cap + 1):
        sol = solve_fixed_T(inst, sd, T, cfg)
        attempts.append((T, sol.status, sol.seconds))
        if on_attempt:
            on_attempt(T, sol)
        if sol.status == OPTIMAL:
            return sol, attempts
        if sol.status == TIMEOUT:
            raise SolveTimeout(f"solver hit the time limit at T={T}; infeasibility not proven")
    raise SolverError(f"no feasible horizon up to the iteration cap T={cap}")


def plan_lexicographic(inst: Instance, sd, cfg: SolverConfig | None = None, max_T: int = 64,
                       unit_plan: Plan | None = None, on_attempt=None) -> LexResult:
    """Optimal makespan first, then optimal sum-of-costs at that makespan.

    For non-unit durations the unit-duration problem is solved first; its plan
    gives T_b, l_f, u_f, u_c, alpha and T_h, and u_c + 1 caps the search.
    """
    cfg = cfg or SolverConfig()
    sd = _as_scaled(sd)
    l_r = lower_bound_lr(inst, sd)
    report = BoundReport(l_r=l_r)

    if sd.is_unit:
        sol, attempts = minimize_makespan(inst, sd, cfg, l_r, max_T, on_attempt)
        T = sol.T
        report.T_b = report.l_f = report.u_f = report.u_c = T
        cat = build_catalog(inst, sd, T)
        report.alpha = compute_alpha(cat)
        report.T_h = estimate_Th(l_r, T, report.alpha, T)
        plan = Plan(T, sol.actions, sol.block_actions, sd, report)
        return LexResult(plan, report, attempts, plan)

    unit_sd = scale(UNIT)
    if unit_plan is None:
        unit_plan = plan_lexicographic(inst, unit_sd, cfg, max_T, on_attempt=on_attempt).plan
    T_b = unit_plan.T
    report.T_b = T_b
    report.l_f = lower_bound_lf(T_b, inst, unit_sd, sd)
    report.u_f = upper_bound_uf(unit_plan, sd)
    report.u_c = upper_bound_uc(T_b, sd, inst.Z)
    report.alpha = compute_alpha(build_catalog(inst, sd, report.u_f), allow_empty=True)
    report.T_h = estimate_Th(l_r, report.u_f, report.alpha, T_b)

    sol, attempts = minimize_makespan(inst, sd, cfg, l_r, report.u_c + 1, on_attempt)
    plan = Plan(sol.T, sol.actions, sol.block_actions, sd, report)
    return LexResult(plan, report, attempts, unit_plan)
