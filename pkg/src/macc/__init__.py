"""Multi-agent collective construction with per-type action durations.

Builds and solves the time-expanded MILP for a target height map, with bounds
on the optimal makespan, a plan validator and an exhaustive oracle for tiny
instances.
"""

from .bounds import BoundReport, lower_bound_lr, upper_bound_uc, upper_bound_uf
from .catalog import Action, BlockAction, Catalog, build_catalog
from .durations import ONE_TWO, ONE_TWO_THREE, PRESETS, TERMES, UNIT, ActionType, DurationSpec, scale
from .instance import E1, E2, E3, Instance, load_instance, make_instance, parse_instance
from .model import build_model, export_model
from .oracle import brute_force_plan
from .plan import Plan, extract_itineraries, load_plan, parse_plan, serialize_plan
from .solve import SolverConfig, plan_lexicographic, solve_fixed_T
from .validate import pad_with_waits, validate_plan

__version__ = "0.1.0"

__all__ = [
    "Action", "ActionType", "BlockAction", "BoundReport", "Catalog", "DurationSpec", "E1", "E2", "E3",
    "Instance", "ONE_TWO", "ONE_TWO_THREE", "PRESETS", "Plan", "SolverConfig", "TERMES", "UNIT",
    "brute_force_plan", "build_catalog", "build_model", "export_model", "extract_itineraries",
    "load_instance", "load_plan", "lower_bound_lr", "make_instance", "pad_with_waits", "parse_instance",
    "parse_plan", "plan_lexicographic", "scale", "serialize_plan", "solve_fixed_T", "upper_bound_uc",
    "upper_bound_uf", "validate_plan",
]
