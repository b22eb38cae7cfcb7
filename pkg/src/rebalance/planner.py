"""High-level entry point: scenario in, canonical transfer plan out."""

from __future__ import annotations

from .config import NetworkConfig
from .milp import MilpResult, SolverOptions, solve_milp
from .model import PlanSolution, build_model, extract_solution, tighten_big_m

_STATUS_WITH_SOLUTION = {"Optimal", "FeasibleWithGap", "TimeLimit"}


def plan_options(cfg: NetworkConfig, opts: SolverOptions | None = None) -> SolverOptions:
    """Tune generic solver options to the scenario's scale.

    Plunges should only force a lane open when its relaxed flow already
    clears the minimum shipment quantity, so the dive threshold is the
    minimum quantity expressed as a fraction of the activation bound.
    """
    opts = opts or SolverOptions()
    big_m = float(tighten_big_m(cfg).max(initial=0.0))
    if cfg.min_ship_qty > 0 and big_m > 0:
        opts.dive_up_threshold = min(0.5, cfg.min_ship_qty / big_m)
    return opts


def solve_plan(cfg: NetworkConfig, opts: SolverOptions | None = None,
               model=None) -> tuple[PlanSolution, MilpResult]:
    """Build, solve, and extract; raises if the model admits no plan."""
    if model is None:
        model = build_model(cfg)
    inst, vm = model
    result = solve_milp(inst, plan_options(cfg, opts))
    if result.status not in _STATUS_WITH_SOLUTION or result.x is None:
        raise RuntimeError(f"no plan available: solver status {result.status}")
    stats = {"nodes": result.nodes, "lp_solves": result.lp_solves,
             "wall_time": result.wall_time}
    plan = extract_solution(cfg, result.x, model=model, status=result.status,
                            gap=result.gap, stats=stats)
    return plan, result
