"""Multi-site inventory rebalancing toolkit.

Builds and exactly solves a weekly transfer optimization over a network of
distribution centers, simulates the no-transfer baseline, computes the KPI
layer (WOS, holding/shortage costs, savings), and renders role-aware
narrative reports.  A REST service and CLI expose the full pipeline.
"""

from .config import (
    ConfigError,
    NetworkConfig,
    ValidationReport,
    Violation,
    validate_config,
)
from .model import (
    MilpInstance,
    PlanSolution,
    VarIndex,
    build_model,
    canonical_decompose,
    extract_solution,
    tighten_big_m,
)
from .lp import LpResult, solve_lp
from .milp import MilpResult, SolverOptions, brute_force_milp, solve_milp
from .simulate import (
    LedgerSeries,
    StockoutEvent,
    compute_costs,
    compute_savings,
    compute_wos,
    detect_stockouts,
    simulate,
)
from .fixture import fixture_config, fixture_doc
from .planner import plan_options, solve_plan
from .reporting import (
    CeTemplate,
    EngineeredContext,
    ExternalClientConfig,
    NarrativeReport,
    ReflectionVerdict,
    ReportRequest,
    Role,
    build_static_template,
    external_generate,
    gather_data,
    generate_report,
    reflect,
    render_report,
    specialize,
)

__all__ = [
    "ConfigError",
    "NetworkConfig",
    "ValidationReport",
    "Violation",
    "validate_config",
    "MilpInstance",
    "PlanSolution",
    "VarIndex",
    "build_model",
    "canonical_decompose",
    "extract_solution",
    "tighten_big_m",
    "LpResult",
    "solve_lp",
    "MilpResult",
    "SolverOptions",
    "brute_force_milp",
    "solve_milp",
    "LedgerSeries",
    "StockoutEvent",
    "simulate",
    "compute_wos",
    "compute_costs",
    "compute_savings",
    "detect_stockouts",
    "fixture_config",
    "fixture_doc",
    "plan_options",
    "solve_plan",
    "Role",
    "CeTemplate",
    "ReportRequest",
    "EngineeredContext",
    "ReflectionVerdict",
    "NarrativeReport",
    "ExternalClientConfig",
    "build_static_template",
    "specialize",
    "reflect",
    "gather_data",
    "render_report",
    "external_generate",
    "generate_report",
]

__version__ = "0.1.0"
