"""Command-line interface: solve, simulate, report, serve."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import NetworkConfig, load_config, validate_config
from .milp import SolverOptions
from .planner import solve_plan
from .reporting import Role
from .simulate import compute_savings, simulate
from .store import RunStore


def _load(path: str) -> NetworkConfig:
    doc = json.loads(Path(path).read_text())
    report = validate_config(doc)
    if not report.ok:
        for v in report.violations:
            print(f"invalid config: {v.path}: {v.message}", file=sys.stderr)
        raise SystemExit(2)
    for note in report.advisories:
        print(f"note: {note}", file=sys.stderr)
    return NetworkConfig.from_doc(doc)


def cmd_solve(args) -> int:
    cfg = _load(args.config)
    opts = SolverOptions(rel_gap=args.gap, time_limit=args.time_limit,
                         seed=args.seed)
    plan, result = solve_plan(cfg, opts)
    series = simulate(cfg, plan)
    savings = compute_savings(series)
    out = {
        "plan": plan.to_doc(cfg),
        "solver": {"status": result.status, "objective": result.objective,
                   "best_bound": result.best_bound, "gap": result.gap,
                   "nodes": result.nodes, "wall_time": result.wall_time},
        "savings": {"total_units": savings.total_units,
                    "total_savings": savings.total_savings,
                    "weekly": savings.weekly},
    }
    text = json.dumps(out, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    print(f"status={result.status} objective={result.objective:.2f} "
          f"gap={result.gap:.4%} nodes={result.nodes} "
          f"wall={result.wall_time:.1f}s", file=sys.stderr)
    return 0


def cmd_simulate(args) -> int:
    cfg = _load(args.config)
    series = simulate(cfg)
    csv_text = series.to_csv_text()
    if args.out:
        Path(args.out).write_text(csv_text)
    else:
        sys.stdout.write(csv_text)
    return 0


def cmd_report(args) -> int:
    from .reporting import generate_report
    store = RunStore(args.data_dir)
    report = generate_report(store, args.run, Role.parse(args.role))
    text = report.to_text()
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text)
    return 0


def cmd_serve(args) -> int:
    import uvicorn
    from .service import create_app, default_service
    service = default_service(args.data_dir)
    app = create_app(service)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rebalance",
        description="Multi-site inventory rebalancing planner")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="optimize transfers for a scenario")
    p.add_argument("--config", required=True, help="scenario JSON path")
    p.add_argument("--out", help="write the plan JSON here (default stdout)")
    p.add_argument("--gap", type=float, default=1e-2,
                   help="relative optimality gap target")
    p.add_argument("--time-limit", type=float, default=300.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("simulate", help="project the no-transfer baseline")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="write ledger CSV here (default stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", help="render a narrative report for a run")
    p.add_argument("--run", required=True, help="run id")
    p.add_argument("--role", default="analyst",
                   choices=["analyst", "manager", "executive"])
    p.add_argument("--data-dir", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("serve", help="start the REST service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--data-dir", required=True)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
