"""Shared fixtures: the expensive solves run once per session."""

from __future__ import annotations

import random
import time

import numpy as np
import pytest

from rebalance.config import NetworkConfig
from rebalance.fixture import fixture_config
from rebalance.milp import SolverOptions, brute_force_milp, solve_milp
from rebalance.model import build_model, extract_solution
from rebalance.planner import plan_options, solve_plan


def tiny_doc(**overrides):
    """Two sites, two weeks: site A runs dry in week 2, B holds the stock."""
    doc = {
        "sites": ["A", "B"], "items": ["IT"], "horizon": [1, 2],
        "frozen_weeks": 0,
        "parameters": {
            "demand": {"A": {"1": 0, "2": 10}, "B": 0},
            "receipts": 0,
            "initial_inventory": {"A": 0, "B": 12},
            "safety_stock": 0, "ss_benefit": 0,
            "shortage_penalty": 10, "fixed_ship_cost": 1, "min_ship_qty": 5,
        },
        "kpi": {"holding_rate": 0, "wos_window": 2},
        "roles": {"regions": {"A": "east", "B": "west"},
                  "families": {"IT": "stuff"}},
    }
    doc.update(overrides)
    return doc


def random_scenario(rng: random.Random, n_sites: int, n_weeks: int) -> NetworkConfig:
    """Integer-valued scenario with parameters drawn from [0, 20]."""
    sites = [f"S{i}" for i in range(n_sites)]
    weeks = list(range(1, n_weeks + 1))
    ri = lambda: rng.randint(0, 20)
    table = lambda: {s: {str(w): ri() for w in weeks} for s in sites}
    doc = {
        "sites": sites, "items": ["I1"], "horizon": weeks,
        "frozen_weeks": rng.randint(0, min(1, n_weeks)),
        "parameters": {
            "demand": table(), "receipts": table(),
            "initial_inventory": {s: ri() for s in sites},
            "safety_stock": table(), "ss_benefit": table(),
            "shortage_penalty": table(), "fixed_ship_cost": table(),
            "min_ship_qty": ri(),
        },
        "kpi": {"holding_rate": 1, "wos_window": 2},
        "roles": {},
    }
    return NetworkConfig.from_doc(doc)


ORACLE_SIZES = [(1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (3, 1)]


@pytest.fixture(scope="session")
def oracle_sweep():
    """50 random small instances solved by both routes, with timing."""
    rng = random.Random(20260810)
    results = []
    t0 = time.perf_counter()
    for trial in range(50):
        n_sites, n_weeks = ORACLE_SIZES[trial % len(ORACLE_SIZES)]
        cfg = random_scenario(rng, n_sites, n_weeks)
        model = build_model(cfg)
        bb = solve_milp(model[0], plan_options(cfg, SolverOptions(seed=trial)))
        oracle = brute_force_milp(model[0])
        results.append((cfg, model, bb, oracle))
    elapsed = time.perf_counter() - t0
    return results, elapsed


@pytest.fixture(scope="session")
def fixture_solution():
    """The bundled five-site scenario solved once for the whole session."""
    cfg = fixture_config()
    model = build_model(cfg)
    t0 = time.perf_counter()
    plan, result = solve_plan(cfg, SolverOptions(rel_gap=1e-2, time_limit=120,
                                                 seed=0), model=model)
    elapsed = time.perf_counter() - t0
    return cfg, model, plan, result, elapsed
