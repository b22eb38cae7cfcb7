import numpy as np
import pytest

from rebalance.lp import NumericBreakdownError, solve_lp
from rebalance.model import MilpInstance, build_model
from rebalance.config import NetworkConfig

from conftest import random_scenario, tiny_doc
import random


def make_lp(n, lo, hi, c, rows, sense="max"):
    inst = MilpInstance(
        n_cols=n, lower=np.array(lo, float), upper=np.array(hi, float),
        is_integer=np.zeros(n, dtype=bool), objective=np.array(c, float),
        col_names=[f"x{i}" for i in range(n)],
        row_cols=[], row_coefs=[], row_rels=[], row_rhs=[], row_labels=[],
        sense=sense)
    for k, (cols, coefs, rel, rhs) in enumerate(rows):
        inst.add_row(cols, coefs, rel, rhs, f"r{k}")
    return inst


def test_textbook_maximum():
    inst = make_lp(2, [0, 0], [10, 10], [1, 1],
                   [([0], [1], "<=", 2), ([1], [1], "<=", 3)])
    res = solve_lp(inst)
    assert res.status == "Optimal"
    assert res.objective == pytest.approx(5.0, abs=1e-9)
    assert res.x.tolist() == pytest.approx([2.0, 3.0])


def test_contradictory_bounds_infeasible_with_certificate():
    inst = make_lp(1, [0], [5], [1], [([0], [1], "<=", -1)])
    res = solve_lp(inst)
    assert res.status == "Infeasible"
    assert res.certificate is not None
    # the certificate's implied inequality is unsatisfiable over the box
    lam = res.certificate
    g = lam[0] * 1.0
    box_min = g * 0 if g > 0 else g * 5
    assert box_min > lam[0] * (-1) + 1e-12


def test_relaxation_bounds_milp_optimum():
    cfg = NetworkConfig.from_doc(tiny_doc())
    inst, _ = build_model(cfg)
    res = solve_lp(inst)
    assert res.status == "Optimal"
    assert res.objective >= -1.0 - 1e-9


def test_strong_duality_on_random_lps():
    rng = random.Random(99)
    nprng = np.random.default_rng(99)
    checked = 0
    trial = 0
    while checked < 20:
        trial += 1
        n, m = int(nprng.integers(2, 9)), int(nprng.integers(1, 9))
        lo = nprng.integers(-5, 1, n).astype(float)
        hi = lo + nprng.integers(0, 12, n)
        c = nprng.integers(-10, 11, n).astype(float)
        rows = []
        rels = ["<=", ">=", "="]
        for i in range(m):
            coefs = nprng.integers(-4, 5, n).astype(float)
            rows.append((list(range(n)), coefs, rels[int(nprng.integers(0, 3))],
                         float(nprng.integers(-10, 30))))
        res = solve_lp(make_lp(n, lo, hi, c, rows))
        if res.status != "Optimal":
            continue
        assert abs(res.objective - res.dual_objective) <= 1e-8 * max(
            1.0, abs(res.objective))
        assert res.max_row_violation <= 1e-8
        assert res.max_bound_violation <= 1e-8
        assert res.max_comp_slack <= 1e-6 * max(1.0, abs(res.objective))
        checked += 1
    assert checked == 20


def test_bound_overrides_shrink_feasible_box():
    inst = make_lp(2, [0, 0], [10, 10], [1, 1],
                   [([0, 1], [1, 1], "<=", 8)])
    res = solve_lp(inst, lower=np.array([2.0, 2.0]), upper=np.array([3.0, 3.0]))
    assert res.objective == pytest.approx(6.0)


def test_minimize_sense():
    inst = make_lp(2, [0, 0], [9, 9], [1, 1],
                   [([0, 1], [1, 1], ">=", 2)], sense="min")
    res = solve_lp(inst)
    assert res.objective == pytest.approx(2.0)
    assert abs(res.objective - res.dual_objective) < 1e-8


def test_iteration_cap_raises_numeric_breakdown():
    cfg = NetworkConfig.from_doc(tiny_doc())
    inst, _ = build_model(cfg)
    with pytest.raises(NumericBreakdownError):
        solve_lp(inst, max_iters=1)


def test_fixture_relaxation_health():
    from rebalance.fixture import fixture_config
    inst, _ = build_model(fixture_config())
    res = solve_lp(inst)
    assert res.status == "Optimal"
    assert abs(res.objective - res.dual_objective) <= 1e-8 * max(1.0, abs(res.objective))
    assert res.max_row_violation <= 1e-8
    assert res.max_comp_slack <= 1e-6 * max(1.0, abs(res.objective))
