import numpy as np
import pytest

from rebalance.config import NetworkConfig
from rebalance.lp import solve_lp
from rebalance.milp import (OracleGuardError, SolverOptions, brute_force_milp,
                            solve_milp)
from rebalance.model import build_model

from conftest import tiny_doc


@pytest.fixture(scope="module")
def tiny_model():
    cfg = NetworkConfig.from_doc(tiny_doc())
    return cfg, build_model(cfg)


def test_no_integer_columns_matches_lp(tiny_model):
    cfg, (inst, vm) = tiny_model
    relaxed = build_model(cfg)[0]
    relaxed.is_integer[:] = False
    res = solve_milp(relaxed)
    lp = solve_lp(relaxed)
    assert res.status == "Optimal"
    assert res.objective == pytest.approx(lp.objective, abs=1e-9)
    assert res.nodes == 1


def test_two_site_example_exact(tiny_model):
    cfg, (inst, vm) = tiny_model
    res = solve_milp(inst, SolverOptions(seed=1))
    assert res.status == "Optimal"
    assert res.objective == pytest.approx(-1.0, abs=1e-6)
    x = res.x
    weeks_with_flow = set()
    for vi in vm.by_col:
        if vi.kind == "X" and x[vi.col] > 1e-6:
            assert vi.src_site == "B" and vi.dst_site == "A"
            assert x[vi.col] >= 10 - 1e-6
            weeks_with_flow.add(vi.week)
    assert len(weeks_with_flow) == 1
    z_on = [vi for vi in vm.by_col
            if vi.kind == "Z" and x[vi.col] > 0.5]
    assert len(z_on) == 1 and z_on[0].src_site == "B"


def test_brute_force_matches_on_example(tiny_model):
    cfg, (inst, vm) = tiny_model
    res = brute_force_milp(inst)
    assert res.status == "Optimal"
    assert res.objective == pytest.approx(-1.0, abs=1e-6)


def test_brute_force_zero_binaries_single_lp(tiny_model):
    cfg, _ = tiny_model
    inst = build_model(cfg)[0]
    inst.is_integer[:] = False
    res = brute_force_milp(inst)
    assert res.lp_solves == 1
    assert res.objective == pytest.approx(solve_lp(inst).objective, abs=1e-9)


def test_brute_force_guard():
    from rebalance.fixture import fixture_config
    inst, _ = build_model(fixture_config())
    with pytest.raises(OracleGuardError):
        brute_force_milp(inst)


def test_injected_infeasible_row(tiny_model):
    cfg, _ = tiny_model
    inst, _ = build_model(cfg)
    inst.add_row([0], [1.0], "<=", -1.0, "forced-infeasible")
    inst._lp_cache = None
    assert brute_force_milp(inst).status == "Infeasible"
    assert solve_milp(inst).status == "Infeasible"


def test_determinism_same_seed(tiny_model):
    cfg, (inst, _) = tiny_model
    r1 = solve_milp(inst, SolverOptions(seed=7))
    r2 = solve_milp(inst, SolverOptions(seed=7))
    assert r1.nodes == r2.nodes
    assert r1.objective == r2.objective
    assert np.array_equal(r1.x, r2.x)


def test_bound_monotone_and_incumbent_feasible(tiny_model):
    cfg, (inst, _) = tiny_model
    res = solve_milp(inst, SolverOptions(seed=3))
    finite = [b for b in res.bound_history if np.isfinite(b)]
    for earlier, later in zip(finite, finite[1:]):
        assert later <= earlier + 1e-6
    assert res.best_bound >= res.objective - 1e-9
    assert inst.check_point(res.x, tol=1e-6, int_aware=True) == []
    ints = np.nonzero(inst.is_integer)[0]
    assert np.abs(res.x[ints] - np.round(res.x[ints])).max() <= 1e-6


def test_options_validation():
    with pytest.raises(ValueError):
        SolverOptions(rel_gap=-1).validate()
    with pytest.raises(ValueError):
        SolverOptions(time_limit=0).validate()
    with pytest.raises(ValueError):
        SolverOptions(branch_rule="magic").validate()
    SolverOptions().validate()


def test_time_limit_status():
    from rebalance.fixture import fixture_config
    inst, _ = build_model(fixture_config())
    res = solve_milp(inst, SolverOptions(time_limit=1, seed=0))
    assert res.status == "TimeLimit"


def test_depth_first_search_also_solves(tiny_model):
    cfg, (inst, _) = tiny_model
    res = solve_milp(inst, SolverOptions(search="depth-first", seed=2))
    assert res.objective == pytest.approx(-1.0, abs=1e-6)


def test_pseudo_cost_branching_matches_oracle(tiny_model):
    import random
    from conftest import random_scenario
    cfg, (inst, _) = tiny_model
    res = solve_milp(inst, SolverOptions(branch_rule="pseudo-cost", seed=4))
    assert res.objective == pytest.approx(-1.0, abs=1e-6)
    rng = random.Random(77)
    for trial in range(6):
        rcfg = random_scenario(rng, 2, 2)
        rinst, _ = build_model(rcfg)
        bb = solve_milp(rinst, SolverOptions(branch_rule="pseudo-cost",
                                             seed=trial))
        oracle = brute_force_milp(rinst)
        assert abs(bb.objective - oracle.objective) <= 1e-6


def test_debug_dump_cross_checks_with_independent_solver(tiny_model):
    """The plain-text instance format lets a third-party solver verify us."""
    import random
    from scipy.optimize import Bounds, LinearConstraint, milp as scipy_milp
    from rebalance.model import MilpInstance
    from conftest import random_scenario

    def solve_with_scipy(inst):
        a = inst.dense_matrix()
        lower = np.full(inst.n_rows, -np.inf)
        upper = np.full(inst.n_rows, np.inf)
        for r in range(inst.n_rows):
            rel, rhs = inst.row_rels[r], inst.row_rhs[r]
            if rel in ("<=", "="):
                upper[r] = rhs
            if rel in (">=", "="):
                lower[r] = rhs
        res = scipy_milp(
            c=-inst.objective,     # scipy minimizes
            constraints=LinearConstraint(a, lower, upper),
            integrality=inst.is_integer.astype(int),
            bounds=Bounds(inst.lower, inst.upper))
        assert res.status == 0, res.message
        return -res.fun

    cfg, (inst, _) = tiny_model
    parsed = MilpInstance.parse(inst.dump())
    ours = solve_milp(parsed, SolverOptions(seed=0)).objective
    theirs = solve_with_scipy(parsed)
    assert ours == pytest.approx(theirs, abs=1e-6)

    rng = random.Random(31)
    for trial in range(5):
        rcfg = random_scenario(rng, 2, 2)
        rinst, _ = build_model(rcfg)
        rparsed = MilpInstance.parse(rinst.dump())
        ours = solve_milp(rparsed, SolverOptions(seed=trial)).objective
        assert ours == pytest.approx(solve_with_scipy(rparsed), abs=1e-6)


def test_canonical_extraction_preserves_objective(tiny_model):
    """With positive benefit and penalty rates everywhere, canonical
    re-decomposition must not move the objective."""
    from rebalance.model import extract_solution
    doc = tiny_doc()
    doc["parameters"]["safety_stock"] = 3
    doc["parameters"]["ss_benefit"] = 2
    cfg = NetworkConfig.from_doc(doc)
    inst, vm = build_model(cfg)
    res = solve_milp(inst, SolverOptions(seed=0))
    plan = extract_solution(cfg, res.x, model=(inst, vm))
    assert plan.objective == pytest.approx(res.objective, abs=1e-6)
