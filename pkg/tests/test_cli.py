import json

import pytest

from rebalance.cli import main
from rebalance.store import RunRecord, RunStore, config_hash
from rebalance.simulate import compute_savings, simulate
from rebalance.config import NetworkConfig

from conftest import tiny_doc


@pytest.fixture()
def config_path(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(tiny_doc()))
    return path


def test_solve_writes_plan(tmp_path, config_path, capsys):
    out = tmp_path / "plan.json"
    rc = main(["solve", "--config", str(config_path), "--out", str(out),
               "--gap", "0.01", "--time-limit", "30"])
    assert rc == 0
    doc = json.loads(out.read_text())
    assert doc["solver"]["status"] == "Optimal"
    assert doc["plan"]["objective"] == pytest.approx(-1.0, abs=1e-6)
    assert doc["savings"]["total_units"] >= 10


def test_simulate_prints_csv(config_path, capsys):
    rc = main(["simulate", "--config", str(config_path)])
    assert rc == 0
    out = capsys.readouterr().out
    lines = out.strip().splitlines()
    assert lines[0].startswith("site,week,demand")
    assert len(lines) == 1 + 2 * 2


def test_invalid_config_exits_nonzero(tmp_path, capsys):
    doc = tiny_doc()
    doc["parameters"]["min_ship_qty"] = -2
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(SystemExit):
        main(["simulate", "--config", str(path)])


def test_report_command(tmp_path, capsys):
    store = RunStore(tmp_path)
    doc = tiny_doc()
    cfg = NetworkConfig.from_doc(doc)
    transfers = {"B": {"A": {"1": 10}}}
    series = simulate(cfg, transfers)
    savings = compute_savings(series)
    store.save(RunRecord(
        run_id="r1", created="2026-08-10T00:00:00Z", config_doc=doc,
        config_hash=config_hash(doc), options_doc={}, status="Optimal",
        plan_doc={"transfers": transfers, "objective": -1.0, "gap": 0.0},
        total_units=savings.total_units, total_savings=savings.total_savings))
    rc = main(["report", "--run", "r1", "--role", "executive",
               "--data-dir", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "Transfer Rationale" in out
    assert "Weeks of Supply (WOS) Impact" in out
