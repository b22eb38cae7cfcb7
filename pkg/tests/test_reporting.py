import numpy as np
import pytest

from rebalance.config import NetworkConfig
from rebalance.fixture import fixture_config, fixture_doc
from rebalance.reporting import (ExternalClientConfig, ReportError,
                                 ReportRequest, Role, build_static_template,
                                 external_generate, gather_data,
                                 generate_report, reflect, render_report,
                                 specialize, validate_report_text)
from rebalance.store import RunRecord, RunStore, config_hash
from rebalance.simulate import compute_savings, simulate

from conftest import tiny_doc


def make_record(store, doc, transfers, run_id="run-1", status="Optimal"):
    cfg = NetworkConfig.from_doc(doc)
    series = simulate(cfg, transfers or None)
    savings = compute_savings(series)
    record = RunRecord(
        run_id=run_id, created="2026-08-10T00:00:00Z", config_doc=doc,
        config_hash=config_hash(doc), options_doc={}, status=status,
        plan_doc={"transfers": transfers or {}, "objective": 0.0, "gap": 0.0},
        total_units=savings.total_units, total_savings=savings.total_savings)
    store.save(record)
    return record


@pytest.fixture()
def tiny_store(tmp_path):
    store = RunStore(tmp_path)
    make_record(store, tiny_doc(), {"B": {"A": {"1": 10}}})
    return store


@pytest.fixture(scope="module")
def fixture_store(tmp_path_factory, fixture_solution):
    cfg, model, plan, result, elapsed = fixture_solution
    store = RunStore(tmp_path_factory.mktemp("runs"))
    transfers = {}
    for src, dst, week, qty in plan.lanes(cfg):
        transfers.setdefault(src, {}).setdefault(dst, {})[str(week)] = qty
    record = RunRecord(
        run_id="fixture-run", created="2026-08-10T00:00:00Z",
        config_doc=fixture_doc(), config_hash=config_hash(fixture_doc()),
        options_doc={}, status=plan.status,
        plan_doc=plan.to_doc(cfg),
        total_units=compute_savings(simulate(cfg, plan)).total_units,
        total_savings=compute_savings(simulate(cfg, plan)).total_savings)
    store.save(record)
    return store


def test_template_ingredient_groups_present():
    for doc in (tiny_doc(), fixture_doc()):
        template = build_static_template(NetworkConfig.from_doc(doc))
        assert template.missing_groups() == []


def test_single_site_template_mentions_zero_lanes():
    doc = {
        "sites": ["A"], "items": ["I"], "horizon": [1], "frozen_weeks": 0,
        "parameters": {"demand": 0, "initial_inventory": 1, "safety_stock": 0,
                       "ss_benefit": 0, "shortage_penalty": 0,
                       "fixed_ship_cost": 0, "min_ship_qty": 0},
        "kpi": {"holding_rate": 0, "wos_window": 1}, "roles": {},
    }
    template = build_static_template(NetworkConfig.from_doc(doc))
    assert "zero transfer lanes" in template.model_summary


def test_fixture_template_defines_wos_window():
    template = build_static_template(fixture_config())
    assert "next 4 weeks" in template.kpi_definitions["WOS"]


def test_specialize_levels_and_defaults(tiny_store):
    template = build_static_template(NetworkConfig.from_doc(tiny_doc()))
    request = ReportRequest(run_id="run-1")
    analyst = specialize(template, "analyst", request, tiny_store)
    executive = specialize(template, Role.EXECUTIVE, request, tiny_store)
    assert ("series", "A") in analyst.manifest
    assert ("series", "B") in analyst.manifest
    assert ("region_series", "east") in executive.manifest
    assert ("region_series", "west") in executive.manifest
    assert ("stockouts", "region") in executive.manifest
    # empty week range defaults to the full horizon
    assert analyst.request.weeks == (1, 2)


def test_specialize_unknown_run_and_role(tiny_store):
    template = build_static_template(NetworkConfig.from_doc(tiny_doc()))
    with pytest.raises(KeyError):
        specialize(template, "analyst", ReportRequest(run_id="nope"), tiny_store)
    with pytest.raises(ReportError):
        specialize(template, "wizard", ReportRequest(run_id="run-1"), tiny_store)


def test_reflect_pass_and_missing_group(tiny_store):
    template = build_static_template(NetworkConfig.from_doc(tiny_doc()))
    context = specialize(template, "analyst", ReportRequest(run_id="run-1"),
                         tiny_store)
    verdict = reflect(context)
    assert verdict.passed and verdict.missing == ()
    import dataclasses
    broken_template = dataclasses.replace(template, kpi_definitions={})
    broken = specialize(broken_template, "analyst",
                        ReportRequest(run_id="run-1"), tiny_store)
    verdict = reflect(broken)
    assert not verdict.passed
    assert "kpi_definitions" in verdict.missing


def test_generator_verifier_must_differ():
    with pytest.raises(ReportError):
        ExternalClientConfig(endpoint="http://x", generator_model="m",
                             verifier_model="m")
    cfg = ExternalClientConfig(endpoint="http://x")
    assert cfg.generator_model != cfg.verifier_model


def test_gather_row_counts_by_role(fixture_store):
    template = build_static_template(fixture_config())
    request = ReportRequest(run_id="fixture-run")
    analyst = gather_data(specialize(template, "analyst", request,
                                     fixture_store), fixture_store)
    executive = gather_data(specialize(template, "executive", request,
                                       fixture_store), fixture_store)
    manager = gather_data(specialize(template, "manager", request,
                                     fixture_store), fixture_store)
    assert len(analyst.wos_rows) == 5 * 9
    assert len(manager.wos_rows) == 1 * 9       # one item family
    assert len(executive.wos_rows) == 2         # two regions
    assert analyst.destinations == ("DC1",)


def test_gather_empty_plan(tiny_store):
    make_record(tiny_store, tiny_doc(), {}, run_id="empty-run")
    template = build_static_template(NetworkConfig.from_doc(tiny_doc()))
    data = gather_data(specialize(template, "analyst",
                                  ReportRequest(run_id="empty-run"),
                                  tiny_store), tiny_store)
    assert data.lanes == ()
    report = render_report(data)
    assert "| week | units moved | savings |" in report.sections[1]
    data_lines = [ln for ln in report.sections[1].splitlines()
                  if ln.startswith("|") and "week" not in ln and "---" not in ln]
    assert data_lines == []                     # weekly table is empty
    assert "0 units moved" in report.sections[1]


def test_fixture_report_names_sources_and_totals(fixture_store, fixture_solution):
    cfg, model, plan, result, _ = fixture_solution
    report_data = gather_data(
        specialize(build_static_template(cfg), "analyst",
                   ReportRequest(run_id="fixture-run"), fixture_store),
        fixture_store)
    report = render_report(report_data)
    s1 = report.sections[0]
    assert "DC1" in s1
    for src in ("DC2", "DC3", "DC4", "DC5"):
        assert src in s1
    total_units = plan.transfers.sum()
    assert report_data.total_units == pytest.approx(total_units)
    assert f"{int(round(total_units)):,}" in report.sections[1]


def test_report_rules_and_determinism(fixture_store):
    store = fixture_store
    record = store.get_run("fixture-run")
    template = build_static_template(record.cfg)
    request = ReportRequest(run_id="fixture-run")
    context = specialize(template, "analyst", request, store)
    data = gather_data(context, store)
    r1 = render_report(data)
    r2 = render_report(gather_data(context, store))
    assert r1.to_text() == r2.to_text()          # byte-stable
    assert len(r1.sections) == 3
    # weekly table excludes zero-transfer weeks
    moved = record.series.transfer_in.sum(axis=0)
    zero_weeks = {str(w) for w, m in zip(record.cfg.weeks, moved) if m == 0}
    for line in r1.sections[1].splitlines():
        if line.startswith("|") and "week" not in line and "---" not in line:
            week = line.strip("|").split("|")[0].strip()
            assert week not in zero_weeks
    # savings rows satisfy sim cost > cost for that week
    for row in data.weekly:
        if row["savings"] > 0:
            t = record.cfg.week_index(row["week"])
            assert record.series.sim_inv_cost[:, t].sum() > \
                record.series.inv_cost[:, t].sum()


def test_role_monotonicity(fixture_store):
    rows = {}
    for role in ("analyst", "manager", "executive"):
        report = generate_report(fixture_store, "fixture-run", role)
        rows[role] = report.data_rows
    assert rows["executive"] <= rows["manager"] <= rows["analyst"]
    assert rows["executive"] < rows["analyst"]


def test_external_client_fallback_paths(tiny_store):
    def unreachable(payload):
        raise ConnectionError("no route to host")

    def two_sections(payload):
        return ("## 1. Transfer Rationale\nstuff\n"
                "## 2. Cost & Performance Analysis\nstuff **WOS**")

    seen_payloads = []

    def well_formed(payload):
        seen_payloads.append(payload)
        return ("Transfer Rationale\nalpha **sim_Inv**\n"
                "Cost & Performance Analysis\nbeta **InvCost**\n"
                "| week | units moved | savings |\n| --- | --- | --- |\n"
                "| 1 | 10 | 100 |\n"
                "Weeks of Supply (WOS) Impact\ngamma **WOS**")

    report = generate_report(tiny_store, "run-1", "analyst", client=unreachable)
    assert report.mode == "deterministic"
    assert report.warnings and "failed" in report.warnings[0]

    report = generate_report(tiny_store, "run-1", "analyst", client=two_sections)
    assert report.mode == "deterministic"
    assert "rejected" in report.warnings[0]

    report = generate_report(tiny_store, "run-1", "analyst", client=well_formed)
    assert report.mode == "external-model"
    assert len(report.sections) == 3
    # the external contract: system text, context text, data payload
    assert set(seen_payloads[0]) >= {"system", "context", "data"}
    assert "[kpi_definitions]" in seen_payloads[0]["context"]


def test_external_config_from_env():
    from rebalance.reporting import ExternalClientConfig
    assert ExternalClientConfig.from_env(env={}) is None
    cfg = ExternalClientConfig.from_env(env={
        "REBALANCE_LLM_ENDPOINT": "http://llm.internal/generate",
        "REBALANCE_LLM_API_KEY": "k",
        "REBALANCE_LLM_GENERATOR": "m-large",
        "REBALANCE_LLM_VERIFIER": "m-small",
        "REBALANCE_LLM_TIMEOUT": "12",
    })
    assert cfg is not None
    assert cfg.timeout == 12.0
    assert cfg.generator_model != cfg.verifier_model


def test_external_validation_catches_phantom_weeks(tiny_store):
    record = tiny_store.get_run("run-1")
    template = build_static_template(record.cfg)
    context = specialize(template, "analyst", ReportRequest(run_id="run-1"),
                         tiny_store)
    data = gather_data(context, tiny_store)
    bad_text = ("Transfer Rationale\nx\nCost & Performance Analysis\n"
                "| week | units moved | savings |\n| --- | --- | --- |\n"
                "| 2 | 5 | 1 |\n"
                "Weeks of Supply (WOS) Impact\n**WOS**")
    problems = validate_report_text(bad_text, data)
    assert any("without transfers" in p for p in problems)


def test_pipeline_generate_report(tiny_store):
    report = generate_report(tiny_store, "run-1", "manager")
    assert report.role is Role.MANAGER
    assert report.mode == "deterministic"
    text = report.to_text()
    assert text.index("Transfer Rationale") < text.index(
        "Cost & Performance Analysis") < text.index("Weeks of Supply")
