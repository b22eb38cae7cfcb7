"""Role-aware narrative reports via a staged context-engineering pipeline.

The pipeline assembles a static template from the scenario, specializes it
for a role and request, verifies the engineered context with a reflection
checklist, gathers the run's data at the role's aggregation level, and
renders the three-section report.  The deterministic renderer is the default
and the fallback; an optional external text-generation client can take over
the final wording, with its output validated against the same structural
rules.  Field names in report text carry **highlight** markers.
"""

from __future__ import annotations

import enum
import json
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .config import NetworkConfig

HIGHLIGHT_FIELDS = ("Source_Site", "Destination_Site", "sim_Inv", "Inventory",
                    "Transfer_In", "Transfer_Out", "InvCost", "sim_InvCost",
                    "Sim_WOS", "WOS", "Demand", "Forecast")

INGREDIENT_GROUPS = ("few_shot_examples", "model_summary", "kpi_definitions",
                     "transfer_rationale", "io_metadata")

SECTION_TITLES = ("Transfer Rationale", "Cost & Performance Analysis",
                  "Weeks of Supply (WOS) Impact")

MAX_REVISIONS = 2


class ReportError(ValueError):
    pass


class Role(enum.Enum):
    ANALYST = "analyst"
    MANAGER = "manager"
    EXECUTIVE = "executive"

    @property
    def aggregation(self) -> str:
        return _ROLE_LEVELS[self]

    @classmethod
    def parse(cls, value) -> "Role":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ReportError(f"unknown role {value!r}") from None


_ROLE_LEVELS = {Role.ANALYST: "item", Role.MANAGER: "family",
                Role.EXECUTIVE: "region"}


@dataclass(frozen=True)
class CeTemplate:
    few_shot_examples: tuple
    model_summary: str
    kpi_definitions: dict
    transfer_rationale: str
    io_metadata: dict
    formatting_rules: tuple

    def missing_groups(self) -> list[str]:
        missing = [name for name in INGREDIENT_GROUPS if not getattr(self, name)]
        if not self.formatting_rules:
            missing.append("formatting_rules")
        return missing


@dataclass(frozen=True)
class ReportRequest:
    run_id: str
    metrics: tuple = ()
    sites: tuple = ()
    weeks: tuple = ()      # empty means the full horizon


@dataclass(frozen=True)
class EngineeredContext:
    role: Role
    request: ReportRequest
    template: CeTemplate
    text: str
    manifest: tuple        # data series the request needs


@dataclass(frozen=True)
class ReflectionVerdict:
    passed: bool
    missing: tuple
    revisions: int = 0


@dataclass(frozen=True)
class ReportData:
    run_id: str
    role: Role
    weeks: tuple
    destinations: tuple          # sites with baseline stockouts
    sources: tuple               # sites shipping anywhere in the plan
    lanes: tuple                 # (src, dst, week, qty)
    weekly: tuple                # savings rows {week, units, savings}
    total_units: float
    total_savings: float
    peak_demand: tuple           # (site, week, units) over destinations
    wos_rows: tuple              # aggregation-level rows for the WOS table
    final_wos: dict              # site -> (pre, post) at the last week


@dataclass(frozen=True)
class NarrativeReport:
    run_id: str
    role: Role
    mode: str                    # "deterministic" | "external-model"
    sections: tuple              # exactly three, in order
    warnings: tuple = ()

    @property
    def data_rows(self) -> int:
        """Data rows in the report tables; the role hierarchy shrinks this."""
        count = 0
        for section in self.sections:
            for line in section.splitlines():
                if line.startswith("|"):
                    head = line.strip("| ").split("|")[0].strip()
                    if head not in ("week", "scope", "---"):
                        count += 1
        return count

    def to_text(self) -> str:
        parts = []
        for n, (title, body) in enumerate(zip(SECTION_TITLES, self.sections), 1):
            parts.append(f"## {n}. {title}\n\n{body.strip()}\n")
        if self.warnings:
            parts.append("\n".join(f"> warning: {w}" for w in self.warnings) + "\n")
        return "\n".join(parts)


@dataclass(frozen=True)
class ExternalClientConfig:
    """LLM1 writes, LLM2 verifies; the two must differ."""

    endpoint: str
    api_key: str = ""
    generator_model: str = "generator"
    verifier_model: str = "verifier"
    timeout: float = 30.0

    def __post_init__(self):
        if self.generator_model == self.verifier_model:
            raise ReportError(
                "external generator and verifier models must differ "
                f"(both {self.generator_model!r})")

    @classmethod
    def from_env(cls, env=os.environ):
        endpoint = env.get("REBALANCE_LLM_ENDPOINT", "")
        if not endpoint:
            return None
        return cls(
            endpoint=endpoint,
            api_key=env.get("REBALANCE_LLM_API_KEY", ""),
            generator_model=env.get("REBALANCE_LLM_GENERATOR", "generator"),
            verifier_model=env.get("REBALANCE_LLM_VERIFIER", "verifier"),
            timeout=float(env.get("REBALANCE_LLM_TIMEOUT", "30")))


def highlight(name: str) -> str:
    return f"**{name}**"


def build_static_template(cfg: NetworkConfig, model=None) -> CeTemplate:
    """Assemble the static context template from the scenario itself."""
    n_lanes = cfg.n_sites * (cfg.n_sites - 1)
    if model is None:
        from .model import build_model
        model = build_model(cfg)
    inst, _ = model
    families: dict[str, int] = {}
    for label in inst.row_labels:
        families[label.split(":", 1)[0]] = families.get(label.split(":", 1)[0], 0) + 1
    family_text = ", ".join(f"{k} x{v}" for k, v in sorted(families.items()))
    summary = (
        f"Transfer optimization over {cfg.n_sites} sites and {cfg.n_weeks} weeks "
        f"with {n_lanes} transfer lanes"
        + (" (zero transfer lanes: single-site network)" if n_lanes == 0 else "")
        + f"; the first {cfg.frozen_weeks} weeks are frozen. "
        f"Decisions: lane quantities, receiver activation, origin fixed-cost "
        f"flags, and per-site inventory split into backlog, safety-stock and "
        f"excess parts. Constraint rows: {family_text}. Minimum shipment "
        f"quantity {_num(cfg.min_ship_qty)} units; shipping origins pay a "
        f"fixed weekly cost.")
    kpi = {
        "WOS": (f"{highlight('WOS')}: positive {highlight('Inventory')} divided "
                f"by mean {highlight('Demand')} over the next {cfg.wos_window} "
                f"weeks (window truncated at the horizon; 999 when no demand "
                f"remains). {highlight('Sim_WOS')} applies the same formula to "
                f"{highlight('sim_Inv')}."),
        "InvCost": (f"{highlight('InvCost')}: holding rate times positive "
                    f"{highlight('Inventory')} plus shortage penalty times "
                    f"backlog, per site-week."),
        "sim_InvCost": (f"{highlight('sim_InvCost')}: the same cost formula "
                        f"on the no-transfer path {highlight('sim_Inv')}."),
        "savings": (f"Savings: {highlight('sim_InvCost')} minus "
                    f"{highlight('InvCost')}, counted only where positive."),
    }
    few_shot = (
        ("Q: Which sites are at risk next month?\n"
         f"A: Sites whose {highlight('sim_Inv')} turns negative, listed with "
         f"the first week of shortfall and its depth in units."),
        ("Q: Did the plan pay off?\n"
         f"A: Compare {highlight('sim_InvCost')} against {highlight('InvCost')} "
         f"over the weeks with transfers and report the positive difference "
         f"as savings."),
    )
    rationale = (
        f"Justify each transfer by the receiving site's projected shortfall "
        f"({highlight('sim_Inv')} below zero) and the sending site's remaining "
        f"cover; connect shortfalls to elevated {highlight('Demand')} or "
        f"{highlight('Forecast')} values.")
    io_meta = {
        "input": {"run_id": "string", "metrics": "list of KPI names",
                  "sites": "subset of sites or empty for all",
                  "weeks": "subset of the horizon or empty for all"},
        "output": {"sections": list(SECTION_TITLES),
                   "fields": list(HIGHLIGHT_FIELDS)},
    }
    rules = (
        "only weeks with non-zero transfers appear in the weekly table",
        "cost savings are reported only when sim_InvCost exceeds InvCost",
        "field names are wrapped in ** highlight markers",
        "exactly three sections, fixed order",
    )
    return CeTemplate(few_shot, summary, kpi, rationale, io_meta, rules)


def render_template_text(template: CeTemplate, role: Role | None = None,
                         request: ReportRequest | None = None) -> str:
    parts = []
    if role is not None:
        parts.append(f"[role] {role.value} (aggregation: {role.aggregation})")
    if request is not None:
        parts.append(f"[request] {json.dumps(request.__dict__, default=list, sort_keys=True)}")
    parts.append("[few_shot_examples]\n" + "\n---\n".join(template.few_shot_examples))
    parts.append("[model_summary]\n" + template.model_summary)
    parts.append("[kpi_definitions]\n" + "\n".join(
        template.kpi_definitions[k] for k in sorted(template.kpi_definitions)))
    parts.append("[transfer_rationale]\n" + template.transfer_rationale)
    parts.append("[io_metadata]\n" + json.dumps(template.io_metadata, sort_keys=True))
    parts.append("[formatting_rules]\n" + "\n".join(template.formatting_rules))
    return "\n\n".join(parts)


def specialize(template: CeTemplate, role, request: ReportRequest,
               store) -> EngineeredContext:
    """Adapt the static template to a role and a structured request."""
    role = Role.parse(role)
    record = store.get_run(request.run_id)   # raises on unknown run
    cfg = record.cfg
    sites = request.sites or tuple(cfg.sites)
    for s in sites:
        if s not in cfg.sites:
            raise ReportError(f"request references unknown site {s}")
    weeks = request.weeks or tuple(cfg.weeks)
    request = replace(request, sites=tuple(sites), weeks=tuple(weeks))

    if role is Role.ANALYST:
        manifest = tuple(("series", s) for s in sites)
    elif role is Role.MANAGER:
        families = sorted(set(cfg.families.values()) or {"all-items"})
        manifest = tuple(("family_series", f) for f in families)
    else:
        regions = sorted(set(cfg.regions.values()) or {"network"})
        manifest = tuple(("region_series", r) for r in regions)
    manifest += (("savings",), ("stockouts", role.aggregation), ("transfers",))
    text = render_template_text(template, role, request)
    return EngineeredContext(role, request, template, text, manifest)


def reflect(context: EngineeredContext,
            revisions: int = 0) -> ReflectionVerdict:
    """Deterministic completeness checklist over the engineered context."""
    missing = []
    if not isinstance(context.role, Role):
        missing.append("role")
    missing.extend(context.template.missing_groups())
    for group in INGREDIENT_GROUPS + ("formatting_rules",):
        if f"[{group}]" not in context.text:
            if group not in missing:
                missing.append(group)
    if not context.manifest:
        missing.append("manifest")
    return ReflectionVerdict(passed=not missing, missing=tuple(missing),
                             revisions=revisions)


def gather_data(context: EngineeredContext, store) -> ReportData:
    """Pull the run's series and KPIs, aggregated to the role's level."""
    record = store.get_run(context.request.run_id)
    cfg, series = record.cfg, record.series
    savings = record.savings
    role = context.role

    baseline_neg = [
        (cfg.sites[i], cfg.weeks[t], -float(series.sim_inv[i, t]))
        for i in range(cfg.n_sites) for t in range(cfg.n_weeks)
        if series.sim_inv[i, t] < 0]
    destinations = tuple(sorted({s for s, _, _ in baseline_neg}))
    sources = tuple(sorted({src for src, _, _, _ in record.lanes}))

    peak = ("", None, 0.0)
    for site, _, _ in baseline_neg:
        i = cfg.site_index(site)
        t = int(np.argmax(cfg.demand[i]))
        if cfg.demand[i, t] > peak[2]:
            peak = (site, cfg.weeks[t], float(cfg.demand[i, t]))

    wos_rows = _wos_rows(cfg, series, role)
    final_wos = {}
    for i, s in enumerate(cfg.sites):
        # last week whose forward demand window is non-empty
        t = cfg.n_weeks - 1
        while t > 0 and (series.wos[i, t] == 999.0
                         and series.sim_wos[i, t] == 999.0):
            t -= 1
        final_wos[s] = (float(series.sim_wos[i, t]), float(series.wos[i, t]))
    return ReportData(
        run_id=context.request.run_id, role=role, weeks=tuple(cfg.weeks),
        destinations=destinations, sources=sources,
        lanes=tuple(record.lanes), weekly=tuple(savings.weekly),
        total_units=savings.total_units, total_savings=savings.total_savings,
        peak_demand=peak, wos_rows=tuple(wos_rows), final_wos=final_wos)


def _wos_rows(cfg, series, role: Role):
    """WOS table rows at the role's aggregation level.

    Analysts get site-weeks, managers family-weeks, executives one row per
    region, so row counts shrink up the hierarchy.
    """
    rows = []
    if role is Role.ANALYST:
        for i, site in enumerate(cfg.sites):
            for t, week in enumerate(cfg.weeks):
                rows.append((site, week, series.sim_wos[i, t], series.wos[i, t]))
    elif role is Role.MANAGER:
        families = sorted(set(cfg.families.values()) or {"all-items"})
        for fam in families:
            for t, week in enumerate(cfg.weeks):
                rows.append((fam, week,
                             float(np.mean(series.sim_wos[:, t])),
                             float(np.mean(series.wos[:, t]))))
    else:
        groups: dict[str, list[int]] = {}
        for i, site in enumerate(cfg.sites):
            groups.setdefault(cfg.regions.get(site, "network"), []).append(i)
        for region in sorted(groups):
            idx = groups[region]
            rows.append((region, "all",
                         float(np.mean(series.sim_wos[idx, :])),
                         float(np.mean(series.wos[idx, :]))))
    return rows


def _num(v: float) -> str:
    f = float(v)
    return f"{int(f):,}" if f.is_integer() else f"{f:,.2f}"


def render_report(data: ReportData, role=None) -> NarrativeReport:
    """Deterministic three-section report; byte-stable for identical input."""
    role = Role.parse(role) if role is not None else data.role

    # section 1: transfer rationale
    s1 = []
    if data.destinations:
        dest_list = ", ".join(data.destinations)
        s1.append(
            f"Projected stockouts: {highlight('sim_Inv')} falls below zero at "
            f"{highlight('Destination_Site')} {dest_list} on the no-transfer "
            f"path.")
        if data.peak_demand[1] is not None:
            site, week, units = data.peak_demand
            s1.append(
                f"The shortfall tracks elevated {highlight('Demand')} and "
                f"{highlight('Forecast')} values; {site} peaks at "
                f"{_num(units)} units in week {week}.")
    else:
        s1.append(
            f"No site shows a projected stockout: {highlight('sim_Inv')} "
            f"stays non-negative across the horizon.")
    if data.sources:
        src_list = ", ".join(data.sources)
        s1.append(
            f"{highlight('Source_Site')} {src_list} provided inventory "
            f"through transfers ({highlight('Transfer_Out')}), resolving the "
            f"projected shortfalls while retaining their own cover.")
        lane_bits = [f"{src}->{dst} in week {week} ({_num(qty)}u)"
                     for src, dst, week, qty in data.lanes]
        s1.append("Planned moves: " + "; ".join(lane_bits) + ".")
    else:
        s1.append("The plan moves no inventory; no transfers were justified.")

    # section 2: cost and performance
    s2 = [
        f"Transfers replace shortage penalties ({highlight('sim_InvCost')}) "
        f"with standard holding costs ({highlight('InvCost')}).",
        f"Totals: {_num(data.total_units)} units moved, "
        f"{_num(data.total_savings)} saved.",
    ]
    table = ["| week | units moved | savings |", "| --- | --- | --- |"]
    for row in data.weekly:
        if row["units"] <= 0:
            continue
        saving = row["savings"]
        cell = _num(saving) if saving > 0 else "none"
        table.append(f"| {row['week']} | {_num(row['units'])} | {cell} |")
    s2.append("\n".join(table))

    # section 3: WOS impact
    s3 = [
        f"Pre-transfer {highlight('Sim_WOS')} versus post-transfer "
        f"{highlight('WOS')} at the {role.aggregation} level:",
    ]
    wtable = ["| scope | week | Sim_WOS | WOS |", "| --- | --- | --- | --- |"]
    for scope, week, pre, post in data.wos_rows:
        wtable.append(f"| {scope} | {week} | {pre:.2f} | {post:.2f} |")
    s3.append("\n".join(wtable))
    for site in data.destinations:
        pre, post = data.final_wos.get(site, (0.0, 0.0))
        s3.append(
            f"{site}: final-week {highlight('WOS')} moved from {pre:.2f} "
            f"to {post:.2f}, restoring positive cover at the destination.")
    srcs = [s for s in data.sources if s not in data.destinations]
    if srcs:
        s3.append(
            f"Sending sites {', '.join(srcs)} give up part of their "
            f"{highlight('WOS')} headroom without creating new stockouts.")

    return NarrativeReport(
        run_id=data.run_id, role=role, mode="deterministic",
        sections=("\n\n".join(s1), "\n\n".join(s2), "\n\n".join(s3)))


def validate_report_text(text: str, data: ReportData) -> list[str]:
    """Structural rules an externally generated report must satisfy."""
    problems = []
    pos = -1
    for n, title in enumerate(SECTION_TITLES, 1):
        nxt = text.find(title)
        if nxt < 0:
            problems.append(f"missing section {n}: {title}")
        elif nxt < pos:
            problems.append(f"section {n} out of order")
        else:
            pos = nxt
    transfer_weeks = {str(r["week"]) for r in data.weekly if r["units"] > 0}
    for line in text.splitlines():
        if line.startswith("|") and line.count("|") >= 3:
            cells = [c.strip() for c in line.strip("|").split("|")]
            if cells and cells[0] and cells[0] not in ("week", "---", "scope"):
                week = cells[0] if len(cells) == 3 else (
                    cells[1] if len(cells) > 1 else "")
                if len(cells) == 3 and week and week not in transfer_weeks:
                    problems.append(f"weekly table lists week {cells[0]} "
                                    f"without transfers")
    if "**" not in text:
        problems.append("no highlighted field names")
    return problems


def external_generate(context: EngineeredContext, data: ReportData,
                      client) -> NarrativeReport:
    """Ask the external client for the report text; fall back on any failure."""
    fallback = render_report(data, context.role)
    payload = {
        "system": f"model={getattr(client, 'generator_model', 'external')}",
        "context": context.text,
        "data": {
            "run_id": data.run_id,
            "destinations": list(data.destinations),
            "sources": list(data.sources),
            "lanes": [list(l) for l in data.lanes],
            "weekly": list(data.weekly),
            "total_units": data.total_units,
            "total_savings": data.total_savings,
        },
    }
    try:
        text = client(payload)
    except Exception as exc:
        return replace(fallback, warnings=(f"external client failed: {exc}",))
    problems = validate_report_text(text or "", data)
    if problems:
        return replace(fallback, warnings=(
            "external response rejected: " + "; ".join(problems),))
    sections = _split_sections(text)
    return NarrativeReport(run_id=data.run_id, role=context.role,
                           mode="external-model", sections=sections)


def _split_sections(text: str) -> tuple:
    marks = [text.find(t) for t in SECTION_TITLES]
    bodies = []
    for k, start in enumerate(marks):
        end = marks[k + 1] if k + 1 < len(marks) else len(text)
        bodies.append(text[start:end].strip())
    return tuple(bodies)


class HttpTextClient:
    """POSTs {system, context, data} to an endpoint, expects plain text."""

    def __init__(self, config: ExternalClientConfig):
        self.config = config
        self.generator_model = config.generator_model

    def __call__(self, payload: dict) -> str:
        import httpx
        headers = {}
        if self.config.api_key:
            headers["Authorization"] = f"Bearer {self.config.api_key}"
        payload = dict(payload)
        payload["model"] = self.config.generator_model
        payload["verifier_model"] = self.config.verifier_model
        resp = httpx.post(self.config.endpoint, json=payload,
                          headers=headers, timeout=self.config.timeout)
        resp.raise_for_status()
        return resp.text


def generate_report(store, run_id: str, role, client=None,
                    template: CeTemplate | None = None) -> NarrativeReport:
    """Run the full pipeline for a finished run.

    Specialization is retried at most twice when reflection fails; a still-
    failing verdict is surfaced as an error since it means the template is
    structurally incomplete.
    """
    role = Role.parse(role)
    record = store.get_run(run_id)
    if template is None:
        template = build_static_template(record.cfg)
    request = ReportRequest(run_id=run_id)
    context = specialize(template, role, request, store)
    verdict = reflect(context)
    revisions = 0
    while not verdict.passed and revisions < MAX_REVISIONS:
        revisions += 1
        context = specialize(template, role, request, store)
        verdict = reflect(context, revisions=revisions)
    if not verdict.passed:
        raise ReportError(
            f"context incomplete after {revisions} revisions: "
            f"{', '.join(verdict.missing)}")
    data = gather_data(context, store)
    if client is not None:
        return external_generate(context, data, client)
    return render_report(data, role)
