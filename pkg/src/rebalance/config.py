"""Network configuration: the single source of truth for a planning scenario.

A scenario is described by a human-readable JSON document with top-level keys
``sites``, ``items``, ``horizon``, ``frozen_weeks``, ``parameters``, ``kpi``
and ``roles``.  Parameter tables are keyed site -> week; scalars and per-site
values broadcast.  ``validate_config`` checks a raw document and returns
structured violations; ``NetworkConfig.from_doc`` converts a valid document
into an array-backed object the optimizer and simulator consume.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from numbers import Real
from pathlib import Path

import numpy as np

# parameter tables keyed site -> week
TABLE_PARAMS = ("demand", "receipts", "safety_stock", "ss_benefit",
                "shortage_penalty", "fixed_ship_cost")
# parameters keyed by site only
SITE_PARAMS = ("initial_inventory",)

DEFAULT_WOS_WINDOW = 4
DEFAULT_FROZEN_WEEKS = 3


class ConfigError(ValueError):
    """Raised when a document fails validation during parsing."""

    def __init__(self, report: "ValidationReport"):
        self.report = report
        lines = "; ".join(f"{v.path}: {v.message}" for v in report.violations)
        super().__init__(f"invalid configuration: {lines}")


@dataclass(frozen=True)
class Violation:
    path: str
    message: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)
    advisories: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, path: str, message: str) -> None:
        self.violations.append(Violation(path, message))


@dataclass(frozen=True)
class NetworkConfig:
    """Array-backed scenario: all tables indexed [site, week] in declared order."""

    sites: tuple[str, ...]
    items: tuple[str, ...]
    weeks: tuple          # week labels as given (ints or strings)
    frozen_weeks: int
    demand: np.ndarray            # (n_sites, n_weeks)
    receipts: np.ndarray          # (n_sites, n_weeks)
    initial_inventory: np.ndarray  # (n_sites,)
    safety_stock: np.ndarray      # (n_sites, n_weeks)
    ss_benefit: np.ndarray        # (n_sites, n_weeks)
    shortage_penalty: np.ndarray  # (n_sites, n_weeks)
    fixed_ship_cost: np.ndarray   # (n_sites, n_weeks)
    min_ship_qty: float
    holding_rate: np.ndarray      # (n_sites,)
    wos_window: int
    regions: dict[str, str]       # site -> region label
    families: dict[str, str]      # item -> family label

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def n_weeks(self) -> int:
        return len(self.weeks)

    def site_index(self, site: str) -> int:
        return self.sites.index(site)

    def week_index(self, week) -> int:
        try:
            return self.weeks.index(week)
        except ValueError:
            # JSON object keys are strings; accept the string form of a label
            labels = [str(w) for w in self.weeks]
            return labels.index(str(week))

    @classmethod
    def from_doc(cls, doc: dict) -> "NetworkConfig":
        report = validate_config(doc)
        if not report.ok:
            raise ConfigError(report)
        sites = tuple(doc["sites"])
        items = tuple(doc.get("items") or ["ITEM-1"])
        weeks = tuple(doc["horizon"])
        params = doc.get("parameters", {})
        kpi = doc.get("kpi", {})
        roles = doc.get("roles", {})

        def table(name, default=0.0):
            return _expand_table(params.get(name, default), sites, weeks)

        demand = table("demand")
        receipts = table("receipts")
        safety = table("safety_stock")
        benefit = table("ss_benefit")
        penalty = table("shortage_penalty")
        ship_cost = table("fixed_ship_cost")
        init = _expand_site_vector(params.get("initial_inventory", 0.0), sites)
        hold = _expand_site_vector(kpi.get("holding_rate", 0.0), sites)
        return cls(
            sites=sites,
            items=items,
            weeks=weeks,
            frozen_weeks=int(doc.get("frozen_weeks", DEFAULT_FROZEN_WEEKS)),
            demand=demand,
            receipts=receipts,
            initial_inventory=init,
            safety_stock=safety,
            ss_benefit=benefit,
            shortage_penalty=penalty,
            fixed_ship_cost=ship_cost,
            min_ship_qty=float(params.get("min_ship_qty", 0.0)),
            holding_rate=hold,
            wos_window=int(kpi.get("wos_window", DEFAULT_WOS_WINDOW)),
            regions=dict(roles.get("regions", {})),
            families=dict(roles.get("families", {})),
        )

    def to_doc(self) -> dict:
        """Inverse of from_doc: a fully expanded, JSON-serializable document."""
        def table(arr):
            return {s: {str(w): _plain(arr[i, t]) for t, w in enumerate(self.weeks)}
                    for i, s in enumerate(self.sites)}

        return {
            "sites": list(self.sites),
            "items": list(self.items),
            "horizon": list(self.weeks),
            "frozen_weeks": self.frozen_weeks,
            "parameters": {
                "demand": table(self.demand),
                "receipts": table(self.receipts),
                "initial_inventory": {s: _plain(self.initial_inventory[i])
                                      for i, s in enumerate(self.sites)},
                "safety_stock": table(self.safety_stock),
                "ss_benefit": table(self.ss_benefit),
                "shortage_penalty": table(self.shortage_penalty),
                "fixed_ship_cost": table(self.fixed_ship_cost),
                "min_ship_qty": _plain(self.min_ship_qty),
            },
            "kpi": {
                "holding_rate": {s: _plain(self.holding_rate[i])
                                 for i, s in enumerate(self.sites)},
                "wos_window": self.wos_window,
            },
            "roles": {"regions": dict(self.regions), "families": dict(self.families)},
        }

    def canonical_json(self) -> str:
        return json.dumps(self.to_doc(), sort_keys=True, separators=(",", ":"))


def load_config(path) -> NetworkConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return NetworkConfig.from_doc(json.load(fh))


def save_config(cfg: NetworkConfig, path) -> None:
    Path(path).write_text(json.dumps(cfg.to_doc(), indent=2) + "\n", encoding="utf-8")


def validate_config(doc) -> ValidationReport:
    """Check a raw scenario document; violations are data, not exceptions."""
    report = ValidationReport()
    if isinstance(doc, NetworkConfig):
        doc = doc.to_doc()
    if not isinstance(doc, dict):
        report.add("$", "configuration must be a JSON object")
        return report

    sites = doc.get("sites")
    if not isinstance(sites, list) or not sites:
        report.add("sites", "must be a non-empty list of site identifiers")
        sites = []
    elif len(set(map(str, sites))) != len(sites):
        report.add("sites", "site identifiers must be unique")

    horizon = doc.get("horizon")
    if not isinstance(horizon, list) or not horizon:
        report.add("horizon", "must be a non-empty list of week labels")
        horizon = []
    elif len(set(map(str, horizon))) != len(horizon):
        report.add("horizon", "week labels must be unique")

    items = doc.get("items", ["ITEM-1"])
    if not isinstance(items, list) or not items:
        report.add("items", "must be a non-empty list of item identifiers")
        items = []

    frozen = doc.get("frozen_weeks", DEFAULT_FROZEN_WEEKS)
    if not isinstance(frozen, int) or isinstance(frozen, bool):
        report.add("frozen_weeks", "must be an integer count of initial weeks")
    elif frozen < 0 or (horizon and frozen > len(horizon)):
        report.add("frozen_weeks",
                   f"must lie in [0, {len(horizon)}], got {frozen}")
    elif horizon and frozen == len(horizon):
        report.advisories.append(
            "all weeks frozen; model reduces to simulation")

    site_set = {str(s) for s in sites}
    week_set = {str(w) for w in horizon}
    params = doc.get("parameters", {})
    if not isinstance(params, dict):
        report.add("parameters", "must be an object")
        params = {}

    for name in TABLE_PARAMS:
        _check_table(report, f"parameters.{name}", params.get(name, 0),
                     site_set, week_set, nonneg=True)
    _check_site_vector(report, "parameters.initial_inventory",
                       params.get("initial_inventory", 0), site_set,
                       nonneg=False)  # inherited backlog allowed

    q = params.get("min_ship_qty", 0)
    if not isinstance(q, Real) or isinstance(q, bool):
        report.add("parameters.min_ship_qty", "must be a number")
    elif q < 0:
        report.add("parameters.min_ship_qty", f"must be >= 0, got {q}")

    kpi = doc.get("kpi", {})
    if not isinstance(kpi, dict):
        report.add("kpi", "must be an object")
        kpi = {}
    _check_site_vector(report, "kpi.holding_rate",
                       kpi.get("holding_rate", 0), site_set, nonneg=True)
    window = kpi.get("wos_window", DEFAULT_WOS_WINDOW)
    if not isinstance(window, int) or isinstance(window, bool) or window < 1:
        report.add("kpi.wos_window", "must be a positive integer")

    roles = doc.get("roles", {})
    if not isinstance(roles, dict):
        report.add("roles", "must be an object")
        roles = {}
    for site in roles.get("regions", {}):
        if str(site) not in site_set:
            report.add(f"roles.regions.{site}", f"unknown site {site}")
    item_set = {str(it) for it in items}
    for item in roles.get("families", {}):
        if str(item) not in item_set:
            report.add(f"roles.families.{item}", f"unknown item {item}")
    return report


def _check_table(report, path, value, site_set, week_set, nonneg):
    if isinstance(value, Real) and not isinstance(value, bool):
        if nonneg and value < 0:
            report.add(path, f"must be >= 0, got {value}")
        return
    if not isinstance(value, dict):
        report.add(path, "must be a number or a site-keyed table")
        return
    for site, row in value.items():
        if str(site) not in site_set:
            report.add(f"{path}.{site}", f"unknown site {site}")
            continue
        if isinstance(row, Real) and not isinstance(row, bool):
            if nonneg and row < 0:
                report.add(f"{path}.{site}", f"must be >= 0, got {row}")
            continue
        if not isinstance(row, dict):
            report.add(f"{path}.{site}", "must be a number or week-keyed map")
            continue
        for week, cell in row.items():
            if str(week) not in week_set:
                report.add(f"{path}.{site}.{week}", f"unknown week {week}")
            elif not isinstance(cell, Real) or isinstance(cell, bool):
                report.add(f"{path}.{site}.{week}", "must be a number")
            elif nonneg and cell < 0:
                report.add(f"{path}.{site}.{week}", f"must be >= 0, got {cell}")


def _check_site_vector(report, path, value, site_set, nonneg):
    if isinstance(value, Real) and not isinstance(value, bool):
        if nonneg and value < 0:
            report.add(path, f"must be >= 0, got {value}")
        return
    if not isinstance(value, dict):
        report.add(path, "must be a number or a site-keyed map")
        return
    for site, cell in value.items():
        if str(site) not in site_set:
            report.add(f"{path}.{site}", f"unknown site {site}")
        elif not isinstance(cell, Real) or isinstance(cell, bool):
            report.add(f"{path}.{site}", "must be a number")
        elif nonneg and cell < 0:
            report.add(f"{path}.{site}", f"must be >= 0, got {cell}")


def _expand_table(value, sites, weeks) -> np.ndarray:
    out = np.zeros((len(sites), len(weeks)))
    if isinstance(value, Real):
        out[:] = float(value)
        return out
    week_pos = {str(w): t for t, w in enumerate(weeks)}
    site_pos = {str(s): i for i, s in enumerate(sites)}
    for site, row in value.items():
        i = site_pos[str(site)]
        if isinstance(row, Real):
            out[i, :] = float(row)
        else:
            for week, cell in row.items():
                out[i, week_pos[str(week)]] = float(cell)
    return out


def _expand_site_vector(value, sites) -> np.ndarray:
    out = np.zeros(len(sites))
    if isinstance(value, Real):
        out[:] = float(value)
        return out
    site_pos = {str(s): i for i, s in enumerate(sites)}
    for site, cell in value.items():
        out[site_pos[str(site)]] = float(cell)
    return out


def _plain(x):
    """Render numpy scalars as plain ints/floats for clean JSON."""
    f = float(x)
    return int(f) if f.is_integer() else f
