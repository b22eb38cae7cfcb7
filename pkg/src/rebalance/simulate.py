"""Inventory projection and the KPI layer.

``simulate`` rolls the weekly balance forward twice: once with the given
transfer plan and once without (the baseline path, ``sim_inv``), then fills
in weeks-of-supply and cost series.  Negative inventory carries forward as
backlog.  Savings compare the two cost paths on weeks that actually moved
stock.
"""

from __future__ import annotations

import io
import csv
from dataclasses import dataclass, field

import numpy as np

from .config import NetworkConfig

WOS_SENTINEL = 999.0


@dataclass(frozen=True)
class StockoutEvent:
    site: str
    week: object
    magnitude: float        # units short, > 0
    path: str               # "baseline" | "planned"


@dataclass
class SavingsSummary:
    weekly: list            # rows {week, units, savings} for transfer weeks only
    total_units: float
    total_savings: float


@dataclass
class LedgerSeries:
    """Per-site weekly series; all arrays shaped (n_sites, n_weeks)."""

    sites: tuple
    weeks: tuple
    demand: np.ndarray
    receipts: np.ndarray
    transfer_in: np.ndarray
    transfer_out: np.ndarray
    inventory: np.ndarray      # planned path
    sim_inv: np.ndarray        # baseline path (no transfers)
    wos: np.ndarray
    sim_wos: np.ndarray
    inv_cost: np.ndarray
    sim_inv_cost: np.ndarray

    COLUMNS = ("site", "week", "demand", "receipts", "transfer_in",
               "transfer_out", "inventory", "sim_inv", "wos", "sim_wos",
               "inv_cost", "sim_inv_cost")

    def site_index(self, site: str) -> int:
        return self.sites.index(site)

    def site_slice(self, site: str) -> dict:
        i = self.site_index(site)
        return {
            "site": site,
            "weeks": list(self.weeks),
            "demand": self.demand[i].tolist(),
            "receipts": self.receipts[i].tolist(),
            "transfer_in": self.transfer_in[i].tolist(),
            "transfer_out": self.transfer_out[i].tolist(),
            "inventory": self.inventory[i].tolist(),
            "sim_inv": self.sim_inv[i].tolist(),
            "wos": self.wos[i].tolist(),
            "sim_wos": self.sim_wos[i].tolist(),
            "inv_cost": self.inv_cost[i].tolist(),
            "sim_inv_cost": self.sim_inv_cost[i].tolist(),
        }

    def to_csv_text(self) -> str:
        """Flat tabular export, one row per site-week, stable column order."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.COLUMNS)
        for i, site in enumerate(self.sites):
            for t, week in enumerate(self.weeks):
                writer.writerow([
                    site, week,
                    _fmt(self.demand[i, t]), _fmt(self.receipts[i, t]),
                    _fmt(self.transfer_in[i, t]), _fmt(self.transfer_out[i, t]),
                    _fmt(self.inventory[i, t]), _fmt(self.sim_inv[i, t]),
                    _fmt(self.wos[i, t]), _fmt(self.sim_wos[i, t]),
                    _fmt(self.inv_cost[i, t]), _fmt(self.sim_inv_cost[i, t]),
                ])
        return buf.getvalue()


def _fmt(v: float):
    f = float(v)
    return int(f) if f.is_integer() else round(f, 6)


def _plan_to_array(cfg: NetworkConfig, plan) -> np.ndarray:
    n, T = cfg.n_sites, cfg.n_weeks
    if plan is None:
        return np.zeros((n, n, T))
    if hasattr(plan, "transfers"):       # PlanSolution
        plan = plan.transfers
    if isinstance(plan, np.ndarray):
        if plan.shape != (n, n, T):
            raise ValueError(f"plan shape {plan.shape} != {(n, n, T)}")
        return plan.astype(float)
    arr = np.zeros((n, n, T))
    for src, dsts in plan.items():
        if src not in cfg.sites:
            raise ValueError(f"plan references unknown site {src}")
        for dst, by_week in dsts.items():
            if dst not in cfg.sites:
                raise ValueError(f"plan references unknown site {dst}")
            for week, qty in by_week.items():
                try:
                    t = cfg.week_index(week)
                except ValueError:
                    raise ValueError(f"plan references unknown week {week}")
                arr[cfg.site_index(src), cfg.site_index(dst), t] = float(qty)
    return arr


def simulate(cfg: NetworkConfig, plan=None) -> LedgerSeries:
    """Project both inventory paths and compute the full KPI ledger.

    The baseline path always ignores the plan; with no plan the two paths
    coincide and transfers are zero.
    """
    transfers = _plan_to_array(cfg, plan)
    n, T = cfg.n_sites, cfg.n_weeks
    t_in = transfers.sum(axis=0)    # inbound per (dst, week)
    t_out = transfers.sum(axis=1)   # outbound per (src, week)

    inventory = np.zeros((n, T))
    sim_inv = np.zeros((n, T))
    prev_plan = cfg.initial_inventory.copy()
    prev_sim = cfg.initial_inventory.copy()
    for t in range(T):
        prev_plan = (prev_plan + cfg.receipts[:, t] + t_in[:, t]
                     - t_out[:, t] - cfg.demand[:, t])
        prev_sim = prev_sim + cfg.receipts[:, t] - cfg.demand[:, t]
        inventory[:, t] = prev_plan
        sim_inv[:, t] = prev_sim

    series = LedgerSeries(
        sites=cfg.sites, weeks=cfg.weeks,
        demand=cfg.demand.copy(), receipts=cfg.receipts.copy(),
        transfer_in=t_in, transfer_out=t_out,
        inventory=inventory, sim_inv=sim_inv,
        wos=np.zeros((n, T)), sim_wos=np.zeros((n, T)),
        inv_cost=np.zeros((n, T)), sim_inv_cost=np.zeros((n, T)))
    series.wos, series.sim_wos = compute_wos(series, cfg)
    series.inv_cost, series.sim_inv_cost = compute_costs(series, cfg)
    return series


def compute_wos(series: LedgerSeries, cfg: NetworkConfig):
    """Weeks of supply: positive stock over mean near-term weekly demand.

    The forward window is ``cfg.wos_window`` weeks, truncated at the horizon;
    a vanishing denominator yields the sentinel 999.
    """
    n, T = series.demand.shape
    wos = np.zeros((n, T))
    sim_wos = np.zeros((n, T))
    for i in range(n):
        for t in range(T):
            window = series.demand[i, t + 1:t + 1 + cfg.wos_window]
            denom = float(window.mean()) if window.size else 0.0
            for out, inv in ((wos, series.inventory), (sim_wos, series.sim_inv)):
                stock = max(float(inv[i, t]), 0.0)
                out[i, t] = stock / denom if denom > 1e-9 else WOS_SENTINEL
    return wos, sim_wos


def compute_costs(series: LedgerSeries, cfg: NetworkConfig):
    """Weekly cost: holding on positive stock plus shortage penalty on backlog."""
    hold = cfg.holding_rate[:, None]
    pen = cfg.shortage_penalty
    inv_cost = hold * np.maximum(series.inventory, 0.0) \
        + pen * np.maximum(-series.inventory, 0.0)
    sim_cost = hold * np.maximum(series.sim_inv, 0.0) \
        + pen * np.maximum(-series.sim_inv, 0.0)
    return inv_cost, sim_cost


def compute_savings(series: LedgerSeries) -> SavingsSummary:
    """Weekly savings table over transfer weeks only, plus grand totals.

    The table lists weeks that moved stock; the grand total counts the whole
    horizon, since a transfer's payoff can land after the week it ships.
    """
    moved = series.transfer_in.sum(axis=0)
    per_week_saving = np.maximum(series.sim_inv_cost - series.inv_cost, 0.0).sum(axis=0)
    weekly = [{"week": week, "units": float(moved[t]),
               "savings": float(per_week_saving[t])}
              for t, week in enumerate(series.weeks) if moved[t] > 0]
    return SavingsSummary(weekly=weekly,
                          total_units=float(moved.sum()),
                          total_savings=float(per_week_saving.sum()))


def detect_stockouts(series: LedgerSeries) -> list[StockoutEvent]:
    """Negative-inventory events on both paths, sorted by week then site."""
    events = []
    for t, week in enumerate(series.weeks):
        for i, site in enumerate(sorted(series.sites)):
            idx = series.sites.index(site)
            for path, inv in (("baseline", series.sim_inv),
                              ("planned", series.inventory)):
                v = float(inv[idx, t])
                if v < 0:
                    events.append(StockoutEvent(site, week, -v, path))
    return events
