"""Bundled five-site demo scenario, weeks 30-38.

DC1 faces a demand surge that drives its baseline projection to -1,141 units
by week 38 while the four upstream sites carry shrinking surpluses.  The
first three weeks are frozen, so the earliest rescue window is week 33.
Safety-stock targets at the upstream sites track their baseline positions
(stock on hand is protected; incoming excess earns nothing), while DC1
carries a flat 120-unit target with the highest per-unit benefit.
"""

from __future__ import annotations

from .config import NetworkConfig

SITES = ("DC1", "DC2", "DC3", "DC4", "DC5")
WEEKS = tuple(range(30, 39))


def fixture_doc() -> dict:
    """The scenario as a plain configuration document."""
    weeks = [str(w) for w in WEEKS]

    def per_week(values):
        return dict(zip(weeks, values))

    return {
        "sites": list(SITES),
        "items": ["SKU-100"],
        "horizon": list(WEEKS),
        "frozen_weeks": 3,
        "parameters": {
            "demand": {
                "DC1": per_week([160, 150, 145, 180, 185, 210, 215, 184, 212]),
                "DC2": 25,
                "DC3": 35,
                "DC4": 40,
                "DC5": 32,
            },
            "receipts": {
                "DC3": {"31": 50, "32": 36},
                "DC4": {"31": 60, "32": 30},
                "DC5": {"31": 120, "32": 45, "33": 40, "34": 35, "35": 34},
            },
            "initial_inventory": {
                "DC1": 500, "DC2": 597, "DC3": 569, "DC4": 600, "DC5": 334,
            },
            "safety_stock": {
                "DC1": 120,
                "DC2": per_week([572, 547, 522, 497, 472, 447, 422, 397, 372]),
                "DC3": per_week([534, 549, 550, 515, 480, 445, 410, 375, 340]),
                "DC4": per_week([560, 580, 570, 530, 490, 450, 410, 370, 330]),
                "DC5": per_week([302, 390, 403, 411, 414, 416, 384, 352, 320]),
            },
            "ss_benefit": {"DC1": 10, "DC2": 3, "DC3": 3, "DC4": 3, "DC5": 3},
            "shortage_penalty": 150,
            "fixed_ship_cost": 25,
            "min_ship_qty": 25,
        },
        "kpi": {"holding_rate": 2, "wos_window": 4},
        "roles": {
            "regions": {"DC1": "midwest", "DC2": "midwest",
                        "DC3": "south", "DC4": "south", "DC5": "south"},
            "families": {"SKU-100": "widgets"},
        },
    }


def fixture_config() -> NetworkConfig:
    return NetworkConfig.from_doc(fixture_doc())
