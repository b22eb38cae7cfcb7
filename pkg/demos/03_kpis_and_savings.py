"""The KPI layer: weeks of supply, cost paths, and the savings table.

Uses a hand-written plan so it runs instantly; swap in a solver plan from
demo 02 for the optimized version.
"""

from rebalance import fixture_config
from rebalance.simulate import compute_savings, simulate

cfg = fixture_config()

# a plausible manual rescue: everything DC1 needs, shipped as it is needed
manual_plan = {
    "DC5": {"DC1": {"33": 255, "34": 65}},
    "DC4": {"DC1": {"34": 120, "35": 210}},
    "DC3": {"DC1": {"36": 215, "37": 125}},
    "DC2": {"DC1": {"37": 59, "38": 212}},
}
series = simulate(cfg, manual_plan)

dc1 = cfg.site_index("DC1")
print("DC1, week by week:")
print(f"{'week':>6} {'demand':>8} {'sim_inv':>9} {'inv':>7} "
      f"{'sim_wos':>8} {'wos':>6} {'sim_cost':>10} {'cost':>8}")
for t, week in enumerate(cfg.weeks):
    print(f"{week:>6} {series.demand[dc1, t]:8.0f} "
          f"{series.sim_inv[dc1, t]:9.0f} {series.inventory[dc1, t]:7.0f} "
          f"{series.sim_wos[dc1, t]:8.2f} {series.wos[dc1, t]:6.2f} "
          f"{series.sim_inv_cost[dc1, t]:10.0f} {series.inv_cost[dc1, t]:8.0f}")

savings = compute_savings(series)
print("\nweekly savings (transfer weeks only):")
for row in savings.weekly:
    print(f"  week {row['week']}: moved {row['units']:6,.0f} units, "
          f"saved {row['savings']:10,.0f}")
print(f"totals: {savings.total_units:,.0f} units moved, "
      f"{savings.total_savings:,.0f} saved")

csv_text = series.to_csv_text()
print(f"\nledger CSV: {len(csv_text.splitlines()) - 1} rows, columns: "
      f"{csv_text.splitlines()[0]}")
