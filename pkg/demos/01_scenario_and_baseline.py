"""Scenario anatomy and the no-transfer baseline.

Loads the bundled five-site scenario, validates it, and projects what
happens if nobody intervenes: DC1's projected inventory collapses while
the other sites sit on surplus stock.
"""

from rebalance import fixture_doc, validate_config
from rebalance.config import NetworkConfig
from rebalance.simulate import detect_stockouts, simulate

doc = fixture_doc()
report = validate_config(doc)
print(f"validation: {'pass' if report.ok else 'FAIL'} "
      f"({len(report.violations)} violations)")

cfg = NetworkConfig.from_doc(doc)
print(f"sites: {', '.join(cfg.sites)}")
print(f"weeks: {cfg.weeks[0]}..{cfg.weeks[-1]} "
      f"(first {cfg.frozen_weeks} frozen, no transfers allowed)")
print(f"minimum shipment quantity: {cfg.min_ship_qty:g} units")

series = simulate(cfg)   # no plan: both paths coincide
print("\nbaseline projected inventory (sim_inv):")
header = "site " + "".join(f"{w:>8}" for w in cfg.weeks)
print(header)
for i, site in enumerate(cfg.sites):
    row = "".join(f"{v:8.0f}" for v in series.sim_inv[i])
    print(f"{site:4} {row}")

events = [e for e in detect_stockouts(series) if e.path == "baseline"]
print(f"\n{len(events)} projected stockout events without intervention:")
for e in events:
    print(f"  {e.site} week {e.week}: short {e.magnitude:,.0f} units")

worst = max(events, key=lambda e: e.magnitude)
print(f"\nworst case: {worst.site} bottoms out at -{worst.magnitude:,.0f} "
      f"units in week {worst.week}.")
print("Next: demos/02_optimize_transfers.py rebalances the network.")
