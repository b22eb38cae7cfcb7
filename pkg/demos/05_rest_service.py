"""The full service loop, in-process: configure, run, inspect, report.

Uses a quick two-site scenario so the solve is instant; point the same
calls at `rebalance serve` for the real thing.
"""

import json
import tempfile

from fastapi.testclient import TestClient

from rebalance.service import Service, create_app

scenario = {
    "sites": ["A", "B"], "items": ["IT"], "horizon": [1, 2],
    "frozen_weeks": 0,
    "parameters": {
        "demand": {"A": {"1": 0, "2": 10}, "B": 0},
        "receipts": 0,
        "initial_inventory": {"A": 0, "B": 12},
        "safety_stock": 0, "ss_benefit": 0,
        "shortage_penalty": 10, "fixed_ship_cost": 1, "min_ship_qty": 5,
    },
    "kpi": {"holding_rate": 0, "wos_window": 2},
    "roles": {"regions": {"A": "east", "B": "west"},
              "families": {"IT": "stuff"}},
}

data_dir = tempfile.mkdtemp(prefix="rebalance-svc-")
service = Service(data_dir, default_config=scenario)
client = TestClient(create_app(service))

print("health:", client.get("/api/health").json())

# tweak the config through the API (PUT validates first)
scenario["parameters"]["min_ship_qty"] = 6
resp = client.put("/api/config", content=json.dumps(scenario).encode())
print("config update -> version", resp.json()["version"])

run_id = client.post("/api/runs",
                     json={"options": {"rel_gap": 0.01}}).json()["run_id"]
print("submitted run:", run_id)
service.wait_all()

record = client.get(f"/api/runs/{run_id}").json()
print(f"run finished: {record['status']}, objective "
      f"{record['plan']['objective']}, savings {record['total_savings']}")

print("transfers:", json.dumps(client.get(
    f"/api/runs/{run_id}/transfers").json()["lanes"], indent=2))
print("region KPI rows:", len(client.get(
    f"/api/runs/{run_id}/kpis", params={"level": "region"}).json()["rows"]))

report = client.post(f"/api/runs/{run_id}/report",
                     json={"role": "executive"}).json()
print("\nexecutive report:\n")
print(report["text"])
