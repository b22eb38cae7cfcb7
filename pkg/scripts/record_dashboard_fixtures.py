"""Record REST payloads for the dashboard's contract tests.

Runs the bundled scenario through the service in-process and freezes the
responses the frontend consumes under frontend/fixtures/.
"""

import json
import sys
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from rebalance.fixture import fixture_doc
from rebalance.service import Service, create_app

OUT = Path(__file__).resolve().parents[1] / "frontend" / "fixtures"


def main() -> int:
    OUT.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        service = Service(tmp, default_config=fixture_doc())
        client = TestClient(create_app(service))

        run_id = client.post("/api/runs", json={
            "options": {"rel_gap": 0.01, "time_limit": 120, "seed": 0},
        }).json()["run_id"]
        print(f"solving fixture run {run_id} ...")
        service.wait_all(timeout=240)

        def record(name, resp):
            resp.raise_for_status()
            data = resp.json()
            (OUT / f"{name}.json").write_text(json.dumps(data, indent=1,
                                                         sort_keys=True))
            print(f"  {name}.json")
            return data

        record("health", client.get("/api/health"))
        record("config", client.get("/api/config"))
        record("runs", client.get("/api/runs"))
        run = record("run", client.get(f"/api/runs/{run_id}"))
        record("transfers", client.get(f"/api/runs/{run_id}/transfers"))
        for site in ("DC1", "DC5"):
            record(f"series_{site}",
                   client.get(f"/api/runs/{run_id}/series/{site}"))
        for level in ("item", "family", "region"):
            record(f"kpis_{level}",
                   client.get(f"/api/runs/{run_id}/kpis?level={level}"))
        for role in ("analyst", "manager", "executive"):
            record(f"report_{role}",
                   client.post(f"/api/runs/{run_id}/report",
                               json={"role": role}))
        print(f"fixture run status: {run['status']}, gap "
              f"{run['plan']['gap']:.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
