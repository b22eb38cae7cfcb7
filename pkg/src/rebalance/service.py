"""REST service and run lifecycle.

A single worker thread drains a FIFO queue, so at most one optimization
executes at any instant; read endpoints stay concurrent.  Configuration
writes validate before replacing the active document and keep every prior
version.  Reports are cached per (run, role, mode).
"""

from __future__ import annotations

import json
import queue
import threading
import time
from dataclasses import asdict

from fastapi import Body, FastAPI, Request, Response
from fastapi.responses import JSONResponse, PlainTextResponse

from . import __version__
from .config import NetworkConfig, validate_config
from .milp import SolverOptions
from .planner import solve_plan
from .reporting import (HttpTextClient, ExternalClientConfig, Role,
                        build_static_template, generate_report)
from .simulate import compute_savings
from .store import (ConfigStore, JobState, RunNotFound, RunRecord, RunStore,
                    config_hash, new_run_id)


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, details=None):
        self.status = status
        self.payload = {"code": code, "message": message,
                        "details": details or []}
        super().__init__(message)


class Service:
    """Owns the stores, the job queue, and the solver worker."""

    def __init__(self, data_dir, default_config: dict | None = None,
                 solver=None, external_client=None):
        self.runs = RunStore(data_dir)
        self.configs = ConfigStore(data_dir, default_doc=default_config)
        self.jobs: dict[str, JobState] = {}
        self.report_cache: dict[tuple, dict] = {}
        self._solver = solver or self._default_solver
        self._external_client = external_client
        self._queue: queue.Queue = queue.Queue()
        self._active_solves = 0
        self._overlap_detected = False
        self._lock = threading.Lock()
        self._config_lock = threading.Lock()
        self._worker = threading.Thread(target=self._drain, daemon=True)
        self._worker.start()

    # -- solving ------------------------------------------------------------

    @staticmethod
    def _default_solver(cfg: NetworkConfig, opts: SolverOptions, note):
        opts.progress = lambda nodes, inc, bound: note(
            f"nodes={nodes} incumbent={inc:.1f} bound={bound:.1f}")
        plan, result = solve_plan(cfg, opts)
        return plan, result

    def submit_run(self, config_doc: dict | None = None,
                   options: dict | None = None) -> JobState:
        doc = config_doc if config_doc is not None else self.configs.get_doc()
        report = validate_config(doc)
        if not report.ok:
            raise ApiError(422, "invalid_config", "configuration rejected",
                           [f"{v.path}: {v.message}" for v in report.violations])
        opts = SolverOptions()
        for key, value in (options or {}).items():
            if not hasattr(opts, key):
                raise ApiError(422, "invalid_options",
                               f"unknown solver option {key}")
            setattr(opts, key, type(getattr(opts, key))(value)
                    if getattr(opts, key) is not None else value)
        try:
            opts.validate()
        except ValueError as exc:
            raise ApiError(422, "invalid_options", str(exc))
        run_id = new_run_id()
        state = JobState(run_id=run_id)
        self.jobs[run_id] = state
        self._queue.put((run_id, doc, opts))
        return state

    def _drain(self):
        while True:
            run_id, doc, opts = self._queue.get()
            state = self.jobs[run_id]
            state.advance("running")
            with self._lock:
                self._active_solves += 1
                if self._active_solves > 1:
                    self._overlap_detected = True
            try:
                self._execute(run_id, doc, opts, state)
                state.advance("done")
            except Exception as exc:
                self._record_failure(run_id, doc, opts, str(exc))
                state.advance("failed", str(exc))
            finally:
                with self._lock:
                    self._active_solves -= 1
                self._queue.task_done()

    def _execute(self, run_id, doc, opts, state):
        cfg = NetworkConfig.from_doc(doc)
        plan, result = self._solver(cfg, opts, lambda msg: setattr(state, "note", msg))
        record = self._make_record(run_id, cfg, doc, opts, plan)
        self.runs.save(record)

    def _make_record(self, run_id, cfg, doc, opts, plan) -> RunRecord:
        from .simulate import simulate
        series = simulate(cfg, plan)
        savings = compute_savings(series)
        options_doc = {k: v for k, v in asdict(opts).items()
                       if k != "progress" and not callable(v)}
        return RunRecord(
            run_id=run_id, created=time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
            config_doc=doc, config_hash=config_hash(doc),
            options_doc=options_doc, status=plan.status,
            plan_doc=plan.to_doc(cfg), total_units=savings.total_units,
            total_savings=savings.total_savings)

    def _record_failure(self, run_id, doc, opts, error):
        options_doc = {k: v for k, v in asdict(opts).items()
                       if k != "progress" and not callable(v)}
        record = RunRecord(
            run_id=run_id, created=time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
            config_doc=doc, config_hash=config_hash(doc),
            options_doc=options_doc, status="Failed", plan_doc={},
            total_units=0.0, total_savings=0.0, error=error)
        self.runs.save(record)

    def wait_all(self, timeout: float = 600.0):
        """Test helper: block until the queue is fully drained."""
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            if self._queue.unfinished_tasks == 0:
                return
            time.sleep(0.02)
        raise TimeoutError("jobs did not finish in time")

    # -- reads --------------------------------------------------------------

    def get_run(self, run_id: str) -> RunRecord:
        try:
            return self.runs.get_run(run_id)
        except RunNotFound:
            raise ApiError(404, "not_found", f"unknown run {run_id}")

    def require_terminal(self, run_id: str) -> RunRecord:
        record = self.get_run(run_id)
        job = self.jobs.get(run_id)
        if job is not None and job.status not in ("done", "failed"):
            raise ApiError(409, "not_terminal", f"run {run_id} still {job.status}")
        return record

    def transfers_payload(self, record: RunRecord) -> dict:
        lanes = {}
        for src, dst, week, qty in record.lanes:
            key = (src, dst)
            lane = lanes.setdefault(key, {"src": src, "dst": dst,
                                          "total": 0.0, "weekly": {}})
            lane["total"] += qty
            lane["weekly"][str(week)] = qty
        return {"run_id": record.run_id,
                "lanes": sorted(lanes.values(),
                                key=lambda l: (l["src"], l["dst"]))}

    def kpis_payload(self, record: RunRecord, level: str) -> dict:
        cfg, series = record.cfg, record.series
        rows = []
        if level == "item":
            for i, site in enumerate(cfg.sites):
                for t, week in enumerate(cfg.weeks):
                    rows.append(self._kpi_row(site, week, series, [i], t))
        elif level == "family":
            fams = sorted(set(cfg.families.values()) or {"all-items"})
            idx = list(range(cfg.n_sites))
            for fam in fams:
                for t, week in enumerate(cfg.weeks):
                    rows.append(self._kpi_row(fam, week, series, idx, t))
        elif level == "region":
            groups = {}
            for i, site in enumerate(cfg.sites):
                groups.setdefault(cfg.regions.get(site, "network"), []).append(i)
            for region in sorted(groups):
                for t, week in enumerate(cfg.weeks):
                    rows.append(self._kpi_row(region, week, series,
                                              groups[region], t))
        else:
            raise ApiError(422, "invalid_level",
                           f"level must be item, family or region, got {level}")
        return {"run_id": record.run_id, "level": level, "rows": rows}

    @staticmethod
    def _kpi_row(scope, week, series, idx, t):
        import numpy as np
        return {
            "scope": scope, "week": week,
            "inventory": float(series.inventory[idx, t].sum()),
            "sim_inv": float(series.sim_inv[idx, t].sum()),
            "wos": float(np.mean(series.wos[idx, t])),
            "sim_wos": float(np.mean(series.sim_wos[idx, t])),
            "inv_cost": float(series.inv_cost[idx, t].sum()),
            "sim_inv_cost": float(series.sim_inv_cost[idx, t].sum()),
            "demand": float(series.demand[idx, t].sum()),
            "receipts": float(series.receipts[idx, t].sum()),
        }

    def report_payload(self, run_id: str, role) -> dict:
        record = self.require_terminal(run_id)
        role = Role.parse(role)
        client = self._external_client
        mode_key = "external" if client is not None else "deterministic"
        key = (run_id, role.value, mode_key)
        if key in self.report_cache:
            return self.report_cache[key]
        report = generate_report(self.runs, run_id, role, client=client)
        payload = {
            "run_id": run_id,
            "role": role.value,
            "mode": report.mode,
            "sections": list(report.sections),
            "text": report.to_text(),
            "warnings": list(report.warnings),
            "data_rows": report.data_rows,
        }
        self.report_cache[key] = payload
        return payload


def create_app(service: Service) -> FastAPI:
    app = FastAPI(title="rebalance", version=__version__)

    @app.exception_handler(ApiError)
    async def _api_error(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content=exc.payload)

    @app.get("/api/health")
    def health():
        return {"status": "ok", "version": __version__,
                "site_count": len(service.configs.get_doc().get("sites", []))}

    @app.get("/api/config")
    def get_config():
        return Response(content=service.configs.get_bytes(),
                        media_type="application/json",
                        headers={"X-Config-Version": str(service.configs.version)})

    @app.put("/api/config")
    async def put_config(request: Request):
        data = await request.body()
        try:
            doc = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ApiError(422, "invalid_json", f"config is not valid JSON: {exc}")
        report = validate_config(doc)
        if not report.ok:
            raise ApiError(422, "invalid_config", "configuration rejected",
                           [f"{v.path}: {v.message}" for v in report.violations])
        with service._config_lock:
            version = service.configs.put(data)
        return {"version": version, "advisories": report.advisories}

    @app.post("/api/runs", status_code=202)
    def submit(body: dict = Body(default=None)):
        body = body or {}
        state = service.submit_run(body.get("config"), body.get("options"))
        return {"run_id": state.run_id, "state": state.status}

    @app.get("/api/runs")
    def list_runs():
        return {"runs": service.runs.list_runs()}

    @app.get("/api/runs/{run_id}")
    def get_run(run_id: str):
        job = service.jobs.get(run_id)
        if job is not None and job.status in ("queued", "running"):
            return {"run_id": run_id, "state": job.status, "note": job.note}
        record = service.get_run(run_id)
        doc = record.to_doc()
        doc["state"] = service.jobs[run_id].status if run_id in service.jobs else "done"
        return doc

    @app.get("/api/runs/{run_id}/transfers")
    def get_transfers(run_id: str):
        return service.transfers_payload(service.require_terminal(run_id))

    @app.get("/api/runs/{run_id}/series/{site}")
    def get_series(run_id: str, site: str):
        record = service.require_terminal(run_id)
        if site not in record.cfg.sites:
            raise ApiError(404, "not_found", f"unknown site {site}")
        return record.series.site_slice(site)

    @app.get("/api/runs/{run_id}/kpis")
    def get_kpis(run_id: str, level: str = "item"):
        return service.kpis_payload(service.require_terminal(run_id), level)

    @app.post("/api/runs/{run_id}/report")
    def post_report(run_id: str, body: dict = Body(default=None)):
        role = (body or {}).get("role", "analyst")
        try:
            return service.report_payload(run_id, role)
        except ApiError:
            raise
        except Exception as exc:
            raise ApiError(422, "report_failed", str(exc))

    @app.get("/api/runs/{run_id}/ledger.csv")
    def get_ledger(run_id: str):
        record = service.require_terminal(run_id)
        return PlainTextResponse(record.series.to_csv_text(),
                                 media_type="text/csv")

    _mount_dashboard(app)
    return app


def _mount_dashboard(app: FastAPI) -> None:
    """Serve the built dashboard at / when frontend/ sits next to the repo."""
    from pathlib import Path
    from fastapi.staticfiles import StaticFiles
    root = Path(__file__).resolve().parents[2] / "frontend"
    if (root / "index.html").exists():
        app.mount("/", StaticFiles(directory=root, html=True),
                  name="dashboard")


def default_service(data_dir) -> Service:
    from .fixture import fixture_doc
    client_cfg = ExternalClientConfig.from_env()
    client = HttpTextClient(client_cfg) if client_cfg else None
    return Service(data_dir, default_config=fixture_doc(),
                   external_client=client)
