"""Run persistence: append-only directory of JSON documents.

Each finished run is one self-contained document (config snapshot, solver
options, plan, stats) written atomically via write-then-rename, so a record
is either absent or complete.  Ledger series and KPIs are reconstructed from
the stored plan on load; the simulation is deterministic, so a reloaded
record is indistinguishable from the live one.  An index file accelerates
listings and is rebuilt from the documents whenever it is missing or stale.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import NetworkConfig
from .simulate import LedgerSeries, SavingsSummary, compute_savings, detect_stockouts, simulate


class RunNotFound(KeyError):
    pass


def new_run_id() -> str:
    """Timestamp-prefixed ids sort chronologically."""
    stamp = time.strftime("%Y%m%dT%H%M%S", time.gmtime())
    return f"{stamp}-{uuid.uuid4().hex[:8]}"


def config_hash(doc: dict) -> str:
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class JobState:
    status: str = "queued"        # queued -> running -> done | failed
    note: str = ""
    run_id: str = ""

    _ALLOWED = {"queued": ("running",), "running": ("done", "failed"),
                "done": (), "failed": ()}

    def advance(self, status: str, note: str = "") -> None:
        if status not in self._ALLOWED[self.status]:
            raise ValueError(f"illegal transition {self.status} -> {status}")
        self.status = status
        self.note = note


@dataclass
class RunRecord:
    run_id: str
    created: str
    config_doc: dict
    config_hash: str
    options_doc: dict
    status: str                   # solver status of the finished run
    plan_doc: dict                # canonical plan, same schema as PlanSolution.to_doc
    total_units: float
    total_savings: float
    error: str = ""

    # materialized lazily, never persisted
    _cfg: NetworkConfig | None = field(default=None, repr=False, compare=False)
    _series: LedgerSeries | None = field(default=None, repr=False, compare=False)
    _savings: SavingsSummary | None = field(default=None, repr=False, compare=False)

    @property
    def cfg(self) -> NetworkConfig:
        if self._cfg is None:
            self._cfg = NetworkConfig.from_doc(self.config_doc)
        return self._cfg

    @property
    def transfers(self) -> np.ndarray:
        cfg = self.cfg
        arr = np.zeros((cfg.n_sites, cfg.n_sites, cfg.n_weeks))
        for src, dsts in self.plan_doc.get("transfers", {}).items():
            for dst, by_week in dsts.items():
                for week, qty in by_week.items():
                    arr[cfg.site_index(src), cfg.site_index(dst),
                        cfg.week_index(week)] = float(qty)
        return arr

    @property
    def series(self) -> LedgerSeries:
        if self._series is None:
            self._series = simulate(self.cfg, self.transfers)
        return self._series

    @property
    def savings(self) -> SavingsSummary:
        if self._savings is None:
            self._savings = compute_savings(self.series)
        return self._savings

    @property
    def lanes(self) -> list:
        out = []
        cfg = self.cfg
        for src, dsts in sorted(self.plan_doc.get("transfers", {}).items()):
            for dst, by_week in sorted(dsts.items()):
                for week in cfg.weeks:
                    qty = by_week.get(str(week))
                    if qty:
                        out.append((src, dst, week, float(qty)))
        return out

    @property
    def stockouts(self) -> list:
        return detect_stockouts(self.series)

    def to_doc(self) -> dict:
        return {
            "run_id": self.run_id,
            "created": self.created,
            "config": self.config_doc,
            "config_hash": self.config_hash,
            "options": self.options_doc,
            "status": self.status,
            "plan": self.plan_doc,
            "total_units": self.total_units,
            "total_savings": self.total_savings,
            "error": self.error,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "RunRecord":
        return cls(
            run_id=doc["run_id"], created=doc["created"],
            config_doc=doc["config"], config_hash=doc["config_hash"],
            options_doc=doc.get("options", {}), status=doc["status"],
            plan_doc=doc.get("plan", {}),
            total_units=doc.get("total_units", 0.0),
            total_savings=doc.get("total_savings", 0.0),
            error=doc.get("error", ""))

    def summary(self) -> dict:
        return {
            "run_id": self.run_id,
            "created": self.created,
            "status": self.status,
            "objective": self.plan_doc.get("objective"),
            "gap": self.plan_doc.get("gap"),
            "total_units": self.total_units,
            "total_savings": self.total_savings,
            "config_hash": self.config_hash,
        }


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


class RunStore:
    """One JSON document per run under <root>/runs, plus an index."""

    def __init__(self, root):
        self.root = Path(root)
        self.runs_dir = self.root / "runs"
        self.runs_dir.mkdir(parents=True, exist_ok=True)
        self._cache: dict[str, RunRecord] = {}

    def _run_path(self, run_id: str) -> Path:
        return self.runs_dir / f"{run_id}.json"

    @property
    def index_path(self) -> Path:
        return self.root / "index.json"

    def save(self, record: RunRecord) -> None:
        doc = json.dumps(record.to_doc(), indent=1, sort_keys=True)
        _atomic_write(self._run_path(record.run_id), doc.encode())
        self._cache[record.run_id] = record
        self._write_index()

    def get_run(self, run_id: str) -> RunRecord:
        if run_id in self._cache:
            return self._cache[run_id]
        path = self._run_path(run_id)
        if not path.exists():
            raise RunNotFound(run_id)
        record = RunRecord.from_doc(json.loads(path.read_text()))
        self._cache[run_id] = record
        return record

    def run_ids(self) -> list[str]:
        return sorted(p.stem for p in self.runs_dir.glob("*.json"))

    def list_runs(self) -> list[dict]:
        """Summaries, newest first."""
        out = [self.get_run(rid).summary() for rid in self.run_ids()]
        out.sort(key=lambda s: (s["created"], s["run_id"]), reverse=True)
        return out

    def _write_index(self) -> None:
        index = {rid: self.get_run(rid).summary() for rid in self.run_ids()}
        _atomic_write(self.index_path,
                      json.dumps(index, indent=1, sort_keys=True).encode())


class ConfigStore:
    """Versioned scenario documents; GET returns the accepted bytes verbatim."""

    def __init__(self, root, default_doc: dict | None = None):
        self.root = Path(root)
        self.dir = self.root / "config"
        self.dir.mkdir(parents=True, exist_ok=True)
        if self.version == 0 and default_doc is not None:
            self.put(json.dumps(default_doc, indent=2).encode())

    @property
    def version(self) -> int:
        versions = [int(p.stem[1:]) for p in self.dir.glob("v*.json")]
        return max(versions, default=0)

    def get_bytes(self) -> bytes:
        v = self.version
        if v == 0:
            raise RunNotFound("no configuration stored")
        return (self.dir / f"v{v:04d}.json").read_bytes()

    def get_doc(self) -> dict:
        return json.loads(self.get_bytes())

    def put(self, data: bytes) -> int:
        """Store a new active version; caller validates first."""
        v = self.version + 1
        _atomic_write(self.dir / f"v{v:04d}.json", data)
        return v
