"""Translate a scenario into a solver-neutral MILP and back.

The optimization decides weekly site-to-site transfer quantities.  Variables
per site-week: net inventory I (free sign), its decomposition IP/IM (positive
and shortfall parts) and IS/IE (safety-stock vs excess split of IP), receiver
activation flag Y, origin fixed-cost flag Z, plus per-lane quantities X and
lane-open flags W.  Constraint rows carry family tags (1a..1l) so any row can
be traced back to its place in the formulation and its site/week indices.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .config import NetworkConfig

FEAS_TOL = 1e-6
SNAP_TOL = 1e-6

KINDS = ("X", "W", "Y", "Z", "I", "IP", "IM", "IS", "IE")


class SolutionIntegrityError(RuntimeError):
    """A recomputed constraint row is violated beyond tolerance."""


@dataclass(frozen=True)
class VarIndex:
    kind: str
    src_site: str | None
    dst_site: str | None
    week: object
    col: int

    def name(self) -> str:
        if self.kind in ("X", "W"):
            return f"{self.kind}[{self.src_site}->{self.dst_site},{self.week}]"
        return f"{self.kind}[{self.src_site},{self.week}]"


class VarMap:
    """Bijection between (kind, sites, week) tuples and dense column ids."""

    def __init__(self):
        self.by_col: list[VarIndex] = []
        self._ids: dict[tuple, int] = {}

    def add(self, kind, src, dst, week) -> int:
        col = len(self.by_col)
        vi = VarIndex(kind, src, dst, week, col)
        self.by_col.append(vi)
        key = (kind, src, dst, week)
        assert key not in self._ids, f"duplicate variable {key}"
        self._ids[key] = col
        return col

    def col(self, kind, src, dst, week) -> int:
        return self._ids[(kind, src, dst, week)]

    def lane(self, src, dst, week) -> int:
        return self._ids[("X", src, dst, week)]

    def site_var(self, kind, site, week) -> int:
        return self._ids[(kind, site, None, week)]

    def __len__(self):
        return len(self.by_col)


@dataclass
class MilpInstance:
    """Language-neutral MILP: bounded columns, labeled rows, maximize sense."""

    n_cols: int
    lower: np.ndarray
    upper: np.ndarray
    is_integer: np.ndarray      # bool per column
    objective: np.ndarray       # maximize c.x
    col_names: list[str]
    row_cols: list[np.ndarray]  # column ids per row
    row_coefs: list[np.ndarray]
    row_rels: list[str]         # each "<=", "=", ">="
    row_rhs: list[float]
    row_labels: list[str]
    sense: str = "max"

    def add_row(self, cols, coefs, rel, rhs, label) -> None:
        cols = np.asarray(cols, dtype=np.intp)
        assert rel in ("<=", "=", ">=")
        assert cols.size == 0 or (cols.min() >= 0 and cols.max() < self.n_cols)
        self.row_cols.append(cols)
        self.row_coefs.append(np.asarray(coefs, dtype=float))
        self.row_rels.append(rel)
        self.row_rhs.append(float(rhs))
        self.row_labels.append(label)

    @property
    def n_rows(self) -> int:
        return len(self.row_rhs)

    def dense_matrix(self) -> np.ndarray:
        a = np.zeros((self.n_rows, self.n_cols))
        for r, (cols, coefs) in enumerate(zip(self.row_cols, self.row_coefs)):
            a[r, cols] += coefs
        return a

    def row_activity(self, row: int, x: np.ndarray) -> float:
        return float(self.row_coefs[row] @ x[self.row_cols[row]])

    def check_point(self, x: np.ndarray, tol: float = FEAS_TOL,
                    int_aware: bool = False) -> list[str]:
        """Labels of all rows/bounds the point violates beyond tol.

        With int_aware, each row's tolerance widens by the slack that
        rounding its integer columns by up to tol can introduce.
        """
        bad = []
        for j in range(self.n_cols):
            if x[j] < self.lower[j] - tol or x[j] > self.upper[j] + tol:
                bad.append(f"bound:{self.col_names[j]}")
        for r in range(self.n_rows):
            act = self.row_activity(r, x)
            rel, rhs = self.row_rels[r], self.row_rhs[r]
            row_tol = tol
            if int_aware:
                coefs, cols = self.row_coefs[r], self.row_cols[r]
                row_tol += tol * float(
                    np.abs(coefs[self.is_integer[cols]]).sum())
            if rel == "<=" and act > rhs + row_tol:
                bad.append(self.row_labels[r])
            elif rel == ">=" and act < rhs - row_tol:
                bad.append(self.row_labels[r])
            elif rel == "=" and abs(act - rhs) > row_tol:
                bad.append(self.row_labels[r])
        return bad

    def dump(self) -> str:
        """Plain-text debug format, one constraint per line with its tag."""
        out = io.StringIO()
        out.write("milp-debug 1\n")
        out.write(f"sense {self.sense}\n")
        out.write(f"cols {self.n_cols}\n")
        for j in range(self.n_cols):
            flag = " int" if self.is_integer[j] else ""
            out.write(f"col {self.col_names[j]} lb {self.lower[j]:.12g} "
                      f"ub {self.upper[j]:.12g} obj {self.objective[j]:.12g}{flag}\n")
        for r in range(self.n_rows):
            terms = " ".join(
                f"{c:+.12g}*{self.col_names[j]}"
                for j, c in zip(self.row_cols[r], self.row_coefs[r]))
            out.write(f"row {self.row_labels[r]} : {terms} "
                      f"{self.row_rels[r]} {self.row_rhs[r]:.12g}\n")
        return out.getvalue()

    @classmethod
    def parse(cls, text: str) -> "MilpInstance":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("milp-debug"):
            raise ValueError("not a milp-debug document")
        sense = lines[1].split()[1]
        n = int(lines[2].split()[1])
        names, lbs, ubs, objs, ints = [], [], [], [], []
        rows = []
        for ln in lines[3:]:
            parts = ln.split()
            if parts[0] == "col":
                names.append(parts[1])
                lbs.append(float(parts[3]))
                ubs.append(float(parts[5]))
                objs.append(float(parts[7]))
                ints.append(len(parts) > 8 and parts[8] == "int")
            elif parts[0] == "row":
                label = parts[1]
                assert parts[2] == ":"
                rel_idx = next(i for i, p in enumerate(parts)
                               if p in ("<=", "=", ">="))
                rhs = float(parts[rel_idx + 1])
                cols, coefs = [], []
                for term in parts[3:rel_idx]:
                    coef, name = term.split("*", 1)
                    cols.append(names.index(name))
                    coefs.append(float(coef))
                rows.append((cols, coefs, parts[rel_idx], rhs, label))
        inst = cls(
            n_cols=n, lower=np.array(lbs), upper=np.array(ubs),
            is_integer=np.array(ints, dtype=bool), objective=np.array(objs),
            col_names=names, row_cols=[], row_coefs=[], row_rels=[],
            row_rhs=[], row_labels=[], sense=sense)
        for cols, coefs, rel, rhs, label in rows:
            inst.add_row(cols, coefs, rel, rhs, label)
        return inst


@dataclass
class PlanSolution:
    """Solver output translated into an auditable, canonical plan."""

    status: str                   # Optimal | FeasibleWithGap | Infeasible | Unbounded | TimeLimit
    objective: float
    gap: float
    transfers: np.ndarray         # (n_sites, n_sites, n_weeks), src x dst x week
    inventory: np.ndarray         # (n_sites, n_weeks) net inventory I
    inv_positive: np.ndarray      # IP
    inv_shortfall: np.ndarray     # IM
    inv_safety: np.ndarray        # IS
    inv_excess: np.ndarray        # IE
    receiver_active: np.ndarray   # Y, bool (n_sites, n_weeks)
    origin_active: np.ndarray     # Z, bool
    nodes_explored: int = 0
    lp_solves: int = 0
    wall_time: float = 0.0

    def lanes(self, cfg: NetworkConfig, tol: float = SNAP_TOL):
        """Non-zero transfer triples (src, dst, week_label, qty)."""
        out = []
        for a in range(cfg.n_sites):
            for b in range(cfg.n_sites):
                for t in range(cfg.n_weeks):
                    q = self.transfers[a, b, t]
                    if q > tol:
                        out.append((cfg.sites[a], cfg.sites[b], cfg.weeks[t], float(q)))
        return out

    def to_doc(self, cfg: NetworkConfig) -> dict:
        lanes = {}
        for src, dst, week, qty in self.lanes(cfg):
            lanes.setdefault(src, {}).setdefault(dst, {})[str(week)] = qty
        series = lambda arr: {s: [float(v) for v in arr[i]]
                              for i, s in enumerate(cfg.sites)}
        return {
            "status": self.status,
            "objective": self.objective,
            "gap": self.gap,
            "transfers": lanes,
            "inventory": series(self.inventory),
            "inv_positive": series(self.inv_positive),
            "inv_shortfall": series(self.inv_shortfall),
            "inv_safety": series(self.inv_safety),
            "inv_excess": series(self.inv_excess),
            "receiver_active": {s: [bool(v) for v in self.receiver_active[i]]
                                for i, s in enumerate(cfg.sites)},
            "origin_active": {s: [bool(v) for v in self.origin_active[i]]
                              for i, s in enumerate(cfg.sites)},
            "stats": {"nodes_explored": self.nodes_explored,
                      "lp_solves": self.lp_solves,
                      "wall_time": self.wall_time},
        }


def tighten_big_m(cfg: NetworkConfig) -> np.ndarray:
    """Per-week cap on any conceivable lane flow.

    By week t no lane can carry more than all positive initial stock plus
    everything received anywhere so far, so that total is a valid activation
    bound that stays as small as the data allows.
    """
    base = max(0.0, float(np.maximum(cfg.initial_inventory, 0.0).sum()))
    cum_receipts = np.cumsum(cfg.receipts.sum(axis=0))
    per_week = base + cum_receipts
    return np.tile(per_week, (cfg.n_sites, 1))


def canonical_decompose(inv: float, safety: float) -> tuple[float, float, float, float]:
    """Split net inventory into (positive, shortfall, safety, excess) parts."""
    ip = max(inv, 0.0)
    im = max(-inv, 0.0)
    is_ = min(ip, safety)
    ie = ip - is_
    return ip, im, is_, ie


def build_model(cfg: NetworkConfig) -> tuple[MilpInstance, VarMap]:
    """Build the transfer MILP for a validated scenario.

    Weekly balance links inventory to receipts, inbound and outbound
    transfers, and demand.  Receivers must be activated (Y) and active
    receivers cannot ship the same week; positive lanes need an open flag W,
    at least the minimum quantity, and an origin fixed-cost flag Z.  Transfers
    are forbidden in the first ``frozen_weeks`` weeks via zero upper bounds.
    """
    n, T = cfg.n_sites, cfg.n_weeks
    frozen = cfg.frozen_weeks
    big_m = tighten_big_m(cfg)
    m_week = big_m[0] if n else np.zeros(T)

    vm = VarMap()
    sites = cfg.sites
    for a in sites:
        for b in sites:
            if a == b:
                continue
            for t in range(T):
                vm.add("X", a, b, cfg.weeks[t])
    for a in sites:
        for b in sites:
            if a == b:
                continue
            for t in range(T):
                vm.add("W", a, b, cfg.weeks[t])
    for kind in ("Y", "Z", "I", "IP", "IM", "IS", "IE"):
        for s in sites:
            for t in range(T):
                vm.add(kind, s, None, cfg.weeks[t])

    n_cols = len(vm)
    lower = np.zeros(n_cols)
    upper = np.zeros(n_cols)
    integer = np.zeros(n_cols, dtype=bool)
    obj = np.zeros(n_cols)

    # finite inventory envelopes keep every column bounded for the solver
    cum_d = np.cumsum(cfg.demand, axis=1)
    cum_r = np.cumsum(cfg.receipts, axis=1)
    cum_m = np.cumsum(m_week)
    inv_hi = cfg.initial_inventory[:, None] + cum_r + cum_m[None, :]
    inv_lo = cfg.initial_inventory[:, None] - cum_d - cum_m[None, :]

    for vi in vm.by_col:
        j = vi.col
        t = cfg.week_index(vi.week)
        if vi.kind == "X":
            upper[j] = 0.0 if t < frozen else m_week[t]
        elif vi.kind in ("W", "Z"):
            integer[j] = True
            upper[j] = 0.0 if t < frozen else 1.0
        elif vi.kind == "Y":
            integer[j] = True
            upper[j] = 1.0
        else:
            i = cfg.site_index(vi.src_site)
            if vi.kind == "I":
                lower[j] = min(inv_lo[i, t], 0.0)
                upper[j] = max(inv_hi[i, t], 0.0)
            elif vi.kind == "IP":
                upper[j] = max(inv_hi[i, t], 0.0)
            elif vi.kind == "IM":
                upper[j] = max(-inv_lo[i, t], 0.0)
            elif vi.kind == "IS":
                upper[j] = cfg.safety_stock[i, t]
            elif vi.kind == "IE":
                upper[j] = max(inv_hi[i, t], 0.0)
        if vi.kind == "IS":
            i = cfg.site_index(vi.src_site)
            obj[j] = cfg.ss_benefit[i, t]
        elif vi.kind == "IM":
            i = cfg.site_index(vi.src_site)
            obj[j] = -cfg.shortage_penalty[i, t]
        elif vi.kind == "Z":
            i = cfg.site_index(vi.src_site)
            obj[j] = -cfg.fixed_ship_cost[i, t]

    inst = MilpInstance(
        n_cols=n_cols, lower=lower, upper=upper, is_integer=integer,
        objective=obj, col_names=[vi.name() for vi in vm.by_col],
        row_cols=[], row_coefs=[], row_rels=[], row_rhs=[], row_labels=[])

    others = {s: [o for o in sites if o != s] for s in sites}

    # 1b/1c: weekly inventory balance (receipts and outbound flow included)
    for i, s in enumerate(sites):
        for t, w in enumerate(cfg.weeks):
            cols = [vm.site_var("I", s, w)]
            coefs = [1.0]
            rhs = cfg.receipts[i, t] - cfg.demand[i, t]
            if t == 0:
                rhs += cfg.initial_inventory[i]
                tag = f"1c:i={s},t={w}"
            else:
                cols.append(vm.site_var("I", s, cfg.weeks[t - 1]))
                coefs.append(-1.0)
                tag = f"1b:i={s},t={w}"
            for o in others[s]:
                cols.append(vm.lane(o, s, w))
                coefs.append(-1.0)
                cols.append(vm.lane(s, o, w))
                coefs.append(1.0)
            inst.add_row(cols, coefs, "=", rhs, tag)

    for a in sites:
        for b in others[a]:
            for t, w in enumerate(cfg.weeks):
                x = vm.lane(a, b, w)
                m = m_week[t]
                # 1d: receiving requires the destination to be active
                inst.add_row([x, vm.site_var("Y", b, w)], [1.0, -m], "<=", 0.0,
                             f"1d:i={a},i'={b},t={w}")
                # 1e: an active receiver cannot ship out the same week
                inst.add_row([x, vm.site_var("Y", a, w)], [1.0, m], "<=", m,
                             f"1e:i={a},i'={b},t={w}")
                # 1h.lane / 1i: open-lane flag and per-lane minimum quantity
                wcol = vm.col("W", a, b, w)
                inst.add_row([x, wcol], [1.0, -m], "<=", 0.0,
                             f"1h.lane:i={a},i'={b},t={w}")
                inst.add_row([x, wcol], [1.0, -cfg.min_ship_qty], ">=", 0.0,
                             f"1i:i={a},i'={b},t={w}")
                inst.add_row([wcol, vm.site_var("Z", a, w)], [1.0, -1.0],
                             "<=", 0.0, f"1i.link:i={a},i'={b},t={w}")

    for i, s in enumerate(sites):
        for t, w in enumerate(cfg.weeks):
            # 1f/1g: decomposition identities
            inst.add_row(
                [vm.site_var("I", s, w), vm.site_var("IP", s, w),
                 vm.site_var("IM", s, w)], [1.0, -1.0, 1.0], "=", 0.0,
                f"1f:i={s},t={w}")
            inst.add_row(
                [vm.site_var("IP", s, w), vm.site_var("IS", s, w),
                 vm.site_var("IE", s, w)], [1.0, -1.0, -1.0], "=", 0.0,
                f"1g:i={s},t={w}")
            # 1h: outbound total requires the origin fixed-cost flag
            cols = [vm.lane(s, o, w) for o in others[s]]
            cols.append(vm.site_var("Z", s, w))
            coefs = [1.0] * (len(cols) - 1) + [-m_week[t]]
            inst.add_row(cols, coefs, "<=", 0.0, f"1h:i={s},t={w}")
            # 1k: safety-stock portion cannot exceed the target
            inst.add_row([vm.site_var("IS", s, w)], [1.0], "<=",
                         cfg.safety_stock[i, t], f"1k:i={s},t={w}")

    return inst, vm


def extract_solution(cfg: NetworkConfig, var_values, model=None,
                     status: str = "Optimal", gap: float = 0.0,
                     stats: dict | None = None) -> PlanSolution:
    """Turn raw column values into a canonical plan.

    Tiny transfers are snapped to zero, flags rounded, and the inventory
    decomposition recomputed canonically so solver-arbitrary splits (possible
    when a benefit or penalty coefficient is zero) come out deterministic.
    Raises SolutionIntegrityError if the cleaned point violates any row.
    """
    if model is None:
        model = build_model(cfg)
    inst, vm = model
    x = np.asarray(var_values, dtype=float)
    if x.shape != (inst.n_cols,):
        raise ValueError(f"expected {inst.n_cols} values, got {x.shape}")

    n, T = cfg.n_sites, cfg.n_weeks
    transfers = np.zeros((n, n, T))
    inventory = np.zeros((n, T))
    y = np.zeros((n, T), dtype=bool)
    z = np.zeros((n, T), dtype=bool)
    for vi in vm.by_col:
        t = cfg.week_index(vi.week)
        if vi.kind == "X":
            q = x[vi.col]
            if q > SNAP_TOL:
                transfers[cfg.site_index(vi.src_site),
                          cfg.site_index(vi.dst_site), t] = q
        elif vi.kind == "I":
            inventory[cfg.site_index(vi.src_site), t] = x[vi.col]
        elif vi.kind == "Y":
            y[cfg.site_index(vi.src_site), t] = x[vi.col] > 0.5
        elif vi.kind == "Z":
            z[cfg.site_index(vi.src_site), t] = x[vi.col] > 0.5

    ip = np.maximum(inventory, 0.0)
    im = np.maximum(-inventory, 0.0)
    is_ = np.minimum(ip, cfg.safety_stock)
    ie = ip - is_

    # verify the canonicalized point still satisfies the instance
    cleaned = x.copy()
    for vi in vm.by_col:
        t = cfg.week_index(vi.week)
        if vi.kind == "X":
            cleaned[vi.col] = transfers[cfg.site_index(vi.src_site),
                                        cfg.site_index(vi.dst_site), t]
        elif vi.kind == "W":
            cleaned[vi.col] = round(min(max(x[vi.col], 0.0), 1.0))
        elif vi.kind == "Y":
            cleaned[vi.col] = 1.0 if y[cfg.site_index(vi.src_site), t] else 0.0
        elif vi.kind == "Z":
            cleaned[vi.col] = 1.0 if z[cfg.site_index(vi.src_site), t] else 0.0
        else:
            i = cfg.site_index(vi.src_site)
            cleaned[vi.col] = {"I": inventory, "IP": ip, "IM": im,
                               "IS": is_, "IE": ie}[vi.kind][i, t]
    bad = inst.check_point(cleaned, tol=FEAS_TOL, int_aware=True)
    if bad:
        raise SolutionIntegrityError(
            f"solution violates {len(bad)} rows, first: {bad[0]}")

    objective = float(inst.objective @ cleaned)
    stats = stats or {}
    return PlanSolution(
        status=status, objective=objective, gap=gap, transfers=transfers,
        inventory=inventory, inv_positive=ip, inv_shortfall=im,
        inv_safety=is_, inv_excess=ie, receiver_active=y, origin_active=z,
        nodes_explored=stats.get("nodes", 0), lp_solves=stats.get("lp_solves", 0),
        wall_time=stats.get("wall_time", 0.0))
