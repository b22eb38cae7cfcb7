"""Exact MILP solving: best-first branch and bound over the LP relaxation,
plus a brute-force enumeration oracle for small instances.

Branching follows the most-fractional column (ties to the lowest id); the
search pops the best-bound node, with a depth-first plunge every eighth pop
to find incumbents early.  All LP relaxations are solved cold.  The oracle
enumerates every assignment of the integer columns with interval propagation
to discard impossible subtrees, so it stays exact while skipping work.
"""

from __future__ import annotations

import itertools
import math
import random
import time
from dataclasses import dataclass, field

import numpy as np

from .lp import NumericBreakdownError, solve_lp

INT_TOL = 1e-6


class OracleGuardError(ValueError):
    """Brute force refused: too many integer columns to enumerate."""


@dataclass
class SolverOptions:
    rel_gap: float = 1e-6
    abs_gap: float = 1e-9
    time_limit: float = 300.0
    node_limit: int = 1_000_000
    branch_rule: str = "most-fractional"     # or "pseudo-cost"
    search: str = "best-first"               # or "depth-first"
    seed: int = 0
    plunge_every: int = 8
    dive_up_threshold: float = 0.005   # plunge opens a flag only above this
    max_dive_steps: int = 100
    progress: object = None     # optional callback(nodes, incumbent, bound)

    def validate(self) -> None:
        if self.rel_gap < 0 or self.abs_gap < 0:
            raise ValueError("gap targets must be >= 0")
        if self.time_limit < 1 or self.node_limit < 1:
            raise ValueError("limits must be >= 1")
        if self.branch_rule not in ("most-fractional", "pseudo-cost"):
            raise ValueError(f"unknown branch rule {self.branch_rule!r}")
        if self.search not in ("best-first", "depth-first"):
            raise ValueError(f"unknown search order {self.search!r}")


@dataclass
class MilpResult:
    status: str          # Optimal | FeasibleWithGap | Infeasible | Unbounded | TimeLimit
    objective: float
    x: np.ndarray | None
    best_bound: float
    gap: float
    nodes: int
    lp_solves: int
    wall_time: float
    bound_history: list = field(default_factory=list)

    @property
    def has_solution(self) -> bool:
        return self.x is not None


def _fractionality(x, int_cols):
    vals = x[int_cols]
    return np.abs(vals - np.round(vals))


def _relative_gap(bound, incumbent):
    return (bound - incumbent) / max(1.0, abs(incumbent))


def solve_milp(instance, opts: SolverOptions | None = None) -> MilpResult:
    """Branch and bound to the requested gap; deterministic for a fixed seed."""
    opts = opts or SolverOptions()
    opts.validate()
    start = time.monotonic()
    rng = random.Random(opts.seed)

    int_cols = np.nonzero(instance.is_integer)[0]
    sense_max = instance.sense == "max"
    if not sense_max:
        raise ValueError("solve_milp expects a maximize-sense instance")

    lp_solves = 0
    nodes = 0
    incumbent_x = None
    incumbent_obj = -math.inf
    bound_history = []
    # per-column average objective degradation per unit of fractional
    # distance, split by direction: {col: [down_sum, down_n, up_sum, up_n]}
    pseudo: dict[int, list] = {}

    # open nodes: (-parent_bound, tiebreak, seq, depth, lower, upper, meta)
    # where meta = (branched col, went_up, parent objective, frac distance)
    seq = itertools.count()
    heap = [(-math.inf, rng.random(), next(seq), 0,
             instance.lower.copy(), instance.upper.copy(), None)]
    global_bound = math.inf
    root_infeasible = False

    def record_pseudo(meta, child_obj):
        if meta is None or opts.branch_rule != "pseudo-cost":
            return
        col, went_up, parent_obj, dist = meta
        if not np.isfinite(parent_obj) or not np.isfinite(child_obj):
            return
        degrade = max(0.0, parent_obj - child_obj) / max(dist, 1e-6)
        entry = pseudo.setdefault(col, [0.0, 0, 0.0, 0])
        if went_up:
            entry[2] += degrade
            entry[3] += 1
        else:
            entry[0] += degrade
            entry[1] += 1

    def make_result(status):
        wall = time.monotonic() - start
        if incumbent_x is None:
            bound = -math.inf if status == "Infeasible" else global_bound
            return MilpResult(status, -math.inf, None, bound, math.inf,
                              nodes, lp_solves, wall, bound_history)
        gap = max(0.0, _relative_gap(global_bound, incumbent_obj))
        return MilpResult(status, incumbent_obj, incumbent_x, global_bound,
                          gap, nodes, lp_solves, wall, bound_history)

    def gap_reached():
        if incumbent_x is None:
            return False
        return (_relative_gap(global_bound, incumbent_obj) <= opts.rel_gap
                or global_bound - incumbent_obj <= opts.abs_gap)

    def evaluate(lo, hi, parent_bound):
        """Solve one node LP; returns (bound, lp or None, 'leaf'/'branch')."""
        nonlocal lp_solves, nodes, incumbent_x, incumbent_obj, root_infeasible
        lp = solve_lp(instance, lower=lo, upper=hi)
        lp_solves += 1
        nodes += 1
        if opts.progress is not None:
            opts.progress(nodes, incumbent_obj, global_bound)
        if lp.status == "Infeasible":
            if nodes == 1:
                root_infeasible = True
            return -math.inf, None, "leaf"
        if lp.status == "Unbounded":
            raise _UnboundedModel()
        bound = min(lp.objective, parent_bound)
        if incumbent_x is not None and bound <= incumbent_obj + opts.abs_gap:
            return bound, lp, "leaf"
        frac = _fractionality(lp.x, int_cols) if int_cols.size else np.array([])
        if frac.size == 0 or frac.max(initial=0.0) <= INT_TOL:
            x = lp.x.copy()
            if int_cols.size:
                x[int_cols] = np.round(x[int_cols])
            obj = float(instance.objective @ x)
            if obj > incumbent_obj + 1e-12:
                incumbent_obj = obj
                incumbent_x = x
            return bound, lp, "leaf"
        return bound, lp, "branch"

    def branch_column(lp):
        """Branch variable choice per the configured rule, lowest id on ties."""
        frac = _fractionality(lp.x, int_cols)
        dist = np.minimum(frac, 1.0 - frac)
        cand = np.nonzero(frac > INT_TOL)[0]
        if opts.branch_rule == "pseudo-cost" and pseudo:
            all_avgs = [s / n for e in pseudo.values()
                        for s, n in ((e[0], e[1]), (e[2], e[3])) if n]
            default = sum(all_avgs) / len(all_avgs) if all_avgs else 1.0
            best_score, best_col = -1.0, None
            for j in cand:
                col = int(int_cols[j])
                f = lp.x[col] - math.floor(lp.x[col])
                e = pseudo.get(col)
                down = (e[0] / e[1]) if e and e[1] else default
                up = (e[2] / e[3]) if e and e[3] else default
                score = max(down * f, 1e-9) * max(up * (1.0 - f), 1e-9)
                if score > best_score + 1e-15 or (
                        abs(score - best_score) <= 1e-15
                        and (best_col is None or col < best_col)):
                    best_score, best_col = score, col
            return best_col
        best = dist[cand].max()
        tied = cand[dist[cand] >= best - 1e-12]
        return int(int_cols[tied.min()])

    def dive_direction(col, ceil_v, floor_v, want_up, lo, hi):
        """Steer the dive away from directions the rows already forbid.

        Degenerate relaxations park flag columns at arbitrary fractional
        values; rounding against what the rows imply would doom the whole
        dive to an infeasible leaf.  Propagation runs on scratch copies and
        never alters the node itself.
        """
        plo, phi = lo.copy(), hi.copy()
        if not propagate_bounds(instance, plo, phi, passes=3):
            return want_up
        if want_up and ceil_v > phi[col] + 1e-9:
            return False
        if not want_up and floor_v < plo[col] - 1e-9:
            return True
        return want_up

    def children_of(lp, lo, hi, col):
        xval = lp.x[col]
        down_hi = hi.copy()
        down_hi[col] = math.floor(xval + INT_TOL)
        up_lo = lo.copy()
        up_lo[col] = math.ceil(xval - INT_TOL)
        down = (lo.copy(), down_hi) if lo[col] <= down_hi[col] + 1e-12 else None
        up = (up_lo, hi.copy()) if up_lo[col] <= hi[col] + 1e-12 else None
        return down, up

    try:
        while heap:
            if time.monotonic() - start > opts.time_limit:
                return make_result("TimeLimit")
            if nodes >= opts.node_limit:
                return make_result("FeasibleWithGap" if incumbent_x is not None
                                   else "Infeasible")

            if opts.search == "depth-first":
                pick = max(range(len(heap)),
                           key=lambda i: (heap[i][3], -heap[i][0]))
            else:
                pick = min(range(len(heap)), key=lambda i: heap[i][:3])
            neg_parent, _, _, depth, lo, hi, meta = heap.pop(pick)
            parent_bound = -neg_parent

            if incumbent_x is not None and parent_bound <= incumbent_obj + opts.abs_gap:
                global_bound = _current_bound(heap, incumbent_obj)
                bound_history.append(global_bound)
                if gap_reached():
                    return make_result("Optimal")
                continue

            plunge = opts.plunge_every and nodes % opts.plunge_every == 0
            bound, lp, kind = evaluate(lo, hi, parent_bound)
            record_pseudo(meta, bound)
            if root_infeasible:
                return make_result("Infeasible")

            # depth-first plunge: follow the LP's support to an integral
            # leaf, parking the opposite child of every split in the queue
            dive_steps = 0
            while kind == "branch":
                col = branch_column(lp)
                down, up = children_of(lp, lo, hi, col)
                frac = lp.x[col] - math.floor(lp.x[col])
                toward_up = frac > opts.dive_up_threshold
                if plunge:
                    toward_up = dive_direction(
                        col, math.ceil(lp.x[col] - INT_TOL),
                        math.floor(lp.x[col] + INT_TOL), toward_up, lo, hi)
                follow, park = (up, down) if toward_up else (down, up)
                follow_up, park_up = toward_up, not toward_up
                if follow is None:
                    follow, park = park, None
                    follow_up = park_up
                dist_of = lambda went_up: (1.0 - frac) if went_up else frac
                meta_follow = (col, follow_up, bound, dist_of(follow_up))
                meta_park = (col, park_up, bound, dist_of(park_up))
                if not plunge or dive_steps >= opts.max_dive_steps:
                    for child, child_meta in ((follow, meta_follow),
                                              (park, meta_park)):
                        if child is not None:
                            heap.append((-bound, rng.random(), next(seq),
                                         depth + 1, child[0], child[1],
                                         child_meta))
                    break
                if time.monotonic() - start > opts.time_limit:
                    return make_result("TimeLimit")
                node_bound = bound
                lo, hi = follow
                depth += 1
                dive_steps += 1
                bound, lp, kind = evaluate(lo, hi, node_bound)
                record_pseudo(meta_follow, bound)
                if kind == "leaf" and lp is None and park is not None:
                    # followed side infeasible: resume the dive on the other
                    lo, hi = park
                    park = None
                    bound, lp, kind = evaluate(lo, hi, node_bound)
                    record_pseudo(meta_park, bound)
                if park is not None:
                    heap.append((-node_bound, rng.random(), next(seq), depth,
                                 park[0], park[1], meta_park))

            global_bound = _current_bound(heap, incumbent_obj)
            bound_history.append(global_bound)
            if gap_reached():
                return make_result("Optimal")
    except _UnboundedModel:
        return MilpResult("Unbounded", math.inf, None, math.inf, math.inf,
                          nodes, lp_solves, time.monotonic() - start,
                          bound_history)

    # tree exhausted: incumbent (if any) is proven optimal
    global_bound = incumbent_obj if incumbent_x is not None else -math.inf
    bound_history.append(global_bound)
    return make_result("Optimal" if incumbent_x is not None else "Infeasible")


class _UnboundedModel(Exception):
    pass


def propagate_bounds(instance, lo, hi, passes: int = 10) -> bool:
    """Tighten lo/hi in place toward a fixpoint; False on proven infeasibility.

    Pure interval arithmetic over the rows: no objective reasoning, so any
    assignment it rules out is infeasible for every objective.
    """
    rows = [(instance.row_cols[r], instance.row_coefs[r],
             instance.row_rels[r], instance.row_rhs[r])
            for r in range(instance.n_rows)]
    is_int = instance.is_integer
    for _ in range(passes):
        changed = False
        for cols, coefs, rel, rhs in rows:
            l, u = lo[cols], hi[cols]
            term_min = np.where(coefs > 0, coefs * l, coefs * u)
            term_max = np.where(coefs > 0, coefs * u, coefs * l)
            smin, smax = term_min.sum(), term_max.sum()
            if rel in ("<=", "=") and smin > rhs + 1e-9:
                return False
            if rel in (">=", "=") and smax < rhs - 1e-9:
                return False
            for k in range(len(cols)):
                j, cjk = int(cols[k]), coefs[k]
                if cjk == 0:
                    continue
                min_others = smin - term_min[k]
                max_others = smax - term_max[k]
                new_lo, new_hi = lo[j], hi[j]
                if rel in ("<=", "="):
                    cap = (rhs - min_others) / cjk
                    if cjk > 0:
                        new_hi = min(new_hi, cap)
                    else:
                        new_lo = max(new_lo, cap)
                if rel in (">=", "="):
                    floor_ = (rhs - max_others) / cjk
                    if cjk > 0:
                        new_lo = max(new_lo, floor_)
                    else:
                        new_hi = min(new_hi, floor_)
                if is_int[j]:
                    new_lo = math.ceil(new_lo - 1e-9)
                    new_hi = math.floor(new_hi + 1e-9)
                if new_lo > lo[j] + 1e-12 or new_hi < hi[j] - 1e-12:
                    lo[j], hi[j] = new_lo, new_hi
                    if new_lo > new_hi + 1e-9:
                        return False
                    changed = True
        if not changed:
            return True
    return True


def _current_bound(heap, incumbent_obj):
    bound = incumbent_obj if incumbent_obj > -math.inf else -math.inf
    for entry in heap:
        bound = max(bound, -entry[0])
    return bound


# ---------------------------------------------------------------------------
# brute-force oracle


def brute_force_milp(instance, guard: int = 20) -> MilpResult:
    """Enumerate all assignments of the integer columns; exact by construction.

    Interval propagation discards assignments that cannot satisfy the rows
    (a pure feasibility argument, no bounding by objective), so the search
    space stays the full 2^n while most subtrees die early.  Hard-guarded
    to ``guard`` integer columns.
    """
    start = time.monotonic()
    int_cols = [int(j) for j in np.nonzero(instance.is_integer)[0]]
    if len(int_cols) > guard:
        raise OracleGuardError(
            f"{len(int_cols)} integer columns exceed the enumeration guard "
            f"({guard})")

    best_obj = -math.inf
    best_x = None
    lp_solves = 0
    leaves = 0

    def descend(pos, lo, hi):
        nonlocal best_obj, best_x, lp_solves, leaves
        while pos < len(int_cols) and lo[int_cols[pos]] == hi[int_cols[pos]]:
            pos += 1
        if pos == len(int_cols):
            leaves += 1
            lp = solve_lp(instance, lower=lo, upper=hi)
            lp_solves += 1
            if lp.status == "Optimal":
                x = lp.x.copy()
                x[int_cols] = np.round(x[int_cols])
                obj = float(instance.objective @ x)
                if obj > best_obj:
                    best_obj, best_x = obj, x
            return
        j = int_cols[pos]
        for v in range(int(lo[j]), int(hi[j]) + 1):
            clo, chi = lo.copy(), hi.copy()
            clo[j] = chi[j] = float(v)
            if propagate_bounds(instance, clo, chi):
                descend(pos + 1, clo, chi)

    lo0 = instance.lower.copy().astype(float)
    hi0 = instance.upper.copy().astype(float)
    if propagate_bounds(instance, lo0, hi0):
        descend(0, lo0, hi0)

    wall = time.monotonic() - start
    if best_x is None:
        return MilpResult("Infeasible", -math.inf, None, -math.inf, math.inf,
                          leaves, lp_solves, wall)
    return MilpResult("Optimal", best_obj, best_x, best_obj, 0.0,
                      leaves, lp_solves, wall)
