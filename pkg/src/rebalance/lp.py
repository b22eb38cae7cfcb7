"""Two-phase primal simplex over bounded variables, dense tableau.

Handles finite lower/upper bounds on every structural column natively
(nonbasic variables rest at either bound; bound flips avoid pivots), adds
slack columns per row and artificial columns only where the initial slack
basis is infeasible.  Dantzig pricing with a permanent switch to Bland's
rule after a run of degenerate pivots.  Optimal results report row duals
recomputed from a fresh factorization of the final basis, so the duality
check is numerically independent of the pivoted tableau.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor, lu_solve
from scipy.linalg.blas import dger

PIV_TOL = 1e-9
RC_TOL = 1e-9
FEAS_TOL = 1e-8
AT_LB, AT_UB, BASIC = 0, 1, 2


class NumericBreakdownError(RuntimeError):
    """Simplex could not make progress even under Bland's rule."""


@dataclass
class LpResult:
    status: str                     # Optimal | Infeasible | Unbounded
    objective: float
    x: np.ndarray                   # structural column values
    duals: np.ndarray               # one multiplier per instance row
    dual_objective: float
    iterations: int
    certificate: np.ndarray | None = None   # row combination proving infeasibility
    max_bound_violation: float = 0.0
    max_row_violation: float = 0.0
    max_comp_slack: float = 0.0     # worst complementary-slackness product


@dataclass
class _Tableau:
    T: np.ndarray          # (m, ntot) working matrix, Fortran order
    bbar: np.ndarray       # (m,) basic values
    zrow: np.ndarray       # (ntot,) reduced costs
    zval: float
    basis: np.ndarray      # (m,) column basic in each row
    vstat: np.ndarray      # (ntot,) AT_LB / AT_UB / BASIC
    lower: np.ndarray
    upper: np.ndarray
    iterations: int = 0
    degenerate: int = 0
    bland: bool = False
    stats: dict = field(default_factory=dict)


def _pivot(tab: _Tableau, r: int, q: int) -> None:
    T = tab.T
    piv = T[r, q]
    pr = T[r] / piv
    col = T[:, q].copy()
    dger(-1.0, col, pr, a=T, overwrite_a=1)
    T[r] = pr
    tab.zrow -= tab.zrow[q] * pr


def _nonbasic_value(tab, j):
    return tab.lower[j] if tab.vstat[j] == AT_LB else tab.upper[j]


def _choose_entering(tab: _Tableau) -> int:
    z = tab.zrow
    free = tab.lower < tab.upper
    up = (tab.vstat == AT_LB) & free & (z > RC_TOL)
    down = (tab.vstat == AT_UB) & free & (z < -RC_TOL)
    if tab.bland:
        idx = np.nonzero(up | down)[0]
        return int(idx[0]) if idx.size else -1
    score = np.where(up, z, 0.0) + np.where(down, -z, 0.0)
    q = int(np.argmax(score))
    return q if score[q] > RC_TOL else -1


def _simplex_loop(tab: _Tableau, max_iters: int, phase: int) -> str:
    m = tab.bbar.size
    bland_after = 10 * (m + tab.zrow.size)
    while True:
        if tab.iterations >= max_iters:
            raise NumericBreakdownError(
                f"iteration limit {max_iters} exceeded in phase {phase}")
        q = _choose_entering(tab)
        if q < 0:
            return "optimal"
        direction = 1.0 if tab.vstat[q] == AT_LB else -1.0
        d = tab.T[:, q] * direction

        lb_b = tab.lower[tab.basis]
        ub_b = tab.upper[tab.basis]
        theta = np.full(m, np.inf)
        pos = d > PIV_TOL
        neg = d < -PIV_TOL
        with np.errstate(invalid="ignore", divide="ignore"):
            theta[pos] = (tab.bbar[pos] - lb_b[pos]) / d[pos]
            theta[neg] = (tab.bbar[neg] - ub_b[neg]) / d[neg]
        theta = np.maximum(theta, 0.0)
        flip_gap = tab.upper[q] - tab.lower[q]

        r = -1
        if m:
            r = int(np.argmin(theta))
            theta_min = theta[r]
        else:
            theta_min = np.inf
        if flip_gap <= theta_min:
            if not np.isfinite(flip_gap):
                if phase == 1:
                    raise NumericBreakdownError("unbounded auxiliary problem")
                return "unbounded"
            # bound flip, no pivot
            delta = direction * flip_gap
            if m:
                tab.bbar -= tab.T[:, q] * delta
            tab.zval += tab.zrow[q] * delta
            tab.vstat[q] = AT_UB if tab.vstat[q] == AT_LB else AT_LB
            tab.iterations += 1
            if flip_gap <= PIV_TOL:
                tab.degenerate += 1
                if tab.degenerate > bland_after:
                    tab.bland = True
            continue
        if not np.isfinite(theta_min):
            if phase == 1:
                raise NumericBreakdownError("unbounded auxiliary problem")
            return "unbounded"

        # break near-ties toward the biggest pivot for stability
        ties = np.nonzero(theta <= theta_min + 1e-9)[0]
        if tab.bland:
            r = int(ties[np.argmin(tab.basis[ties])])
        else:
            r = int(ties[np.argmax(np.abs(d[ties]))])
        if abs(tab.T[r, q]) < 1e-11:
            raise NumericBreakdownError("pivot element vanished")

        leaving = tab.basis[r]
        delta = direction * theta[r]
        new_val = _nonbasic_value(tab, q) + delta
        tab.zval += tab.zrow[q] * delta
        tab.bbar -= tab.T[:, q] * delta
        tab.bbar[r] = new_val
        # leaving variable parks on the bound it reached
        tab.vstat[leaving] = AT_LB if d[r] > 0 else AT_UB
        tab.basis[r] = q
        tab.vstat[q] = BASIC
        _pivot(tab, r, q)
        tab.iterations += 1
        if theta_min <= PIV_TOL:
            tab.degenerate += 1
            if tab.degenerate > bland_after:
                tab.bland = True
        else:
            tab.degenerate = 0


def _normalized_rows(instance):
    """Rows as a dense matrix with >= flipped to <=; cached per instance."""
    cache = getattr(instance, "_lp_cache", None)
    if cache is not None and cache[0] == instance.n_rows:
        return cache[1], cache[2], cache[3]
    m, n = instance.n_rows, instance.n_cols
    a = np.zeros((m, n))
    rhs = np.zeros(m)
    is_eq = np.zeros(m, dtype=bool)
    for r in range(m):
        sign = -1.0 if instance.row_rels[r] == ">=" else 1.0
        np.add.at(a[r], instance.row_cols[r], sign * instance.row_coefs[r])
        rhs[r] = sign * instance.row_rhs[r]
        is_eq[r] = instance.row_rels[r] == "="
    instance._lp_cache = (m, a, rhs, is_eq)
    return a, rhs, is_eq


def solve_lp(instance, lower=None, upper=None, *, max_iters=None,
             check_duality=True) -> LpResult:
    """Solve the LP relaxation of a MilpInstance (integrality ignored).

    ``lower``/``upper`` optionally override the instance's column bounds
    (used by branch and bound).  All columns must have finite bounds except
    where rows bound them; slacks of inequality rows are one-sided.
    """
    n = instance.n_cols
    lo = np.array(instance.lower if lower is None else lower, dtype=float)
    hi = np.array(instance.upper if upper is None else upper, dtype=float)
    if np.any(lo > hi + 1e-12):
        return LpResult("Infeasible", -np.inf, np.zeros(n), np.zeros(instance.n_rows),
                        -np.inf, 0, certificate=None)

    maximize = instance.sense == "max"
    c_struct = np.asarray(instance.objective, dtype=float)
    if not maximize:
        c_struct = -c_struct

    m = instance.n_rows
    a, rhs, is_eq = _normalized_rows(instance)

    # start structural nonbasics at the bound nearer zero
    start_at_ub = np.abs(hi) < np.abs(lo)
    x0 = np.where(start_at_ub, hi, lo)
    resid = rhs - a @ x0

    # columns: structural | slack per row | artificials as needed
    art_rows = [r for r in range(m)
                if (is_eq[r] and abs(resid[r]) > 0) or (not is_eq[r] and resid[r] < 0)]
    n_art = len(art_rows)
    ntot = n + m + n_art
    full = np.zeros((m, ntot), order="F")
    full[:, :n] = a
    full[np.arange(m), n + np.arange(m)] = 1.0
    slack_lo = np.zeros(m)
    slack_hi = np.where(is_eq, 0.0, np.inf)

    lower_all = np.concatenate([lo, slack_lo, np.zeros(n_art)])
    upper_all = np.concatenate([hi, slack_hi, np.full(n_art, np.inf)])
    art_sign = np.ones(n_art)
    for k, r in enumerate(art_rows):
        sgn = 1.0 if resid[r] >= 0 else -1.0
        art_sign[k] = sgn
        full[r, n + m + k] = sgn

    basis = np.array([n + r for r in range(m)], dtype=np.intp)
    vstat = np.full(ntot, AT_LB, dtype=np.int8)
    vstat[:n][start_at_ub] = AT_UB
    bbar = resid.copy()
    t0 = np.asfortranarray(full.copy())
    for k, r in enumerate(art_rows):
        basis[r] = n + m + k
        bbar[r] = abs(resid[r])
        if art_sign[k] < 0:       # T = B^-1 A with diagonal initial basis
            t0[r] *= -1.0
    vstat[basis] = BASIC

    tab = _Tableau(
        T=t0, bbar=bbar,
        zrow=np.zeros(ntot), zval=0.0, basis=basis, vstat=vstat,
        lower=lower_all, upper=upper_all)

    cap = max_iters or max(2000, 50 * (m + ntot))

    # phase 1: drive artificial infeasibility to zero
    if n_art:
        c1 = np.zeros(ntot)
        c1[n + m:] = -1.0
        tab.zrow = c1 - c1[tab.basis] @ tab.T
        tab.zval = float(c1[tab.basis] @ tab.bbar)
        _simplex_loop(tab, cap, phase=1)
        infeas = -tab.zval
        if infeas > 1e-7 * max(1.0, float(np.abs(rhs).max(initial=0.0))):
            y = -tab.zrow[n:n + m]
            cert = _verify_farkas(y, a, rhs, lo, hi, is_eq)
            return LpResult("Infeasible", -np.inf, np.zeros(n),
                            np.zeros(m), -np.inf, tab.iterations,
                            certificate=cert)
        # pin artificials to zero so they never re-enter
        tab.upper[n + m:] = 0.0
        for r in range(m):
            if tab.basis[r] >= n + m and abs(tab.bbar[r]) <= 1e-9:
                tab.bbar[r] = 0.0

    # phase 2: real objective
    c_all = np.zeros(ntot)
    c_all[:n] = c_struct
    tab.zrow = c_all - c_all[tab.basis] @ tab.T
    status = _simplex_loop(tab, cap, phase=2)
    if status == "unbounded":
        return LpResult("Unbounded", np.inf if maximize else -np.inf,
                        np.zeros(n), np.zeros(m), np.nan, tab.iterations)

    # recompute the final point and duals from a fresh factorization
    xfull = np.where(tab.vstat == AT_UB, tab.upper, tab.lower)
    xfull[~np.isfinite(xfull)] = 0.0
    xfull[tab.basis] = tab.bbar
    if m:
        bmat = full[:, tab.basis]
        try:
            lu = lu_factor(bmat)
            nb_mask = np.ones(ntot, dtype=bool)
            nb_mask[tab.basis] = False
            nb_vals = np.where(tab.vstat == AT_UB, tab.upper, tab.lower)
            nb_vals[~np.isfinite(nb_vals)] = 0.0
            rhs_eff = rhs - full[:, nb_mask] @ nb_vals[nb_mask]
            xb = lu_solve(lu, rhs_eff)
            xfull[tab.basis] = xb
            y = lu_solve(lu, c_all[tab.basis], trans=1)
        except Exception:
            y = np.zeros(m)
    else:
        y = np.zeros(m)

    x = xfull[:n]
    obj = float(c_struct @ x)

    # dual objective: y.b plus reduced-cost value of nonbasics at bounds
    rc = c_all - y @ full
    nb = np.ones(ntot, dtype=bool)
    nb[tab.basis] = False
    vals = np.where(tab.vstat == AT_UB, tab.upper, tab.lower)
    vals[~np.isfinite(vals)] = 0.0
    dual_obj = float(y @ rhs + rc[nb] @ vals[nb])

    bound_viol = float(np.max(np.maximum(lo - x, x - hi), initial=0.0))
    act = a @ x
    row_viol = np.where(is_eq, np.abs(act - rhs), np.maximum(act - rhs, 0.0))
    row_viol_max = float(row_viol.max(initial=0.0))

    # complementary slackness: inactive rows carry zero price, columns off
    # both bounds carry zero reduced cost
    comp = 0.0
    if m:
        row_slack = np.where(is_eq, 0.0, rhs - act)
        comp = float(np.abs(y * row_slack).max(initial=0.0))
    gap_lo = xfull - tab.lower
    gap_hi = tab.upper - xfull
    dist = np.minimum(np.where(np.isfinite(gap_lo), gap_lo, np.inf),
                      np.where(np.isfinite(gap_hi), gap_hi, np.inf))
    dist = np.where(np.isfinite(dist), dist, 0.0)
    comp = max(comp, float(np.abs(rc[:n + m] * dist[:n + m]).max(initial=0.0)))

    # duals reported against the original row orientation
    duals = y.copy()
    for r in range(m):
        if instance.row_rels[r] == ">=":
            duals[r] = -duals[r]
    if not maximize:
        duals = -duals
        obj = -obj
        dual_obj = -dual_obj

    return LpResult("Optimal", obj, x, duals, dual_obj, tab.iterations,
                    max_bound_violation=bound_viol,
                    max_row_violation=row_viol_max,
                    max_comp_slack=comp)


def _verify_farkas(y, a, rhs, lo, hi, is_eq):
    """Return a row combination certifying infeasibility, or None.

    With multipliers y (nonnegative on inequality rows), the implied
    inequality sum(y.A x) >= y.b must be unsatisfiable over the box:
    the box minimum of y.A x exceeding y.b proves it.
    """
    for cand in (y, -y):
        lam = cand.copy()
        lam[~is_eq] = np.maximum(lam[~is_eq], 0.0)
        g = lam @ a
        box_min = float(np.where(g > 0, g * lo, g * hi).sum())
        if box_min > lam @ rhs + 1e-9:
            return lam
    return None
