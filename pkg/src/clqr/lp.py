"""Dense two-phase primal simplex solver and the LP builders used by the
active-set optimality and feasibility tests.

The solver uses Bland's rule throughout, which makes it immune to cycling
on the heavily degenerate certificates produced by the enumeration and
keeps the pivot sequence deterministic for a fixed input.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import IndexOutOfRange, NumericalFailure

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_FEAS_TOL = 1e-9
_OPT_TOL = 1e-9
_PIVOT_TOL = 1e-11

# Eq. constraint residual guaranteed on reported optima.
PRIMAL_TOL = 1e-8

# Cap on the interiority certificate t.  Any positive t certifies strict
# interiority, so the cap is value-free; without it the certificate LP is
# unbounded whenever a strictly interior point exists.
T_CAP = 1.0

# t* at or below this value counts as a degenerate (t = 0) certificate.
DEGENERACY_TOL = 1e-9

_INF = float("inf")


@dataclass(frozen=True)
class LpProblem:
    """min c'x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  bounds per variable.

    ``bounds`` is a sequence of (lo, hi) pairs; ``None`` or +-inf mean
    unbounded on that side.  Missing bounds default to free variables.
    """

    c: np.ndarray
    A_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    bounds: tuple = ()

    def n_vars(self) -> int:
        return len(self.c)


@dataclass(frozen=True)
class LpOutcome:
    status: str
    x: np.ndarray | None = None
    objective: float = float("nan")


def _norm_bound(v, default):
    if v is None:
        return default
    return float(v)


def solve_lp(problem: LpProblem, max_pivots: int = 200_000) -> LpOutcome:
    """Solve an LP with the two-phase primal simplex method (Bland's rule)."""
    c = np.asarray(problem.c, dtype=float)
    n = c.size
    bounds = list(problem.bounds) + [(None, None)] * (n - len(problem.bounds))

    A_ub = problem.A_ub
    b_ub = problem.b_ub
    A_eq = problem.A_eq
    b_eq = problem.b_eq
    m_ub = 0 if A_ub is None else np.asarray(A_ub).shape[0]
    m_eq = 0 if A_eq is None else np.asarray(A_eq).shape[0]

    # --- variable transformation to x >= 0 -------------------------------
    # Each original variable maps to one or two nonnegative columns plus a
    # constant offset: x_i = col_plus - col_minus + offset.
    col_of_plus = np.full(n, -1, dtype=int)
    col_of_minus = np.full(n, -1, dtype=int)
    offset = np.zeros(n)
    extra_ub = []  # (var index, rhs) rows for finite upper bounds
    ncols = 0
    for i in range(n):
        lo = _norm_bound(bounds[i][0], -_INF)
        hi = _norm_bound(bounds[i][1], _INF)
        if lo == -_INF:
            col_of_plus[i] = ncols
            col_of_minus[i] = ncols + 1
            ncols += 2
            if hi < _INF:
                extra_ub.append((i, hi))
        else:
            col_of_plus[i] = ncols
            offset[i] = lo
            ncols += 1
            if hi < _INF:
                extra_ub.append((i, hi))

    def expand(mat):
        out = np.zeros((mat.shape[0], ncols))
        for i in range(n):
            out[:, col_of_plus[i]] += mat[:, i]
            if col_of_minus[i] >= 0:
                out[:, col_of_minus[i]] -= mat[:, i]
        return out

    rows = []
    rhs = []
    kinds = []  # "ub" or "eq"
    if m_ub:
        A = expand(np.asarray(A_ub, dtype=float))
        b = np.asarray(b_ub, dtype=float) - np.asarray(A_ub, dtype=float) @ offset
        rows.append(A)
        rhs.append(b)
        kinds += ["ub"] * m_ub
    for i, ub in extra_ub:
        r = np.zeros((1, ncols))
        r[0, col_of_plus[i]] = 1.0
        if col_of_minus[i] >= 0:
            r[0, col_of_minus[i]] = -1.0
        rows.append(r)
        rhs.append(np.array([ub - offset[i]]))
        kinds.append("ub")
    if m_eq:
        A = expand(np.asarray(A_eq, dtype=float))
        b = np.asarray(b_eq, dtype=float) - np.asarray(A_eq, dtype=float) @ offset
        rows.append(A)
        rhs.append(b)
        kinds += ["eq"] * m_eq

    cost = np.zeros(ncols)
    for i in range(n):
        cost[col_of_plus[i]] += c[i]
        if col_of_minus[i] >= 0:
            cost[col_of_minus[i]] -= c[i]
    const_cost = float(c @ offset)

    if not rows:
        # No constraints: optimum at the (shifted) origin unless some cost
        # coefficient makes the problem unbounded.
        if np.any(cost < -_OPT_TOL):
            return LpOutcome(UNBOUNDED)
        return LpOutcome(OPTIMAL, offset.copy(), const_cost)

    A = np.vstack(rows)
    b = np.concatenate(rhs)
    m = A.shape[0]

    # slacks for inequality rows
    n_slack = sum(1 for k in kinds if k == "ub")
    T = np.zeros((m, ncols + n_slack + 1))
    T[:, :ncols] = A
    T[:, -1] = b
    slack_col = ncols
    slack_of_row = np.full(m, -1, dtype=int)
    for r, k in enumerate(kinds):
        if k == "ub":
            T[r, slack_col] = 1.0
            slack_of_row[r] = slack_col
            slack_col += 1
    full_cost = np.concatenate([cost, np.zeros(n_slack)])

    # make rhs nonnegative
    neg = T[:, -1] < 0
    T[neg] *= -1.0

    # initial basis: slack columns still usable (+1 coefficient), otherwise
    # artificial variables
    basis = np.full(m, -1, dtype=int)
    need_artificial = []
    for r in range(m):
        sc = slack_of_row[r]
        if sc >= 0 and T[r, sc] > 0:
            basis[r] = sc
        else:
            need_artificial.append(r)
    n_art = len(need_artificial)
    ntot = ncols + n_slack
    if n_art:
        art = np.zeros((m, n_art))
        for j, r in enumerate(need_artificial):
            art[r, j] = 1.0
            basis[r] = ntot + j
        T = np.hstack([T[:, :-1], art, T[:, -1:]])
        ntot += n_art

    pivots = [0]

    def run(T, basis, costvec, allowed):
        """Simplex iterations with Bland's rule; T has identity basis cols."""
        ncolT = T.shape[1] - 1
        cb = costvec[basis]
        red = costvec[:ncolT] - cb @ T[:, :ncolT]
        obj = float(cb @ T[:, -1])
        while True:
            cand = np.nonzero((red < -_OPT_TOL) & allowed)[0]
            if cand.size == 0:
                return obj, red
            j = int(cand[0])  # Bland: smallest eligible index
            colj = T[:, j]
            pos = colj > _PIVOT_TOL
            if not np.any(pos):
                return None, red  # unbounded in this direction
            ratios = np.full(T.shape[0], np.inf)
            ratios[pos] = T[pos, -1] / colj[pos]
            rmin = ratios.min()
            ties = np.nonzero(ratios <= rmin + 1e-15)[0]
            # Bland tie-break: leaving variable with the smallest index
            r = int(ties[np.argmin(basis[ties])])
            piv = T[r, j]
            if abs(piv) <= _PIVOT_TOL:
                raise NumericalFailure("pivot element below tolerance")
            T[r] /= piv
            col = T[:, j].copy()
            col[r] = 0.0
            T -= np.outer(col, T[r])
            red = red - red[j] * T[r, :ncolT]
            red[j] = 0.0
            basis[r] = j
            obj = float(costvec[basis] @ T[:, -1])
            pivots[0] += 1
            if pivots[0] > max_pivots:
                raise NumericalFailure("simplex pivot limit exceeded")

    allowed = np.ones(ntot, dtype=bool)
    if n_art:
        # artificials may leave the basis but never re-enter
        allowed[ncols + n_slack:] = False
        phase1_cost = np.zeros(ntot)
        phase1_cost[ncols + n_slack:] = 1.0
        obj, _ = run(T, basis, phase1_cost, allowed)
        if obj is None or obj > _FEAS_TOL:
            return LpOutcome(INFEASIBLE)
        # drive remaining artificials out of the basis
        art_start = ncols + n_slack
        for r in range(m):
            if basis[r] >= art_start:
                row = T[r, :art_start]
                nz = np.nonzero(np.abs(row) > _PIVOT_TOL)[0]
                if nz.size == 0:
                    # redundant row; keep the artificial at zero level but
                    # forbid it from ever leaving zero
                    continue
                j = int(nz[0])
                piv = T[r, j]
                T[r] /= piv
                col = T[:, j].copy()
                col[r] = 0.0
                T -= np.outer(col, T[r])
                basis[r] = j
        allowed[art_start:] = False

    phase2_cost = np.zeros(ntot)
    phase2_cost[: ncols + n_slack] = full_cost
    obj, _ = run(T, basis, phase2_cost, allowed)
    if obj is None:
        return LpOutcome(UNBOUNDED)

    sol = np.zeros(ntot)
    sol[basis] = T[:, -1]
    x = np.empty(n)
    for i in range(n):
        v = sol[col_of_plus[i]]
        if col_of_minus[i] >= 0:
            v -= sol[col_of_minus[i]]
        x[i] = v + offset[i]
    return LpOutcome(OPTIMAL, x, obj + const_cost)


# ---------------------------------------------------------------------------
# LP builders for the active-set certificates
# ---------------------------------------------------------------------------


def _split_rows(qp, aset):
    idx = np.asarray(aset.indices, dtype=int)
    if idx.size and (idx.min() < 1 or idx.max() > qp.q):
        raise IndexOutOfRange(f"active set indices must lie in 1..{qp.q}")
    active = idx - 1
    mask = np.ones(qp.q, dtype=bool)
    mask[active] = False
    inactive = np.nonzero(mask)[0]
    return active, inactive


def build_optimality_lp(qp, aset) -> LpProblem:
    """Certificate LP deciding whether ``aset`` is an optimal active set.

    Variables (in order): U, x0, lambda_active, slack_inactive, t.
    A strictly positive optimal t certifies a full-dimensional region;
    t = 0 marks a degenerate (weakly active) certificate.
    """
    active, inactive = _split_rows(qp, aset)
    nu = qp.H.shape[0]
    n = qp.E.shape[1]
    na, ni = active.size, inactive.size
    nvar = nu + n + na + ni + 1

    GA, EA, wA = qp.G[active], qp.E[active], qp.w[active]
    GI, EI, wI = qp.G[inactive], qp.E[inactive], qp.w[inactive]

    eq_rows = []
    eq_rhs = []
    # stationarity: H U + F' x0 + G_A' lambda = 0
    r = np.zeros((nu, nvar))
    r[:, :nu] = qp.H
    r[:, nu:nu + n] = qp.F.T
    if na:
        r[:, nu + n:nu + n + na] = GA.T
    eq_rows.append(r)
    eq_rhs.append(np.zeros(nu))
    if na:
        r = np.zeros((na, nvar))
        r[:, :nu] = GA
        r[:, nu:nu + n] = -EA
        eq_rows.append(r)
        eq_rhs.append(wA)
    if ni:
        r = np.zeros((ni, nvar))
        r[:, :nu] = GI
        r[:, nu:nu + n] = -EI
        r[:, nu + n + na:nu + n + na + ni] = np.eye(ni)
        eq_rows.append(r)
        eq_rhs.append(wI)

    ub_rows = []
    ub_rhs = []
    if na:  # t <= lambda_i
        r = np.zeros((na, nvar))
        r[:, nu + n:nu + n + na] = -np.eye(na)
        r[:, -1] = 1.0
        ub_rows.append(r)
        ub_rhs.append(np.zeros(na))
    if ni:  # t <= s_i
        r = np.zeros((ni, nvar))
        r[:, nu + n + na:nu + n + na + ni] = -np.eye(ni)
        r[:, -1] = 1.0
        ub_rows.append(r)
        ub_rhs.append(np.zeros(ni))

    c = np.zeros(nvar)
    c[-1] = -1.0
    bounds = [(None, None)] * (nu + n) + [(0.0, None)] * (na + ni) + [(0.0, T_CAP)]
    return LpProblem(
        c=c,
        A_ub=np.vstack(ub_rows) if ub_rows else None,
        b_ub=np.concatenate(ub_rhs) if ub_rhs else None,
        A_eq=np.vstack(eq_rows),
        b_eq=np.concatenate(eq_rhs),
        bounds=tuple(bounds),
    )


def build_feasibility_lp(qp, aset) -> LpProblem:
    """Same certificate without stationarity and the multiplier bound.

    Infeasibility of this LP proves ``aset`` (and every superset) cannot be
    an optimal active set.
    """
    active, inactive = _split_rows(qp, aset)
    nu = qp.H.shape[0]
    n = qp.E.shape[1]
    na, ni = active.size, inactive.size
    nvar = nu + n + ni + 1

    eq_rows = []
    eq_rhs = []
    if na:
        r = np.zeros((na, nvar))
        r[:, :nu] = qp.G[active]
        r[:, nu:nu + n] = -qp.E[active]
        eq_rows.append(r)
        eq_rhs.append(qp.w[active])
    if ni:
        r = np.zeros((ni, nvar))
        r[:, :nu] = qp.G[inactive]
        r[:, nu:nu + n] = -qp.E[inactive]
        r[:, nu + n:nu + n + ni] = np.eye(ni)
        eq_rows.append(r)
        eq_rhs.append(qp.w[inactive])

    ub_rows = None
    ub_rhs = None
    if ni:
        r = np.zeros((ni, nvar))
        r[:, nu + n:nu + n + ni] = -np.eye(ni)
        r[:, -1] = 1.0
        ub_rows = r
        ub_rhs = np.zeros(ni)

    c = np.zeros(nvar)
    c[-1] = -1.0
    bounds = [(None, None)] * (nu + n) + [(0.0, None)] * ni + [(0.0, T_CAP)]
    return LpProblem(
        c=c,
        A_ub=ub_rows,
        b_ub=ub_rhs,
        A_eq=np.vstack(eq_rows) if eq_rows else None,
        b_eq=np.concatenate(eq_rhs) if eq_rhs else None,
        bounds=tuple(bounds),
    )


def certificate_value(outcome: LpOutcome) -> float:
    """Optimal t of a certificate LP (the builders minimize -t)."""
    return -outcome.objective
