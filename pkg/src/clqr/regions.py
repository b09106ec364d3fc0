"""Critical regions and the piecewise-affine control law.

Each optimal active set with full-row-rank G_A defines, through the KKT
conditions of the condensed QP, an affine input law and a polytope in
initial-state space on which that law is optimal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .condense import CondensedQP
from .enumeration import ActiveSet, row_rank_full
from .errors import EmptyRegion, RankDeficient
from .model import Polytope

FULL_DIM_RADIUS = 1e-7
_REGION_ROW_SLACK = -1e-9  # conservative: marginal rows are kept

TERMINAL_ACTIVE = "terminal_active"
LAST_STAGE_ACTIVE = "last_stage_active"
INTERIOR = "interior"


@dataclass(frozen=True)
class Region:
    aset: ActiveSet
    polytope: Polytope
    gain: np.ndarray
    offset: np.ndarray

    def control(self, x) -> np.ndarray:
        return self.gain @ np.asarray(x, dtype=float) + self.offset


@dataclass(frozen=True)
class PwaLaw:
    horizon: int
    regions: tuple
    metadata: dict = field(default_factory=dict)


def _kkt_affine(qp: CondensedQP, aset: ActiveSet):
    """Parametric KKT solution: U(x) = Tu x + tu, lambda(x) = L x + l."""
    idx = np.asarray(aset.indices, dtype=int) - 1
    Hinv_Ft = np.linalg.solve(qp.H, qp.F.T)
    if idx.size == 0:
        Tu = -Hinv_Ft
        tu = np.zeros(qp.H.shape[0])
        return Tu, tu, np.zeros((0, qp.n)), np.zeros(0)
    GA, EA, wA = qp.G[idx], qp.E[idx], qp.w[idx]
    Hinv_GAt = np.linalg.solve(qp.H, GA.T)
    W = GA @ Hinv_GAt
    rhs_x = EA + GA @ Hinv_Ft
    L = -np.linalg.solve(W, rhs_x)
    l = -np.linalg.solve(W, wA)
    Tu = -(Hinv_Ft + Hinv_GAt @ L)
    tu = -Hinv_GAt @ l
    return Tu, tu, L, l


def _region_rows(qp: CondensedQP, aset: ActiveSet):
    """Raw H-rep of the region: inactive-constraint rows plus lambda >= 0."""
    idx = np.asarray(aset.indices, dtype=int) - 1
    inactive = np.setdiff1d(np.arange(qp.q), idx)
    Tu, tu, L, l = _kkt_affine(qp, aset)
    GI, EI, wI = qp.G[inactive], qp.E[inactive], qp.w[inactive]
    C = np.vstack([GI @ Tu - EI, -L])
    d = np.concatenate([wI - GI @ tu, l])
    # prune rows with (numerically) zero normal
    norms = np.linalg.norm(C, axis=1)
    keep = norms > 1e-12
    if np.any(~keep & (d < -1e-9)):
        raise EmptyRegion(f"region of {aset} is empty (contradictory constant row)")
    return C[keep], d[keep], Tu, tu


def region_from_active_set(qp: CondensedQP, aset: ActiveSet) -> Region:
    """Affine law and critical region of a full-row-rank optimal active set."""
    idx = np.asarray(aset.indices, dtype=int) - 1
    if not row_rank_full(qp.G, idx):
        raise RankDeficient(f"G rows of {aset} are linearly dependent")
    C, d, Tu, tu = _region_rows(qp, aset)
    poly = Polytope(C, d)
    _, radius = poly.chebyshev()
    if radius < 0:
        raise EmptyRegion(f"region of {aset} is empty")
    poly = poly.remove_redundant(slack=_REGION_ROW_SLACK)
    m = qp.m
    return Region(aset=aset, polytope=poly, gain=Tu[:m], offset=tu[:m])


def is_full_dimensional(qp: CondensedQP, aset: ActiveSet) -> bool:
    """Chebyshev-ball test of the region defined by ``aset``."""
    idx = np.asarray(aset.indices, dtype=int) - 1
    if not row_rank_full(qp.G, idx):
        raise RankDeficient(f"G rows of {aset} are linearly dependent")
    try:
        C, d, _, _ = _region_rows(qp, aset)
    except EmptyRegion:
        return False
    _, radius = Polytope(C, d).chebyshev()
    return radius > FULL_DIM_RADIUS


def classify_stage(aset: ActiveSet, N: int, q_UX: int) -> str:
    """Three-way coloring: terminal constraint active, last stage active,
    or neither (interior)."""
    if not aset.issubset_of_range(N * q_UX):
        return TERMINAL_ACTIVE
    if not aset.issubset_of_range((N - 1) * q_UX):
        return LAST_STAGE_ACTIVE
    return INTERIOR


def build_pwa(qp: CondensedQP, m_sets, metadata: dict | None = None) -> PwaLaw:
    """Map every active set of M_N to a region; empty regions are dropped."""
    regions = []
    dropped = []
    for aset in sorted(m_sets, key=lambda a: a.indices):
        try:
            regions.append(region_from_active_set(qp, aset))
        except EmptyRegion:
            dropped.append(aset)
    meta = dict(metadata or {})
    meta.setdefault("dropped_empty", [list(a.indices) for a in dropped])
    meta.setdefault("q_UX", qp.q_UX)
    meta.setdefault("q_T", qp.q_T)
    return PwaLaw(horizon=qp.N, regions=tuple(regions), metadata=meta)


def evaluate(law: PwaLaw, x, tol: float = 1e-9):
    """First input of the PWA law at x, or None when x is outside every
    region.  Ties on shared facets go to the region with the largest
    constraint margin (any choice is optimal by continuity)."""
    x = np.asarray(x, dtype=float)
    best = None
    best_margin = -np.inf
    for reg in law.regions:
        m = reg.polytope.margin(x)
        if m > best_margin:
            best_margin = m
            best = reg
    if best is None or best_margin < -tol:
        return None
    return best.control(x)
