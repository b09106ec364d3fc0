"""Active-set combinatorics: the baseline full enumeration and the
dynamic-programming horizon extension with its finite-determination test.

Counter semantics (fixed so that runs are comparable across algorithms):

* ``candidates_generated`` -- every candidate active set produced by the
  generation rule of the algorithm, including candidates dismissed as
  supersets of known infeasible sets.
* ``pruning_tests`` -- one per generated candidate (each candidate is
  checked against the store of known infeasible sets).
* ``rank_tests`` -- row-rank evaluations of G restricted to a candidate.
* ``optimality_lps`` / ``feasibility_lps`` -- certificate LPs solved.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np

from . import lp
from .condense import CondensedQP, condense
from .errors import HorizonMismatch, IndexOutOfRange
from .model import Ocp

RANK_TOL = 1e-8


class ActiveSet:
    """Immutable, strictly increasing set of 1-based constraint indices."""

    __slots__ = ("indices", "mask")

    def __init__(self, indices=()):
        given = [int(i) for i in indices]
        idx = tuple(sorted(set(given)))
        if len(idx) != len(given):
            raise IndexOutOfRange("duplicate constraint index")
        if idx and idx[0] < 1:
            raise IndexOutOfRange("constraint indices are 1-based")
        object.__setattr__(self, "indices", idx)
        m = 0
        for i in idx:
            m |= 1 << (i - 1)
        object.__setattr__(self, "mask", m)

    def __setattr__(self, *a):  # pragma: no cover
        raise AttributeError("ActiveSet is immutable")

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, i):
        return i in self.indices

    def __eq__(self, other):
        return isinstance(other, ActiveSet) and self.indices == other.indices

    def __hash__(self):
        return hash(self.indices)

    def __repr__(self):
        return f"ActiveSet{self.indices}"

    def issubset_of_range(self, upper: int) -> bool:
        """True when every index is <= upper."""
        return not self.indices or self.indices[-1] <= upper

    def union(self, other: "ActiveSet") -> "ActiveSet":
        return ActiveSet(set(self.indices) | set(other.indices))

    def max_index(self) -> int:
        return self.indices[-1] if self.indices else 0


EMPTY_SET = ActiveSet()


def shift(aset: ActiveSet, offset: int) -> ActiveSet:
    """Minkowski sum with {offset}: every index moves up by one stage."""
    return ActiveSet(tuple(i + offset for i in aset.indices))


def unshift(aset: ActiveSet, offset: int) -> ActiveSet:
    """Pontryagin difference with {offset}; requires all indices > offset."""
    if aset.indices and aset.indices[0] <= offset:
        raise IndexOutOfRange("cannot shift index below 1")
    return ActiveSet(tuple(i - offset for i in aset.indices))


@dataclass
class Counters:
    candidates_generated: int = 0
    pruning_tests: int = 0
    rank_tests: int = 0
    optimality_lps: int = 0
    feasibility_lps: int = 0

    def copy(self) -> "Counters":
        return Counters(self.candidates_generated, self.pruning_tests,
                        self.rank_tests, self.optimality_lps, self.feasibility_lps)

    def as_dict(self) -> dict:
        return {
            "candidates": self.candidates_generated,
            "pruning_tests": self.pruning_tests,
            "rank_tests": self.rank_tests,
            "optimality_lps": self.optimality_lps,
            "feasibility_lps": self.feasibility_lps,
        }


class PrunedStore:
    """Antichain of minimal known-infeasible active sets (as bitmasks)."""

    __slots__ = ("masks", "sets")

    def __init__(self):
        self.masks: list[int] = []
        self.sets: list[ActiveSet] = []

    def __len__(self):
        return len(self.masks)

    def blocks(self, mask: int) -> bool:
        """True when ``mask`` is a superset of a stored infeasible set."""
        for p in self.masks:
            if p & mask == p:
                return True
        return False

    def add(self, aset: ActiveSet) -> None:
        m = aset.mask
        if self.blocks(m):
            return
        keep_m, keep_s = [], []
        for pm, ps in zip(self.masks, self.sets):
            if pm & m != m:  # drop stored supersets of the new minimal set
                keep_m.append(pm)
                keep_s.append(ps)
        keep_m.append(m)
        keep_s.append(aset)
        self.masks = keep_m
        self.sets = keep_s


@dataclass
class SolutionFamily:
    """S_N with its degenerate subset, pruned store and cumulative counters."""

    horizon: int
    q_UX: int
    q_T: int
    sets: list = field(default_factory=list)  # insertion-ordered ActiveSets
    degen: set = field(default_factory=set)
    pruned: PrunedStore = field(default_factory=PrunedStore)
    counters: Counters = field(default_factory=Counters)

    @property
    def q(self) -> int:
        return self.horizon * self.q_UX + self.q_T

    def set_of_sets(self) -> frozenset:
        return frozenset(self.sets)


def is_finitely_determined(family: SolutionFamily) -> bool:
    """True when no optimal active set touches stage N-1 or the terminal
    stage, i.e. the tilde set of extension seeds is empty; the solution and
    control law are then identical for every longer horizon."""
    bound = (family.horizon - 1) * family.q_UX
    return all(a.issubset_of_range(bound) for a in family.sets)


def extension_seeds(family: SolutionFamily) -> list:
    """Members of S_N with at least one active constraint in stage N-1 or
    the terminal stage (the only sets that spawn horizon-(N+1) candidates)."""
    bound = (family.horizon - 1) * family.q_UX
    return [a for a in family.sets if not a.issubset_of_range(bound)]


def _stage_subsets(q_UX: int) -> list:
    """P({1..q_UX}) ordered by cardinality, then lexicographically."""
    out = []
    for k in range(q_UX + 1):
        for c in combinations(range(1, q_UX + 1), k):
            out.append(ActiveSet(c))
    return out


def extend_candidates(a_l: ActiveSet, q_UX: int):
    """Candidates A_j | (a_l + {q_UX}) for all single-stage subsets A_j."""
    shifted = shift(a_l, q_UX)
    for a_j in _stage_subsets(q_UX):
        yield a_j.union(shifted)


# ---------------------------------------------------------------------------
# power-set sweeps with superset skipping
# ---------------------------------------------------------------------------


def _sweep_power_set(q: int, max_card: int, store: PrunedStore,
                     counters: Counters, visit) -> None:
    """Visit all subsets of {1..q} with |A| <= max_card by increasing
    cardinality (lexicographic within a cardinality), skipping supersets of
    stored infeasible sets.

    Skipped candidates are still tallied as generated and pruning-tested;
    entire skipped subtrees are counted combinatorially instead of being
    materialized.
    """
    suffix = [0] * (q + 2)
    for j in range(q, 0, -1):
        suffix[j] = suffix[j + 1] | (1 << (j - 1))

    def descend(prefix, mask, start, k, alive):
        # alive: pruned masks possibly contained in completions of prefix
        for j in range(start, q - (k - len(prefix)) + 2):
            m2 = mask | (1 << (j - 1))
            remaining = k - len(prefix) - 1
            reach = m2 | suffix[j + 1]
            sub = [p for p in alive if p & ~reach == 0]
            hit = any(p & m2 == p for p in sub)
            if hit:
                cnt = comb(q - j, remaining)
                counters.candidates_generated += cnt
                counters.pruning_tests += cnt
                continue
            if remaining == 0:
                counters.candidates_generated += 1
                counters.pruning_tests += 1
                prefix.append(j)
                visit(prefix, m2)
                prefix.pop()
            else:
                prefix.append(j)
                descend(prefix, m2, j + 1, k, sub)
                prefix.pop()

    for k in range(0, max_card + 1):
        if k == 0:
            counters.candidates_generated += 1
            counters.pruning_tests += 1
            visit([], 0)
            continue
        descend([], 0, 1, k, list(store.masks))


def row_rank_full(G: np.ndarray, rows, row_norms=None) -> bool:
    """True when the selected rows of G are linearly independent
    (singular values below RANK_TOL * sigma_max count as zero)."""
    idx = np.asarray(rows, dtype=int)
    if idx.size == 0:
        return True
    if idx.size > G.shape[1]:
        return False
    if row_norms is not None and np.any(row_norms[idx] <= RANK_TOL):
        return False
    sub = G[idx]
    s = np.linalg.svd(sub, compute_uv=False)
    if s[0] <= 0:
        return False
    return int(np.sum(s > RANK_TOL * s[0])) == idx.size


# ---------------------------------------------------------------------------
# Baseline combinatorial enumeration
# ---------------------------------------------------------------------------


def alg1_baseline(qp: CondensedQP):
    """Full enumeration over all candidates of cardinality <= m*N with
    pruning and rank filtering; returns (M_N as a set of ActiveSets,
    Counters)."""
    from .regions import is_full_dimensional  # local import to avoid a cycle

    counters = Counters()
    store = PrunedStore()
    m_sets: list[ActiveSet] = []
    row_norms = np.linalg.norm(qp.G, axis=1)
    max_card = qp.H.shape[0]  # m * N

    def visit(prefix, mask):
        counters.rank_tests += 1
        idx = np.asarray(prefix, dtype=int) - 1
        if not row_rank_full(qp.G, idx, row_norms):
            return
        aset = ActiveSet(prefix)
        counters.optimality_lps += 1
        out = lp.solve_lp(lp.build_optimality_lp(qp, aset))
        if out.status == lp.OPTIMAL:
            if lp.certificate_value(out) > lp.DEGENERACY_TOL:
                m_sets.append(aset)
            elif is_full_dimensional(qp, aset):
                m_sets.append(aset)
        else:
            counters.feasibility_lps += 1
            fout = lp.solve_lp(lp.build_feasibility_lp(qp, aset))
            if fout.status != lp.OPTIMAL:
                store.add(aset)

    _sweep_power_set(qp.q, max_card, store, counters, visit)
    return frozenset(m_sets), counters


# ---------------------------------------------------------------------------
# Dynamic-programming path
# ---------------------------------------------------------------------------


def alg3_init(qp1: CondensedQP) -> SolutionFamily:
    """All optimal active sets of the horizon-1 problem.

    Unlike the baseline, rank-deficient optimal sets are retained: they can
    spawn full-rank optimal sets at longer horizons."""
    if qp1.N != 1:
        raise HorizonMismatch("initialization requires the horizon-1 QP")
    family = SolutionFamily(horizon=1, q_UX=qp1.q_UX, q_T=qp1.q_T)
    counters = family.counters
    store = family.pruned

    def visit(prefix, mask):
        aset = ActiveSet(prefix)
        counters.optimality_lps += 1
        out = lp.solve_lp(lp.build_optimality_lp(qp1, aset))
        if out.status == lp.OPTIMAL:
            family.sets.append(aset)
            if lp.certificate_value(out) <= lp.DEGENERACY_TOL:
                family.degen.add(aset)
        else:
            counters.feasibility_lps += 1
            fout = lp.solve_lp(lp.build_feasibility_lp(qp1, aset))
            if fout.status != lp.OPTIMAL:
                store.add(aset)

    _sweep_power_set(qp1.q, qp1.q, store, counters, visit)
    return family


def alg2_extend(family: SolutionFamily, qp_next: CondensedQP) -> SolutionFamily:
    """S_{N+1} from S_N: copy every set with no constraint in the last two
    stages, extend every seed with all single-stage augmentations."""
    if qp_next.N != family.horizon + 1:
        raise HorizonMismatch("QP horizon must be N+1")
    if qp_next.q_UX != family.q_UX or qp_next.q_T != family.q_T:
        raise HorizonMismatch("QP constraint structure differs from family")
    q_UX = family.q_UX
    N = family.horizon
    nxt = SolutionFamily(horizon=N + 1, q_UX=q_UX, q_T=family.q_T,
                         counters=family.counters.copy())
    counters = nxt.counters
    store = nxt.pruned  # fresh: infeasibility does not carry across horizons
    copy_bound = N * q_UX
    seed_bound = (N - 1) * q_UX
    stage_subsets = _stage_subsets(q_UX)

    for a_l in family.sets:
        if a_l.issubset_of_range(copy_bound):
            nxt.sets.append(a_l)
            if a_l in family.degen:
                nxt.degen.add(a_l)
        if not a_l.issubset_of_range(seed_bound):
            shifted = shift(a_l, q_UX)
            for a_j in stage_subsets:
                cand = a_j.union(shifted)
                counters.candidates_generated += 1
                counters.pruning_tests += 1
                if store.blocks(cand.mask):
                    continue
                counters.optimality_lps += 1
                out = lp.solve_lp(lp.build_optimality_lp(qp_next, cand))
                if out.status == lp.OPTIMAL:
                    nxt.sets.append(cand)
                    if lp.certificate_value(out) <= lp.DEGENERACY_TOL:
                        nxt.degen.add(cand)
                else:
                    counters.feasibility_lps += 1
                    fout = lp.solve_lp(lp.build_feasibility_lp(qp_next, cand))
                    if fout.status != lp.OPTIMAL:
                        store.add(cand)
    return nxt


def final_filter(family: SolutionFamily, qp: CondensedQP,
                 counters: Counters | None = None) -> frozenset:
    """Reduce S_N to M_N: keep full-row-rank sets; degenerate ones must in
    addition define a full-dimensional polytope."""
    from .regions import is_full_dimensional

    if qp.N != family.horizon:
        raise HorizonMismatch("QP horizon must match the family")
    if counters is None:
        counters = Counters()
    row_norms = np.linalg.norm(qp.G, axis=1)
    out = []
    for aset in family.sets:
        counters.rank_tests += 1
        idx = np.asarray(aset.indices, dtype=int) - 1
        if not row_rank_full(qp.G, idx, row_norms):
            continue
        if aset in family.degen and not is_full_dimensional(qp, aset):
            continue
        out.append(aset)
    return frozenset(out)


@dataclass
class HorizonRecord:
    """Per-horizon snapshot taken by the DP driver."""

    horizon: int
    family: SolutionFamily
    counters: Counters  # cumulative through this horizon (before filtering)
    s_size: int
    finitely_determined: bool


@dataclass
class DpResult:
    m_sets: frozenset
    n_reached: int
    finitely_determined: bool
    history: list
    counters: Counters  # cumulative including the final filter
    qp: CondensedQP


def alg4_dp(ocp: Ocp, n_max: int) -> DpResult:
    """Dynamic-programming driver: init at horizon 1, extend until n_max or
    until the solution is finitely determined, then filter to M_N."""
    if n_max < 1:
        raise HorizonMismatch("n_max must be at least 1")
    qp = condense(ocp, 1)
    family = alg3_init(qp)
    history = [HorizonRecord(1, family, family.counters.copy(),
                             len(family.sets), is_finitely_determined(family))]
    while family.horizon < n_max:
        qp = condense(ocp, family.horizon + 1)
        family = alg2_extend(family, qp)
        history.append(HorizonRecord(family.horizon, family,
                                     family.counters.copy(),
                                     len(family.sets),
                                     is_finitely_determined(family)))
        if is_finitely_determined(family):
            break
    counters = family.counters.copy()
    m_sets = final_filter(family, qp, counters)
    return DpResult(m_sets=m_sets, n_reached=family.horizon,
                    finitely_determined=is_finitely_determined(family),
                    history=history, counters=counters, qp=qp)


def baseline_candidate_count(q: int, max_card: int) -> int:
    """|P'(Q)|: number of candidates the baseline generates analytically."""
    return sum(comb(q, k) for k in range(max_card + 1))
