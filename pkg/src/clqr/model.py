"""Plant model, constraint polytopes, infinite-horizon weights and the
maximal positively-invariant terminal set."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import lp
from .errors import (
    DimensionMismatch,
    EmptyTerminalSet,
    InvalidConstraintSet,
    NonConvergence,
    NotStabilizable,
)

_STABILIZABLE_TOL = 1e-8
_RICCATI_RESIDUAL_TOL = 1e-9
_DARE_STEP_TOL = 1e-12
_DARE_MAX_ITER = 100_000
_REDUNDANT_SLACK = 1e-9
_INVARIANT_MAX_ITER = 500


@dataclass(frozen=True)
class LinearSystem:
    """Discrete-time plant x(k+1) = A x(k) + B u(k); (A, B) stabilizable."""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        if A.shape[0] != A.shape[1]:
            raise DimensionMismatch("A must be square")
        if B.shape[0] != A.shape[0]:
            raise DimensionMismatch("B must have as many rows as A")
        _check_stabilizable(A, B)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]


def _check_stabilizable(A, B):
    """Hautus test: every eigenvalue with |lambda| >= 1 must be controllable."""
    n = A.shape[0]
    for lam in np.linalg.eigvals(A):
        if abs(lam) < 1.0 - _STABILIZABLE_TOL:
            continue
        M = np.hstack([A - lam * np.eye(n), B])
        s = np.linalg.svd(M, compute_uv=False)
        if s[n - 1] <= _STABILIZABLE_TOL * max(1.0, s[0]):
            raise NotStabilizable(f"uncontrollable mode at eigenvalue {lam}")


@dataclass(frozen=True)
class Polytope:
    """H-representation {z : C z <= d} with unit-norm rows."""

    C: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        C = np.atleast_2d(np.asarray(self.C, dtype=float))
        d = np.asarray(self.d, dtype=float).ravel()
        if C.shape[0] != d.size:
            raise DimensionMismatch("C and d row counts differ")
        norms = np.linalg.norm(C, axis=1)
        if np.any(norms <= 0):
            raise InvalidConstraintSet("zero row in polytope description")
        C = C / norms[:, None]
        d = d / norms
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "d", d)

    @property
    def dim(self) -> int:
        return self.C.shape[1]

    @property
    def rows(self) -> int:
        return self.C.shape[0]

    def contains(self, x, tol: float = 1e-9) -> bool:
        return bool(np.all(self.C @ np.asarray(x, dtype=float) <= self.d + tol))

    def margin(self, x) -> float:
        """Smallest slack over all rows; negative outside the set."""
        return float(np.min(self.d - self.C @ np.asarray(x, dtype=float)))

    def chebyshev(self):
        """Center and radius of the largest inscribed ball.

        Returns (None, -inf) for an empty set and radius inf when the ball
        can grow without limit.
        """
        nvar = self.dim + 1
        c = np.zeros(nvar)
        c[-1] = -1.0
        A_ub = np.hstack([self.C, np.ones((self.rows, 1))])
        bounds = [(None, None)] * self.dim + [(0.0, None)]
        out = lp.solve_lp(lp.LpProblem(c=c, A_ub=A_ub, b_ub=self.d, bounds=tuple(bounds)))
        if out.status == lp.INFEASIBLE:
            return None, -np.inf
        if out.status == lp.UNBOUNDED:
            return None, np.inf
        return out.x[:-1], float(out.x[-1])

    def is_empty(self, tol: float = 0.0) -> bool:
        _, r = self.chebyshev()
        return r < -tol

    def support(self, direction):
        """max c'x over the set; inf when unbounded, -inf when empty."""
        out = lp.solve_lp(lp.LpProblem(c=-np.asarray(direction, dtype=float),
                                       A_ub=self.C, b_ub=self.d,
                                       bounds=((None, None),) * self.dim))
        if out.status == lp.UNBOUNDED:
            return np.inf
        if out.status == lp.INFEASIBLE:
            return -np.inf
        return -out.objective

    def row_redundant(self, i: int, slack: float = _REDUNDANT_SLACK) -> bool:
        """True when row i never binds given the remaining rows.

        Positive ``slack`` treats marginal rows as redundant; a negative
        value keeps them (conservative mode used for region descriptions).
        """
        mask = np.ones(self.rows, dtype=bool)
        mask[i] = False
        rest = Polytope(self.C[mask], self.d[mask]) if mask.any() else None
        if rest is None:
            return False
        s = rest.support(self.C[i])
        return s <= self.d[i] + slack

    def remove_redundant(self, slack: float = _REDUNDANT_SLACK) -> "Polytope":
        C, d = self.C, self.d
        i = 0
        while i < len(d):
            if len(d) == 1:
                break
            mask = np.ones(len(d), dtype=bool)
            mask[i] = False
            s = Polytope(C[mask], d[mask]).support(C[i])
            if s <= d[i] + slack:
                C, d = C[mask], d[mask]
            else:
                i += 1
        return Polytope(C, d)

    def intersect(self, other: "Polytope") -> "Polytope":
        if other.dim != self.dim:
            raise DimensionMismatch("polytope dimensions differ")
        return Polytope(np.vstack([self.C, other.C]), np.concatenate([self.d, other.d]))

    def bounding_box(self):
        lo = np.empty(self.dim)
        hi = np.empty(self.dim)
        for j in range(self.dim):
            e = np.zeros(self.dim)
            e[j] = 1.0
            hi[j] = self.support(e)
            lo[j] = -self.support(-e)
        return lo, hi

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """Uniform samples by rejection from the bounding box."""
        lo, hi = self.bounding_box()
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise InvalidConstraintSet("cannot sample an unbounded polytope")
        out = []
        while len(out) < count:
            batch = rng.uniform(lo, hi, size=(max(4 * count, 64), self.dim))
            ok = np.all(batch @ self.C.T <= self.d + 1e-12, axis=1)
            out.extend(batch[ok])
        return np.asarray(out[:count])


def check_constraint_set(p: Polytope, name: str = "constraint set") -> None:
    """U and X must be compact, full-dimensional and contain 0 strictly."""
    if np.any(p.d <= 0):
        raise InvalidConstraintSet(f"{name}: origin not strictly interior")
    lo, hi = p.bounding_box()
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise InvalidConstraintSet(f"{name}: not compact")
    _, r = p.chebyshev()
    if not r > 0:
        raise InvalidConstraintSet(f"{name}: not full-dimensional")


@dataclass(frozen=True)
class Weights:
    """Stage weights plus the unconstrained infinite-horizon P and K."""

    Q: np.ndarray
    R: np.ndarray
    P: np.ndarray
    K: np.ndarray

    def __post_init__(self):
        for nm in ("Q", "R", "P", "K"):
            object.__setattr__(self, nm, np.atleast_2d(np.asarray(getattr(self, nm), dtype=float)))
        _check_sym_psd(self.Q, "Q", strict=False)
        _check_sym_psd(self.R, "R", strict=True)
        _check_sym_psd(self.P, "P", strict=True)


def _check_sym_psd(M, name, strict):
    if M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"{name} must be square")
    if not np.allclose(M, M.T, atol=1e-10):
        raise InvalidConstraintSet(f"{name} must be symmetric")
    ev = np.linalg.eigvalsh(M)
    if strict and ev.min() <= 0:
        raise InvalidConstraintSet(f"{name} must be positive definite")
    if not strict and ev.min() < -1e-10 * max(1.0, abs(ev.max())):
        raise InvalidConstraintSet(f"{name} must be positive semidefinite")


def riccati_residual(sys: LinearSystem, Q, R, P) -> float:
    A, B = sys.A, sys.B
    S = R + B.T @ P @ B
    nxt = Q + A.T @ P @ A - A.T @ P @ B @ np.linalg.solve(S, B.T @ P @ A)
    return float(np.linalg.norm(P - nxt, "fro"))


def solve_dare(sys: LinearSystem, Q, R) -> Weights:
    """Fixed-point Riccati iteration from P0 = Q; returns Weights with the
    infinite-horizon cost matrix P and feedback gain K (u = K x)."""
    A, B = sys.A, sys.B
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    R = np.atleast_2d(np.asarray(R, dtype=float))
    _check_sym_psd(Q, "Q", strict=False)
    _check_sym_psd(R, "R", strict=True)
    P = Q.copy()
    for _ in range(_DARE_MAX_ITER):
        S = R + B.T @ P @ B
        nxt = Q + A.T @ P @ A - A.T @ P @ B @ np.linalg.solve(S, B.T @ P @ A)
        step = np.linalg.norm(nxt - P, "fro")
        P = 0.5 * (nxt + nxt.T)
        if step <= _DARE_STEP_TOL * max(1.0, np.linalg.norm(P, "fro")):
            break
    else:
        raise NonConvergence("Riccati iteration cap exceeded")
    if riccati_residual(sys, Q, R, P) > _RICCATI_RESIDUAL_TOL * np.linalg.norm(P, "fro"):
        raise NonConvergence("Riccati residual above tolerance")
    K = -np.linalg.solve(R + sys.B.T @ P @ sys.B, sys.B.T @ P @ sys.A)
    return Weights(Q=Q, R=R, P=P, K=K)


def terminal_set(sys: LinearSystem, K, X_set: Polytope, U_set: Polytope) -> Polytope:
    """Largest T with T in X, K T in U and (A+BK) T in T.

    Standard maximal output-admissible set iteration: starting from
    Omega_0 = {x in X : K x in U}, rows of Omega_0 composed with powers of
    the closed loop are added until all new rows are redundant.
    """
    K = np.atleast_2d(np.asarray(K, dtype=float))
    AK = sys.A + sys.B @ K
    if np.max(np.abs(np.linalg.eigvals(AK))) >= 1.0:
        raise NotStabilizable("A + BK is not Schur-stable")
    C0 = np.vstack([X_set.C, U_set.C @ K])
    d0 = np.concatenate([X_set.d, U_set.d])
    omega = Polytope(C0, d0).remove_redundant()
    if omega.is_empty():
        raise EmptyTerminalSet("initial admissible set is empty")
    # rows generated last step, pre-composition with the closed loop
    C_new = omega.C
    d_new = omega.d
    for _ in range(_INVARIANT_MAX_ITER):
        C_next = C_new @ AK
        norms = np.linalg.norm(C_next, axis=1)
        keep = norms > 1e-12
        C_next = C_next[keep] / norms[keep, None]
        d_next = d_new[keep] / norms[keep]
        fresh_C = []
        fresh_d = []
        for ci, di in zip(C_next, d_next):
            if omega.support(ci) > di + _REDUNDANT_SLACK:
                fresh_C.append(ci)
                fresh_d.append(di)
        if not fresh_C:
            result = omega.remove_redundant()
            if result.is_empty():
                raise EmptyTerminalSet("terminal set is empty")
            return result
        omega = omega.intersect(Polytope(np.asarray(fresh_C), np.asarray(fresh_d)))
        omega = omega.remove_redundant()
        C_new = np.asarray(fresh_C)
        d_new = np.asarray(fresh_d)
    raise NonConvergence("invariant set iteration cap exceeded")


@dataclass(frozen=True)
class Ocp:
    """Plant, constraint sets, weights and the terminal set of one problem."""

    sys: LinearSystem
    U_set: Polytope
    X_set: Polytope
    T_set: Polytope
    weights: Weights

    def __post_init__(self):
        if self.U_set.dim != self.sys.m:
            raise DimensionMismatch("U must live in input space")
        if self.X_set.dim != self.sys.n or self.T_set.dim != self.sys.n:
            raise DimensionMismatch("X and T must live in state space")
        _check_terminal(self)

    @property
    def q_UX(self) -> int:
        return self.U_set.rows + self.X_set.rows

    @property
    def q_T(self) -> int:
        return self.T_set.rows

    def closed_loop(self) -> np.ndarray:
        return self.sys.A + self.sys.B @ self.weights.K


def _check_terminal(ocp: Ocp, tol: float = 1e-7) -> None:
    """Exact (LP-based) verification of T in X, K T in U, (A+BK) T in T."""
    T, K = ocp.T_set, ocp.weights.K
    AK = ocp.sys.A + ocp.sys.B @ K
    for C, d, M in ((ocp.X_set.C, ocp.X_set.d, None),
                    (ocp.U_set.C, ocp.U_set.d, K),
                    (T.C, T.d, AK)):
        rows = C if M is None else C @ M
        for ci, di in zip(rows, d):
            if T.support(ci) > di + tol:
                raise InvalidConstraintSet("terminal set fails invariance check")


def make_ocp(sys: LinearSystem, U_set: Polytope, X_set: Polytope, Q, R) -> Ocp:
    """Convenience constructor: DARE weights plus the maximal invariant T."""
    check_constraint_set(U_set, "U")
    check_constraint_set(X_set, "X")
    w = solve_dare(sys, Q, R)
    T = terminal_set(sys, w.K, X_set, U_set)
    return Ocp(sys=sys, U_set=U_set, X_set=X_set, T_set=T, weights=w)
