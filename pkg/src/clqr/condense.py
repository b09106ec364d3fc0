"""Condensed parametric QP built from the optimal control problem.

Eliminating the dynamics turns the horizon-N problem into

    min_U  1/2 x0' Y x0 + x0' F U + 1/2 U' H U
    s.t.   G U <= E x0 + w

with the constraint rows kept in stagewise order: for every stage
k = 0..N-1 first the input rows, then the state rows; the terminal rows
come last.  All indices exposed to callers are 1-based, matching the
convention that constraint 1 is the first row of G.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag

from .errors import DimensionMismatch, InvalidConstraintSet, StageOutOfRange
from .model import Ocp

_H_MIN_EIG = 1e-10


@dataclass(frozen=True)
class CondensedQP:
    Y: np.ndarray
    F: np.ndarray
    H: np.ndarray
    G: np.ndarray
    w: np.ndarray
    E: np.ndarray
    N: int
    q: int
    q_UX: int
    q_T: int

    def __post_init__(self):
        ev = np.linalg.eigvalsh(self.H)
        if ev.min() <= _H_MIN_EIG:
            raise InvalidConstraintSet("condensed Hessian is not positive definite")
        if self.q != self.N * self.q_UX + self.q_T:
            raise DimensionMismatch("constraint count bookkeeping is inconsistent")

    @property
    def n(self) -> int:
        return self.E.shape[1]

    @property
    def m(self) -> int:
        return self.H.shape[0] // self.N

    def stage_of(self, i: int) -> int:
        """Stage owning constraint i (1-based); the terminal block maps to N."""
        if not 1 <= i <= self.q:
            raise StageOutOfRange(f"constraint index {i} outside 1..{self.q}")
        if i > self.N * self.q_UX:
            return self.N
        return (i - 1) // self.q_UX


def stage_indices(qp: CondensedQP, k: int) -> range:
    """1-based contiguous constraint indices of stage k (k = N: terminal)."""
    if not 0 <= k <= qp.N:
        raise StageOutOfRange(f"stage {k} outside 0..{qp.N}")
    if k == qp.N:
        return range(qp.N * qp.q_UX + 1, qp.q + 1)
    return range(k * qp.q_UX + 1, (k + 1) * qp.q_UX + 1)


def condense(ocp: Ocp, N: int) -> CondensedQP:
    """Build the condensed QP for horizon N >= 1."""
    if N < 1:
        raise DimensionMismatch("horizon must be at least 1")
    A, B = ocp.sys.A, ocp.sys.B
    n, m = ocp.sys.n, ocp.sys.m
    W = ocp.weights

    Apow = [np.eye(n)]
    for _ in range(N):
        Apow.append(A @ Apow[-1])

    # x(k) = Apow[k] x0 + Shat_k U with Shat_k the k-th n-row block
    Shat = np.zeros(((N + 1) * n, N * m))
    Abar = np.zeros(((N + 1) * n, n))
    for k in range(N + 1):
        Abar[k * n:(k + 1) * n] = Apow[k]
        for j in range(k):
            Shat[k * n:(k + 1) * n, j * m:(j + 1) * m] = Apow[k - 1 - j] @ B

    Qhat = block_diag(*([W.Q] * N + [W.P]))
    Rhat = block_diag(*([W.R] * N))
    H = 2.0 * (Shat.T @ Qhat @ Shat + Rhat)
    H = 0.5 * (H + H.T)
    F = 2.0 * (Abar.T @ Qhat @ Shat)
    Y = 2.0 * (Abar.T @ Qhat @ Abar)

    CU, dU = ocp.U_set.C, ocp.U_set.d
    CX, dX = ocp.X_set.C, ocp.X_set.d
    CT, dT = ocp.T_set.C, ocp.T_set.d

    G_blocks, E_blocks, w_blocks = [], [], []
    for k in range(N):
        gu = np.zeros((CU.shape[0], N * m))
        gu[:, k * m:(k + 1) * m] = CU
        G_blocks.append(gu)
        E_blocks.append(np.zeros((CU.shape[0], n)))
        w_blocks.append(dU)
        # state rows: CX x(k) <= dX with x(k) substituted
        G_blocks.append(CX @ Shat[k * n:(k + 1) * n])
        E_blocks.append(-CX @ Apow[k])
        w_blocks.append(dX)
    G_blocks.append(CT @ Shat[N * n:])
    E_blocks.append(-CT @ Apow[N])
    w_blocks.append(dT)

    G = np.vstack(G_blocks)
    E = np.vstack(E_blocks)
    w = np.concatenate(w_blocks)

    # joint row normalization keeps LP tolerances meaningful
    norms = np.linalg.norm(np.hstack([G, E]), axis=1)
    norms[norms <= 0] = 1.0
    G = G / norms[:, None]
    E = E / norms[:, None]
    w = w / norms

    q_UX = ocp.q_UX
    q_T = ocp.q_T
    return CondensedQP(Y=Y, F=F, H=H, G=G, w=w, E=E,
                       N=N, q=N * q_UX + q_T, q_UX=q_UX, q_T=q_T)


def dump_matrices(qp: CondensedQP) -> dict:
    """Plain-list export of (Y, F, H, G, w, E) for external verification."""
    return {
        "N": qp.N, "q": qp.q, "q_UX": qp.q_UX, "q_T": qp.q_T,
        "Y": qp.Y.tolist(), "F": qp.F.tolist(), "H": qp.H.tolist(),
        "G": qp.G.tolist(), "w": qp.w.tolist(), "E": qp.E.tolist(),
    }
