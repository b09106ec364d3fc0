import numpy as np
import pytest
from scipy.linalg import solve_discrete_are

import clqr
from clqr.errors import (
    InvalidConstraintSet,
    NotStabilizable,
)
from clqr.model import (
    LinearSystem,
    Polytope,
    check_constraint_set,
    riccati_residual,
    solve_dare,
    terminal_set,
)


# ---------------------------------------------------------------------------
# Riccati
# ---------------------------------------------------------------------------


def test_dare_nilpotent_system():
    # A = 0: one step reaches the origin, so P = Q and the gain vanishes
    sys = LinearSystem(A=np.zeros((2, 2)), B=np.eye(2))
    w = solve_dare(sys, np.diag([1.0, 2.0]), np.eye(2))
    assert np.allclose(w.P, np.diag([1.0, 2.0]), atol=1e-12)
    assert np.allclose(w.K, 0.0, atol=1e-12)


def test_dare_scalar_analytic():
    # scalar fixed point: p = q + a^2 p r / (r + b^2 p), solved in closed form
    a, b, q, r = 1.2, 1.0, 1.0, 0.5
    A2 = b * b
    B2 = r - q * b * b - a * a * r
    C2 = -q * r
    p_exact = (-B2 + np.sqrt(B2 * B2 - 4 * A2 * C2)) / (2 * A2)
    sys = LinearSystem(A=[[a]], B=[[b]])
    w = solve_dare(sys, [[q]], [[r]])
    assert w.P[0, 0] == pytest.approx(p_exact, abs=1e-9)
    k_exact = -a * b * p_exact / (r + b * b * p_exact)
    assert w.K[0, 0] == pytest.approx(k_exact, abs=1e-9)


def test_dare_matches_scipy_on_random_systems(rng):
    for _ in range(20):
        n = int(rng.integers(1, 4))
        m = int(rng.integers(1, 3))
        A = rng.normal(scale=0.9, size=(n, n))
        B = rng.normal(size=(n, m))
        Qh = rng.normal(size=(n, n))
        Q = Qh @ Qh.T + 0.1 * np.eye(n)
        Rh = rng.normal(size=(m, m))
        R = Rh @ Rh.T + 0.1 * np.eye(m)
        try:
            sys = LinearSystem(A=A, B=B)
        except NotStabilizable:
            continue
        w = solve_dare(sys, Q, R)
        ref = solve_discrete_are(A, B, Q, R)
        assert np.allclose(w.P, ref, atol=1e-7 * max(1.0, np.linalg.norm(ref)))


def test_dare_residual_small(di_ocp):
    res = riccati_residual(di_ocp.sys, di_ocp.weights.Q, di_ocp.weights.R,
                           di_ocp.weights.P)
    assert res <= 1e-9 * np.linalg.norm(di_ocp.weights.P, "fro")


def test_double_integrator_weights(di_ocp):
    assert np.allclose(di_ocp.weights.P,
                       [[2.0599, 0.5916], [0.5916, 1.4228]], atol=5e-4)
    assert np.allclose(di_ocp.weights.K, [[-0.6167, -1.2703]], atol=5e-4)


def test_not_stabilizable_raises():
    with pytest.raises(NotStabilizable):
        LinearSystem(A=[[2.0]], B=[[0.0]])
    with pytest.raises(NotStabilizable):
        # unstable mode decoupled from the input
        LinearSystem(A=[[1.5, 0.0], [0.0, 0.5]], B=[[0.0], [1.0]])


# ---------------------------------------------------------------------------
# polytopes
# ---------------------------------------------------------------------------


def test_polytope_rows_are_normalized():
    p = Polytope([[3.0, 4.0]], [10.0])
    assert np.allclose(np.linalg.norm(p.C, axis=1), 1.0)
    assert p.d[0] == pytest.approx(2.0)


def test_polytope_contains_and_margin():
    box = Polytope([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]],
                   [1.0, 1.0, 2.0, 2.0])
    assert box.contains([0.5, -1.5])
    assert not box.contains([1.5, 0.0])
    assert box.margin([0.0, 0.0]) == pytest.approx(1.0)
    assert box.margin([1.2, 0.0]) == pytest.approx(-0.2)


def test_chebyshev_of_box():
    box = Polytope([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]],
                   [1.0, 1.0, 1.0, 1.0])
    center, radius = box.chebyshev()
    assert radius == pytest.approx(1.0, abs=1e-9)
    assert np.allclose(box.C @ center, np.zeros(4) + box.d - radius, atol=1e-6) or \
        box.contains(center)


def test_chebyshev_empty_and_unbounded():
    empty = Polytope([[1.0], [-1.0]], [-1.0, -1.0])
    c, r = empty.chebyshev()
    assert c is None and r == -np.inf
    half = Polytope([[1.0, 0.0]], [1.0])
    c, r = half.chebyshev()
    assert r == np.inf


def test_remove_redundant_drops_duplicate_row():
    p = Polytope([[1.0, 0.0], [1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]],
                 [1.0, 2.0, 1.0, 1.0, 1.0])
    r = p.remove_redundant()
    assert r.rows == 4
    assert r.support([1.0, 0.0]) == pytest.approx(1.0, abs=1e-9)


def test_support_directions():
    box = Polytope([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]],
                   [2.0, 1.0, 3.0, 4.0])
    assert box.support([1.0, 0.0]) == pytest.approx(2.0, abs=1e-9)
    assert box.support([0.0, -1.0]) == pytest.approx(4.0, abs=1e-9)
    assert box.support([1.0, 1.0]) == pytest.approx(5.0, abs=1e-9)


def test_sample_stays_inside(rng):
    box = Polytope([[1.0, 1.0], [-1.0, 0.0], [0.0, -1.0]], [1.0, 0.0, 0.0])
    pts = box.sample(64, rng)
    assert pts.shape == (64, 2)
    assert all(box.contains(p, tol=1e-9) for p in pts)


def test_check_constraint_set_rejects_origin_on_boundary():
    with pytest.raises(InvalidConstraintSet):
        check_constraint_set(Polytope([[1.0], [-1.0]], [0.0, 1.0]))


def test_check_constraint_set_rejects_unbounded():
    with pytest.raises(InvalidConstraintSet):
        check_constraint_set(Polytope([[1.0, 0.0], [-1.0, 0.0]], [1.0, 1.0]))


# ---------------------------------------------------------------------------
# terminal set
# ---------------------------------------------------------------------------


def test_terminal_set_row_count(di_ocp):
    assert di_ocp.q_T == 4
    assert di_ocp.q_UX == 6


def test_terminal_set_invariance_sampled(di_ocp, rng):
    """10^3 sampled points: T is inside X, K T inside U, (A+BK) T inside T."""
    T = di_ocp.T_set
    K = di_ocp.weights.K
    AK = di_ocp.closed_loop()
    pts = T.sample(1000, rng)
    for x in pts:
        assert di_ocp.X_set.contains(x, tol=1e-9)
        assert di_ocp.U_set.contains(K @ x, tol=1e-9)
        assert T.contains(AK @ x, tol=1e-9)


def test_terminal_set_is_maximal_on_boundary_rays(di_ocp, rng):
    """Points just outside T leave the admissible region within 50 steps."""
    T = di_ocp.T_set
    K = di_ocp.weights.K
    AK = di_ocp.closed_loop()
    escapes = 0
    for i in range(T.rows):
        # push past facet i from the Chebyshev center
        center, _ = T.chebyshev()
        scale = (T.d[i] - T.C[i] @ center)
        x = center + T.C[i] * (scale * 1.001) / (T.C[i] @ T.C[i])
        assert not T.contains(x, tol=1e-12)
        for _ in range(50):
            if not (di_ocp.X_set.contains(x) and di_ocp.U_set.contains(K @ x)):
                escapes += 1
                break
            x = AK @ x
    assert escapes > 0  # at least one facet is tight for admissibility


def test_terminal_set_raises_for_unstable_gain(di_ocp):
    with pytest.raises(NotStabilizable):
        terminal_set(di_ocp.sys, np.zeros((1, 2)), di_ocp.X_set, di_ocp.U_set)


def test_make_ocp_terminal_check(di_doc):
    # tampering with the terminal set must be caught by the invariance check
    bad_T = Polytope([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]],
                     [30.0, 30.0, 30.0, 30.0])
    with pytest.raises(InvalidConstraintSet):
        clqr.Ocp(sys=clqr.LinearSystem(A=np.array(di_doc["A"]), B=np.array(di_doc["B"])),
                 U_set=Polytope(np.array(di_doc["U"]["C"]), np.array(di_doc["U"]["d"])),
                 X_set=Polytope(np.array(di_doc["X"]["C"]), np.array(di_doc["X"]["d"])),
                 T_set=bad_T,
                 weights=solve_dare(clqr.LinearSystem(A=np.array(di_doc["A"]),
                                                      B=np.array(di_doc["B"])),
                                    np.array(di_doc["Q"]), np.array(di_doc["R"])))
