"""Active-set solver: KKT exactness on hand instances, random cross-check
against exhaustive active-set enumeration, and infeasibility certificates."""

import numpy as np
import pytest

from streamguide.qp import (
    FEASIBILITY_TOL, QPInfeasibleError, QPResult, qp_solve,
)

NO_ROWS = (np.zeros((0, 3)), np.zeros(0))


def test_unconstrained_interior_optimum():
    Q = np.array([[2.0, 0.3, 0.0], [0.3, 1.5, -0.2], [0.0, -0.2, 1.0]])
    q = np.array([1.0, -2.0, 0.5])
    res = qp_solve(Q, q, *NO_ROWS, lo=np.full(3, -10.0), hi=np.full(3, 10.0))
    expected = np.linalg.solve(2.0 * Q, -q)
    assert np.allclose(res.x, expected, atol=1e-10)
    assert res.active == ()
    assert np.allclose(res.multipliers, 0.0, atol=1e-9)
    assert res.objective == pytest.approx(
        float(expected @ Q @ expected + q @ expected))


def test_single_upper_bound_binds():
    # min x^2 - 4x on [0, 1]: optimum at the bound, multiplier 2
    Q = np.array([[1.0]])
    q = np.array([-4.0])
    res = qp_solve(Q, q, np.zeros((0, 1)), np.zeros(0),
                   lo=np.array([0.0]), hi=np.array([1.0]))
    assert res.x[0] == pytest.approx(1.0, abs=1e-12)
    # G stacks [A; -I; I]; the upper bound of x0 is row 1 here
    assert 1 in res.active
    assert res.multipliers[1] == pytest.approx(2.0, abs=1e-9)
    assert res.objective == pytest.approx(-3.0)


def test_row_constraint_binds():
    # min |x - (2,2)|^2 subject to x0 + x1 <= 2: projection onto the line
    Q = np.eye(2)
    q = np.array([-4.0, -4.0])
    res = qp_solve(Q, q, np.array([[1.0, 1.0]]), np.array([2.0]),
                   lo=np.full(2, -5.0), hi=np.full(2, 5.0))
    assert np.allclose(res.x, [1.0, 1.0], atol=1e-9)
    assert 0 in res.active
    assert res.multipliers.min() >= -1e-9


def test_infeasible_rows_certificate():
    # x >= 2 contradicts the box [0, 1]
    with pytest.raises(QPInfeasibleError) as err:
        qp_solve(np.array([[1.0]]), np.array([0.0]),
                 np.array([[-1.0]]), np.array([-2.0]),
                 lo=np.array([0.0]), hi=np.array([1.0]))
    assert 0 in err.value.rows


def test_inconsistent_bounds_raise():
    with pytest.raises(QPInfeasibleError):
        qp_solve(np.array([[1.0]]), np.array([0.0]), np.zeros((0, 1)),
                 np.zeros(0), lo=np.array([2.0]), hi=np.array([1.0]))


def test_warm_start_agrees_with_cold_start():
    Q = np.array([[3.0, 0.5], [0.5, 2.0]])
    q = np.array([-3.0, 1.0])
    A = np.array([[1.0, 2.0]])
    c = np.array([1.5])
    kw = dict(lo=np.full(2, -4.0), hi=np.full(2, 4.0))
    cold = qp_solve(Q, q, A, c, **kw)
    warm = qp_solve(Q, q, A, c, **kw, x0=np.array([0.1, 0.1]))
    ignored = qp_solve(Q, q, A, c, **kw, x0=np.array([50.0, 50.0]))
    assert np.allclose(cold.x, warm.x, atol=1e-9)
    assert np.allclose(cold.x, ignored.x, atol=1e-9)


def test_result_reports_verified_kkt_point():
    Q = np.array([[4.0, 1.0], [1.0, 2.0]])
    q = np.array([-8.0, -6.0])
    A = np.array([[1.0, 1.0], [-1.0, 2.0]])
    c = np.array([1.0, 2.0])
    res: QPResult = qp_solve(Q, q, A, c, lo=np.zeros(2), hi=np.full(2, 3.0))
    G = np.vstack([A, -np.eye(2), np.eye(2)])
    h = np.concatenate([c, np.zeros(2), np.full(2, 3.0)])
    assert np.max(G @ res.x - h) <= FEASIBILITY_TOL
    residual = 2.0 * Q @ res.x + q + G.T @ res.multipliers
    assert np.linalg.norm(residual, np.inf) < 1e-6
    assert res.multipliers.min() >= -1e-9
    assert res.iterations >= 1


def test_random_instances_match_enumeration(qp_enum_oracle):
    rng = np.random.default_rng(42)
    for _ in range(20):
        B = rng.normal(size=(3, 3))
        Q = B @ B.T + 3.0 * np.eye(3)
        q = rng.normal(scale=4.0, size=3)
        A = rng.normal(size=(4, 3))
        # keep an interior point feasible so every draw is solvable
        x_int = rng.uniform(-0.5, 0.5, size=3)
        c = A @ x_int + rng.uniform(0.2, 1.5, size=4)
        lo = np.full(3, -2.0)
        hi = np.full(3, 3.0)
        res = qp_solve(Q, q, A, c, lo=lo, hi=hi)
        G = np.vstack([A, -np.eye(3), np.eye(3)])
        h = np.concatenate([c, -lo, hi])
        best_f, best_x = qp_enum_oracle(Q, q, G, h)
        assert res.objective <= best_f + 1e-9
        assert res.objective >= best_f - 1e-9
        assert np.allclose(res.x, best_x, atol=1e-6)
