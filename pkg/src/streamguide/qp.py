"""Dense primal active-set solver for small convex quadratic programs.

Solves  min  x'Qx + q'x  subject to  A x <= c,  lo <= x <= hi
with Q symmetric positive definite. Problems here are tiny (three
variables, a dozen rows), so the solver favors determinism and
verifiable KKT conditions over scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FEASIBILITY_TOL = 1e-8
STATIONARITY_TOL = 1e-6
_DUAL_TOL = 1e-9
_RATIO_TOL = 1e-12
_DESCENT_TOL = 1e-12
_MAX_ITER = 200


class QPInfeasibleError(RuntimeError):
    """No feasible point found; `rows` holds a conflicting constraint set."""

    def __init__(self, message: str, rows=()):
        super().__init__(message)
        self.rows = tuple(rows)


class QPConvergenceError(RuntimeError):
    """Active-set iteration limit hit or KKT verification failed."""


@dataclass(frozen=True)
class QPResult:
    x: np.ndarray
    multipliers: np.ndarray
    active: tuple
    objective: float
    iterations: int


def _objective(Q, q, x) -> float:
    return float(x @ Q @ x + q @ x)


def _kkt_solve(Q, q, G, h, working):
    """Minimize over the affine set where `working` rows hold with equality."""
    n = Q.shape[0]
    m = len(working)
    if m == 0:
        return np.linalg.solve(2.0 * Q, -q), np.empty(0)
    Gw = G[working]
    kkt = np.block([[2.0 * Q, Gw.T], [Gw, np.zeros((m, m))]])
    rhs = np.concatenate([-q, h[working]])
    sol = np.linalg.solve(kkt, rhs)
    return sol[:n], sol[n:]


def _independent(G, working, row) -> bool:
    stack = G[list(working) + [row]]
    return np.linalg.matrix_rank(stack, tol=1e-10) == len(working) + 1


def _active_set(Q, q, G, h, x0):
    """Primal active-set loop from a feasible x0. Returns (x, lam, active, iters)."""
    x = np.asarray(x0, dtype=float).copy()
    working: list = []
    for it in range(1, _MAX_ITER + 1):
        try:
            x_eq, lam = _kkt_solve(Q, q, G, h, working)
        except np.linalg.LinAlgError:
            # dependent working set; drop the newest row and retry
            working.pop()
            continue
        d = x_eq - x
        # zero-step test on the objective decrease d'Qd: scale-invariant,
        # unlike |d|, which drowns in KKT float residue when the working-set
        # multipliers are large
        descent = float(d @ Q @ d)
        if descent <= _DESCENT_TOL * (1.0 + abs(_objective(Q, q, x))):
            lam_scale = 1.0 + (float(np.abs(lam).max()) if len(lam) else 0.0)
            neg = [j for j in range(len(lam))
                   if lam[j] < -_DUAL_TOL * lam_scale]
            if not neg:
                full = np.zeros(len(G))
                if len(lam):
                    full[working] = lam
                # hand back the exact equality-set point, not the iterate
                return x_eq, full, tuple(working), it
            # lowest constraint index first, so degenerate vertices cannot
            # cycle the same add/drop pair
            working.pop(min(neg, key=lambda j: working[j]))
            continue
        # ratio test against rows not in the working set
        gd = G @ d
        slack = h - G @ x
        alpha, blocking = 1.0, None
        for i in range(len(G)):
            if i in working or gd[i] <= _RATIO_TOL:
                continue
            ratio = max(slack[i], 0.0) / gd[i]
            if ratio < alpha - 1e-15:
                alpha, blocking = ratio, i
        x = x + alpha * d
        if blocking is not None and _independent(G, working, blocking):
            working.append(blocking)
    raise QPConvergenceError(f"active-set loop did not converge in {_MAX_ITER} iterations")


def _grid_feasible_point(G, h, lo, hi):
    """Deterministic coarse scan of the box for a feasible start."""
    axes = [np.linspace(lo[i], hi[i], 9) for i in range(len(lo))]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    violation = G @ pts.T - h[:, None]
    total = np.maximum(violation, 0.0).sum(axis=0)
    best = int(np.argmin(total))
    if total[best] <= FEASIBILITY_TOL:
        return pts[best]
    rows = np.where(violation[:, best] > FEASIBILITY_TOL)[0]
    raise QPInfeasibleError(
        f"no feasible point on a 9^{len(lo)} box scan; "
        f"least-violating sample breaks rows {rows.tolist()}", rows=rows)


def qp_solve(Q, q, A, c, lo, hi, x0=None) -> QPResult:
    """Solve the box-and-rows QP; returns a verified KKT point.

    An optional warm-start x0 is used when it is feasible; otherwise a
    deterministic coarse grid scan over the box finds a starting point or
    produces an infeasibility certificate.
    """
    Q = np.asarray(Q, dtype=float)
    q = np.asarray(q, dtype=float)
    A = np.asarray(A, dtype=float).reshape(-1, Q.shape[0])
    c = np.asarray(c, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if np.any(lo > hi):
        raise QPInfeasibleError("inconsistent bounds: lo > hi")

    n = Q.shape[0]
    G = np.vstack([A, -np.eye(n), np.eye(n)])
    h = np.concatenate([c, -lo, hi])

    start = None
    if x0 is not None:
        x0 = np.asarray(x0, dtype=float)
        if np.all(G @ x0 <= h + FEASIBILITY_TOL):
            start = x0
    if start is None:
        start = _grid_feasible_point(G, h, lo, hi)

    x, lam, active, iters = _active_set(Q, q, G, h, start)

    # verify the KKT point before handing it back
    if np.max(G @ x - h) > FEASIBILITY_TOL:
        raise QPConvergenceError("solution violates primal feasibility")
    residual = 2.0 * Q @ x + q + G.T @ lam
    if np.linalg.norm(residual, np.inf) > STATIONARITY_TOL:
        raise QPConvergenceError("stationarity residual too large")
    return QPResult(x=x, multipliers=lam, active=active,
                    objective=_objective(Q, q, x), iterations=iters)
