"""Ground costs and the three exact transport solvers.

Variants:
  balanced -- equality marginals, probability measures on both sides;
  relaxed  -- inequality marginals, total shipped mass = min of the totals;
  partial  -- inequality marginals with per-row/column penalties subtracted
              from the cost, so mass moves only where the penalized cost
              is negative.

The relaxed and partial variants reduce to balanced instances by adding
zero-cost dummy nodes that absorb the untransported mass; everything is
solved by the network simplex in `simplex`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import Curve2D
from .errors import (
    DimensionMismatch,
    InfeasiblePenalties,
    NegativePenalty,
    UnbalancedMarginals,
)
from .measures import DiscreteMeasure
from .simplex import transport_simplex

# weights below this carry no mass and are pruned before solving
MASS_EPS = 1e-15

_BALANCE_TOL = 1e-9


@dataclass(frozen=True)
class PenaltyVectors:
    """Nonnegative per-row (nu) and per-column (mu) cost discounts."""

    nu: np.ndarray
    mu: np.ndarray

    def __post_init__(self):
        nu = np.ascontiguousarray(np.asarray(self.nu, dtype=float))
        mu = np.ascontiguousarray(np.asarray(self.mu, dtype=float))
        if not (np.isfinite(nu).all() and np.isfinite(mu).all()):
            raise NegativePenalty("penalties must be finite")
        if (nu < 0).any() or (mu < 0).any():
            raise NegativePenalty("penalties must be nonnegative")
        nu.flags.writeable = False
        mu.flags.writeable = False
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "mu", mu)


@dataclass(frozen=True)
class DualSolution:
    p: np.ndarray
    q: np.ndarray


@dataclass(frozen=True)
class TransportPlan:
    """Coupling matrix with its objective value and solver diagnostics."""

    pi: np.ndarray
    objective: float
    transported_mass: float
    status: str = "optimal"
    dual: DualSolution | None = None
    pivots: int = 0


def euclidean_cost(a: Curve2D, b: Curve2D, order: float = 1.0) -> np.ndarray:
    """Pairwise Euclidean distances between the two point sets, optionally
    raised elementwise to `order`."""
    diff = a.points[:, None, :] - b.points[None, :, :]
    c = np.hypot(diff[..., 0], diff[..., 1])
    if order != 1.0:
        c = c**order
    return c


def reduced_cost(cost: np.ndarray, pen: PenaltyVectors) -> np.ndarray:
    """Penalized cost d_ij = c_ij - nu_i - mu_j (entries may be negative)."""
    cost = np.asarray(cost, dtype=float)
    n, m = cost.shape
    if pen.nu.shape != (n,) or pen.mu.shape != (m,):
        raise DimensionMismatch(
            f"penalties {pen.nu.shape}/{pen.mu.shape} do not fit {n}x{m} cost"
        )
    return cost - pen.nu[:, None] - pen.mu[None, :]


def _check_dims(cost, beta, alpha):
    cost = np.asarray(cost, dtype=float)
    if cost.ndim != 2:
        raise DimensionMismatch(f"cost must be 2D, got ndim={cost.ndim}")
    n, m = cost.shape
    if len(beta) != n or len(alpha) != m:
        raise DimensionMismatch(
            f"cost is {n}x{m} but measures have {len(beta)} and {len(alpha)} weights"
        )
    return cost, np.asarray(beta.weights, dtype=float), np.asarray(alpha.weights, dtype=float)


def solve_balanced(
    cost: np.ndarray, beta: DiscreteMeasure, alpha: DiscreteMeasure
) -> TransportPlan:
    """Exact optimum of the equality-constrained transport problem.

    Both measures must be probability vectors (totals 1 within 1e-9).
    Zero-weight points are pruned before solving and restored as zero
    rows/columns of the returned plan.
    """
    cost, b, a = _check_dims(cost, beta, alpha)
    if abs(b.sum() - 1.0) > _BALANCE_TOL or abs(a.sum() - 1.0) > _BALANCE_TOL:
        raise UnbalancedMarginals(
            f"totals {b.sum():.12f} / {a.sum():.12f} must both be 1"
        )
    n, m = cost.shape
    rows = np.flatnonzero(b > MASS_EPS)
    cols = np.flatnonzero(a > MASS_EPS)
    sub = cost[np.ix_(rows, cols)]
    x, u, v, pivots = transport_simplex(sub, b[rows], a[cols])

    pi = np.zeros((n, m))
    pi[np.ix_(rows, cols)] = x
    q = _fill_col_duals(cost, v, cols, rows, u)
    p = _fill_row_duals(cost, u, rows, q)
    objective = float((cost * pi).sum())
    return TransportPlan(
        pi=pi,
        objective=objective,
        transported_mass=float(pi.sum()),
        dual=DualSolution(p=p, q=q),
        pivots=pivots,
    )


def _fill_col_duals(cost, v, cols, rows, u):
    """Scatter solved column duals; pruned columns get the largest feasible
    potential so the full-size dual stays feasible."""
    m = cost.shape[1]
    q = np.zeros(m)
    q[cols] = v
    missing = np.setdiff1d(np.arange(m), cols)
    if missing.size and rows.size:
        q[missing] = (cost[np.ix_(rows, missing)] - u[:, None]).min(axis=0)
    return q


def _fill_row_duals(cost, u, rows, q_full):
    n = cost.shape[0]
    p = np.zeros(n)
    p[rows] = u
    missing = np.setdiff1d(np.arange(n), rows)
    if missing.size:
        p[missing] = (cost[missing, :] - q_full[None, :]).min(axis=1)
    return p


def solve_relaxed(
    cost: np.ndarray, beta: DiscreteMeasure, alpha: DiscreteMeasure
) -> TransportPlan:
    """Inequality-constrained transport shipping min(total beta, total alpha).

    The smaller side is shipped in full; surplus on the larger side flows
    to a zero-cost dummy node. Coincides with the balanced solution when
    both totals are 1.
    """
    cost, b, a = _check_dims(cost, beta, alpha)
    if b.sum() <= 0 or a.sum() <= 0:
        raise UnbalancedMarginals("both totals must be positive")
    n, m = cost.shape
    rows = np.flatnonzero(b > MASS_EPS)
    cols = np.flatnonzero(a > MASS_EPS)
    bs, as_ = b[rows], a[cols]
    total_b, total_a = bs.sum(), as_.sum()

    gap = total_b - total_a
    if abs(gap) <= _BALANCE_TOL * max(total_b, total_a):
        sub = cost[np.ix_(rows, cols)]
        x, _, _, pivots = transport_simplex(sub, bs, as_)
    elif gap > 0:  # surplus supply -> dummy column
        sub = np.hstack([cost[np.ix_(rows, cols)], np.zeros((rows.size, 1))])
        x, _, _, pivots = transport_simplex(sub, bs, np.append(as_, gap))
        x = x[:, :-1]
    else:  # surplus demand -> dummy row
        sub = np.vstack([cost[np.ix_(rows, cols)], np.zeros((1, cols.size))])
        x, _, _, pivots = transport_simplex(sub, np.append(bs, -gap), as_)
        x = x[:-1, :]

    pi = np.zeros((n, m))
    pi[np.ix_(rows, cols)] = x
    return TransportPlan(
        pi=pi,
        objective=float((cost * pi).sum()),
        transported_mass=float(pi.sum()),
        pivots=pivots,
    )


def solve_partial(
    cost: np.ndarray,
    beta: DiscreteMeasure,
    alpha: DiscreteMeasure,
    pen: PenaltyVectors,
) -> TransportPlan:
    """Penalized transport: minimize sum (c_ij - nu_i - mu_j) pi_ij under
    row/column capacity constraints.

    Mass settles exactly on nonpositive penalized costs; the optimum never
    ships across a cell with positive penalized cost.
    """
    cost, b, a = _check_dims(cost, beta, alpha)
    d = reduced_cost(cost, pen)
    n, m = cost.shape
    rows = np.flatnonzero(b > MASS_EPS)
    cols = np.flatnonzero(a > MASS_EPS)
    if rows.size == 0 or cols.size == 0:
        return TransportPlan(
            pi=np.zeros((n, m)),
            objective=0.0,
            transported_mass=0.0,
            dual=DualSolution(p=np.minimum(d.min(axis=1), 0.0), q=np.zeros(m)),
        )
    bs, as_ = b[rows], a[cols]

    # two dummy nodes absorb unshipped capacity at zero cost, turning the
    # capacitated problem into a balanced one
    sub = d[np.ix_(rows, cols)]
    ext = np.zeros((rows.size + 1, cols.size + 1))
    ext[:-1, :-1] = sub
    supply = np.append(bs, as_.sum())
    demand = np.append(as_, bs.sum())
    x, u, v, pivots = transport_simplex(ext, supply, demand)

    pi = np.zeros((n, m))
    pi[np.ix_(rows, cols)] = x[:-1, :-1]

    # duals of the capacitated problem shift by the dummy potentials
    p = np.zeros(n)
    q = np.zeros(m)
    p[rows] = u[:-1] + v[-1]
    q[cols] = v[:-1] + u[-1]
    missing_r = np.setdiff1d(np.arange(n), rows)
    if missing_r.size:
        p[missing_r] = np.minimum((d[missing_r, :] - q[None, :]).min(axis=1), 0.0)
    missing_c = np.setdiff1d(np.arange(m), cols)
    if missing_c.size:
        q[missing_c] = np.minimum((d[:, missing_c] - p[:, None]).min(axis=0), 0.0)

    return TransportPlan(
        pi=pi,
        objective=float((d * pi).sum()),
        transported_mass=float(pi.sum()),
        dual=DualSolution(p=p, q=q),
        pivots=pivots,
    )


def construct_penalties(
    cost: np.ndarray, t: int, k: int, margin: float = 0.99
) -> PenaltyVectors:
    """Build penalties that keep positive penalized cost outside the active
    rectangle {rows 1..t} x {cols 1..k} (1-based, inclusive).

    Inside the rectangle the penalties are pushed as high as the strict
    outside constraints allow, so coverage (c_ij <= nu_i + mu_j) is best
    effort. Raises InfeasiblePenalties when a zero cost outside the
    rectangle makes strict separation impossible.
    """
    cost = np.asarray(cost, dtype=float)
    n, m = cost.shape
    if not (0 <= t <= n and 0 <= k <= m):
        raise DimensionMismatch(f"rectangle ({t}, {k}) exceeds {n}x{m} cost")
    if not (0.0 < margin < 1.0):
        raise ValueError(f"margin must be in (0, 1), got {margin}")

    nu = np.zeros(n)
    mu = np.zeros(m)
    if t == 0 or k == 0 or (t == n and k == m):
        outside = np.ones((n, m), dtype=bool)
        outside[:t, :k] = False
        if (cost[outside] <= 0.0).any():
            raise InfeasiblePenalties("zero cost outside the active rectangle")
        return PenaltyVectors(nu=nu, mu=mu)

    outside = np.ones((n, m), dtype=bool)
    outside[:t, :k] = False
    if (cost[outside] <= 0.0).any():
        raise InfeasiblePenalties("zero cost outside the active rectangle")

    if t < n:
        mu[:k] = margin * cost[t:, :k].min(axis=0)
    if k < m:
        nu[:t] = margin * cost[:t, k:].min(axis=1)
    if t == n:  # no rows below the rectangle: mu is only coverage-bound
        mu[:k] = np.maximum(0.0, (cost[:t, :k] - nu[:t, None]).max(axis=0))
    if k == m:  # no columns right of the rectangle: nu is only coverage-bound
        nu[:t] = np.maximum(0.0, (cost[:t, :k] - mu[None, :k]).max(axis=1))

    pen = PenaltyVectors(nu=nu, mu=mu)
    slack = cost - pen.nu[:, None] - pen.mu[None, :]
    if (slack[outside] <= 0.0).any():
        raise InfeasiblePenalties("strict separation failed outside the rectangle")
    return pen


@dataclass(frozen=True)
class DualReport:
    """Residuals certifying a solve: all near zero for a correct optimum."""

    dual_feasibility: float
    sign_violation: float
    complementary_slackness: float
    duality_gap: float

    def ok(self, tol: float = 1e-7) -> bool:
        return (
            self.dual_feasibility <= tol
            and self.sign_violation <= tol
            and self.complementary_slackness <= tol
            and self.duality_gap <= tol
        )


def dual_feasibility_check(
    plan: TransportPlan,
    dual: DualSolution,
    cost: np.ndarray,
    beta: DiscreteMeasure,
    alpha: DiscreteMeasure,
    pen: PenaltyVectors | None = None,
) -> DualReport:
    """Verify a plan/dual pair by LP optimality conditions.

    Without penalties this checks the equality-constrained problem (free
    dual signs); with penalties it checks the capacitated penalized
    problem, whose duals must be nonpositive.
    """
    cost = np.asarray(cost, dtype=float)
    p, q = np.asarray(dual.p, float), np.asarray(dual.q, float)
    b, a = beta.weights, alpha.weights
    if pen is None:
        effective = cost
        sign = 0.0
    else:
        effective = reduced_cost(cost, pen)
        sign = float(max(0.0, p.max(initial=0.0), q.max(initial=0.0)))
    spread = p[:, None] + q[None, :]
    feas = float(max(0.0, (spread - effective).max()))
    cs = float(np.abs(plan.pi * (effective - spread)).max())
    primal = float((effective * plan.pi).sum())
    dual_obj = float(b @ p + a @ q)
    return DualReport(
        dual_feasibility=feas,
        sign_violation=sign,
        complementary_slackness=cs,
        duality_gap=float(abs(primal - dual_obj)),
    )
