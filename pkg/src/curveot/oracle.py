"""Reference LP solver for small transport instances.

Feeds the raw linear program to scipy's HiGHS backend, a codebase and
algorithm independent of the in-package network simplex, so the two can
certify each other. Capped at n*m <= 400 variables; intended for tests
and verification mode only.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linprog

from .errors import TooLargeForOracle
from .measures import DiscreteMeasure
from .transport import (
    DualSolution,
    PenaltyVectors,
    TransportPlan,
    dual_feasibility_check,
    reduced_cost,
)

ORACLE_CAP = 400

VARIANTS = ("balanced", "relaxed", "partial")


def _marginal_matrices(n: int, m: int) -> np.ndarray:
    """Rows 0..n-1 sum each plan row, rows n..n+m-1 sum each plan column."""
    A = np.zeros((n + m, n * m))
    for i in range(n):
        A[i, i * m : (i + 1) * m] = 1.0
    for j in range(m):
        A[n + j, j::m] = 1.0
    return A


def oracle_solve(
    cost: np.ndarray,
    beta: DiscreteMeasure,
    alpha: DiscreteMeasure,
    variant: str = "balanced",
    pen: PenaltyVectors | None = None,
) -> TransportPlan:
    """Certified optimum of the requested variant via scipy/HiGHS."""
    cost = np.asarray(cost, dtype=float)
    n, m = cost.shape
    if n * m > ORACLE_CAP:
        raise TooLargeForOracle(f"{n}x{m} = {n * m} variables exceeds cap {ORACLE_CAP}")
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    b = np.asarray(beta.weights, dtype=float)
    a = np.asarray(alpha.weights, dtype=float)
    A = _marginal_matrices(n, m)
    rhs = np.concatenate([b, a])

    if variant == "balanced":
        res = linprog(cost.ravel(), A_eq=A, b_eq=rhs, bounds=(0, None), method="highs")
        dual = DualSolution(p=res.eqlin.marginals[:n], q=res.eqlin.marginals[n:])
        effective = cost
    elif variant == "relaxed":
        shipped = min(b.sum(), a.sum())
        res = linprog(
            cost.ravel(),
            A_ub=A,
            b_ub=rhs,
            A_eq=np.ones((1, n * m)),
            b_eq=[shipped],
            bounds=(0, None),
            method="highs",
        )
        dual = None
        effective = cost
    else:
        if pen is None:
            raise ValueError("partial variant requires penalties")
        effective = reduced_cost(cost, pen)
        res = linprog(
            effective.ravel(), A_ub=A, b_ub=rhs, bounds=(0, None), method="highs"
        )
        dual = DualSolution(p=res.ineqlin.marginals[:n], q=res.ineqlin.marginals[n:])

    if not res.success:
        return TransportPlan(
            pi=np.zeros((n, m)),
            objective=float("nan"),
            transported_mass=0.0,
            status="infeasible",
        )
    pi = res.x.reshape(n, m)
    return TransportPlan(
        pi=pi,
        objective=float((effective * pi).sum()),
        transported_mass=float(pi.sum()),
        dual=dual,
    )


def verify_against_oracle(
    plan: TransportPlan,
    cost: np.ndarray,
    beta: DiscreteMeasure,
    alpha: DiscreteMeasure,
    variant: str = "balanced",
    pen: PenaltyVectors | None = None,
) -> dict:
    """Cross-check a solved plan against the reference solver.

    Returns the JSON-ready report emitted by verification mode.
    """
    reference = oracle_solve(cost, beta, alpha, variant, pen)
    report = {
        "objective_main": plan.objective,
        "objective_oracle": reference.objective,
        "duality_gap": None,
        "max_slack_violation": None,
    }
    dual = plan.dual or reference.dual
    if dual is not None and variant in ("balanced", "partial"):
        check = dual_feasibility_check(
            plan, dual, cost, beta, alpha, pen if variant == "partial" else None
        )
        report["duality_gap"] = check.duality_gap
        report["max_slack_violation"] = max(
            check.dual_feasibility, check.sign_violation, check.complementary_slackness
        )
    return report
