import numpy as np
import pytest

from curveot.curves import validate_curve
from curveot.errors import (
    DimensionMismatch,
    InfeasiblePenalties,
    NegativePenalty,
    UnbalancedMarginals,
)
from curveot.measures import DiscreteMeasure
from curveot.oracle import oracle_solve
from curveot.transport import (
    PenaltyVectors,
    TransportPlan,
    construct_penalties,
    dual_feasibility_check,
    euclidean_cost,
    reduced_cost,
    solve_balanced,
    solve_partial,
    solve_relaxed,
)

from conftest import metric_cost, random_probability
import worked_example as ex


def measures(b, a):
    return DiscreteMeasure(b), DiscreteMeasure(a)


class TestEuclideanCost:
    def test_worked_example_table(self):
        v = validate_curve(ex.V_POINTS, id="V")
        w = validate_curve(ex.W_POINTS, id="W")
        c = euclidean_cost(v, w)
        assert c.shape == (3, 4)
        assert np.abs(c - ex.C_TABLE).max() <= 5e-5

    def test_zero_diagonal_for_identical_curves(self):
        a = validate_curve([(0, 0), (1, 2), (3, 1)])
        c = euclidean_cost(a, a)
        assert np.allclose(np.diag(c), 0.0)
        assert (c >= 0).all()

    def test_three_four_five(self):
        a = validate_curve([(0, 0), (3, 4)])
        c = euclidean_cost(a, a)
        assert c[0, 1] == 5.0

    def test_order_parameter_squares(self):
        a = validate_curve([(0, 0), (3, 4)])
        c = euclidean_cost(a, a, order=2.0)
        assert c[0, 1] == 25.0


class TestSolveBalanced:
    def test_single_cell(self):
        b, a = measures([1.0], [1.0])
        plan = solve_balanced(np.array([[7.0]]), b, a)
        assert plan.objective == 7.0
        assert plan.pi[0, 0] == 1.0
        assert plan.status == "optimal"

    def test_zero_cost_matching(self):
        b, a = measures([0.5, 0.5], [0.5, 0.5])
        plan = solve_balanced(np.array([[0.0, 1.0], [1.0, 0.0]]), b, a)
        assert plan.objective == 0.0
        assert np.allclose(plan.pi, np.diag([0.5, 0.5]))

    def test_two_by_two_asymmetric(self):
        b, a = measures([0.7, 0.3], [0.4, 0.6])
        plan = solve_balanced(np.array([[0.0, 1.0], [1.0, 0.0]]), b, a)
        assert abs(plan.objective - 0.3) <= 1e-12
        assert np.allclose(plan.pi, [[0.4, 0.3], [0.0, 0.3]])

    def test_marginals_conserved(self, rng):
        for _ in range(30):
            n, m = rng.integers(2, 9, 2)
            cost = rng.uniform(0, 5, (n, m))
            b, a = random_probability(rng, n), random_probability(rng, m)
            plan = solve_balanced(cost, b, a)
            assert np.abs(plan.pi.sum(1) - b.weights).max() <= 1e-9
            assert np.abs(plan.pi.sum(0) - a.weights).max() <= 1e-9
            assert abs(plan.transported_mass - 1.0) <= 1e-9
            assert (plan.pi >= 0).all()

    def test_unbalanced_rejected(self):
        b, a = measures([0.5, 0.4], [0.5, 0.5])
        with pytest.raises(UnbalancedMarginals):
            solve_balanced(np.zeros((2, 2)), b, a)

    def test_dimension_mismatch(self):
        b, a = measures([0.5, 0.5], [1.0])
        with pytest.raises(DimensionMismatch):
            solve_balanced(np.zeros((2, 2)), b, a)

    def test_zero_weight_points_pruned_harmlessly(self, rng):
        cost = rng.uniform(1, 3, (3, 3))
        b, a = measures([0.5, 0.0, 0.5], [0.25, 0.5, 0.25])
        plan = solve_balanced(cost, b, a)
        assert (plan.pi[1, :] == 0.0).all()
        dense = oracle_solve(cost, DiscreteMeasure([0.5, 0.0, 0.5]), DiscreteMeasure([0.25, 0.5, 0.25]))
        assert abs(plan.objective - dense.objective) <= 1e-10

    def test_scale_equivariance(self, rng):
        cost = rng.uniform(0.1, 4, (5, 6))
        b, a = random_probability(rng, 5), random_probability(rng, 6)
        base = solve_balanced(cost, b, a)
        for s in (0.001, 3.0, 2500.0):
            scaled = solve_balanced(s * cost, b, a)
            assert abs(scaled.objective - s * base.objective) <= 1e-9 * max(
                1.0, s * base.objective
            )


class TestMetricProperty:
    def test_symmetry_triangle_identity(self, rng):
        for _ in range(40):
            k = int(rng.integers(2, 9))
            cost = metric_cost(rng, k)
            a, b, g = (random_probability(rng, k) for _ in range(3))
            w_ab = solve_balanced(cost, a, b).objective
            w_ba = solve_balanced(cost, b, a).objective
            w_ag = solve_balanced(cost, a, g).objective
            w_bg = solve_balanced(cost, b, g).objective
            w_aa = solve_balanced(cost, a, a).objective
            assert abs(w_ab - w_ba) <= 1e-9
            assert w_ag <= w_ab + w_bg + 1e-7
            assert abs(w_aa) <= 1e-9


class TestSolveRelaxed:
    def test_mass_is_min_of_totals(self, rng):
        cost = rng.uniform(0, 2, (3, 4))
        b, a = measures([0.5, 0.3, 0.2], [0.2, 0.1, 0.1, 0.1])
        plan = solve_relaxed(cost, b, a)
        assert abs(plan.transported_mass - 0.5) <= 1e-9
        assert (plan.pi.sum(1) <= b.weights + 1e-12).all()
        assert (plan.pi.sum(0) <= a.weights + 1e-12).all()

    def test_single_cell(self):
        b, a = measures([0.4], [0.9])
        plan = solve_relaxed(np.array([[2.0]]), b, a)
        assert np.allclose(plan.pi, [[0.4]])
        assert abs(plan.objective - 0.8) <= 1e-12

    def test_equals_balanced_on_probability_measures(self, rng):
        for _ in range(50):
            n, m = rng.integers(1, 7, 2)
            cost = rng.uniform(0, 5, (n, m))
            b, a = random_probability(rng, n), random_probability(rng, m)
            assert (
                abs(solve_relaxed(cost, b, a).objective - solve_balanced(cost, b, a).objective)
                <= 1e-8
            )

    def test_surplus_demand_side(self):
        cost = np.array([[1.0, 2.0]])
        b, a = measures([0.3], [0.4, 0.4])
        plan = solve_relaxed(cost, b, a)
        assert abs(plan.transported_mass - 0.3) <= 1e-9
        assert abs(plan.objective - 0.3) <= 1e-12  # all mass on the cheap cell


class TestSolvePartial:
    def test_no_negative_reduced_cost_means_empty_plan(self):
        cost = np.full((2, 3), 2.0)
        pen = PenaltyVectors(nu=np.zeros(2), mu=np.zeros(3))
        b, a = measures([0.5, 0.5], [0.3, 0.3, 0.4])
        plan = solve_partial(cost, b, a, pen)
        assert plan.objective == 0.0
        assert (plan.pi == 0.0).all()
        assert plan.transported_mass == 0.0

    def test_mass_settles_on_negative_cells_only(self, rng):
        for _ in range(30):
            n, m = rng.integers(1, 7, 2)
            cost = rng.uniform(0, 4, (n, m))
            pen = PenaltyVectors(nu=rng.uniform(0, 3, n), mu=rng.uniform(0, 3, m))
            b, a = random_probability(rng, n), random_probability(rng, m)
            plan = solve_partial(cost, b, a, pen)
            d = reduced_cost(cost, pen)
            assert plan.pi[d > 1e-12].max(initial=0.0) <= 1e-12
            assert (plan.pi.sum(1) <= b.weights + 1e-12).all()
            assert (plan.pi.sum(0) <= a.weights + 1e-12).all()

    def test_negative_penalty_rejected(self):
        with pytest.raises(NegativePenalty):
            PenaltyVectors(nu=np.array([-0.1]), mu=np.array([0.0]))

    def test_dimension_mismatch(self):
        pen = PenaltyVectors(nu=np.zeros(3), mu=np.zeros(3))
        b, a = measures([0.5, 0.5], [0.5, 0.5])
        with pytest.raises(DimensionMismatch):
            solve_partial(np.zeros((2, 2)), b, a, pen)


class TestWorkedExample:
    """The 3x4 penalized instance with tabulated cost, penalties and plan."""

    def setup_method(self):
        self.v = validate_curve(ex.V_POINTS, id="V")
        self.w = validate_curve(ex.W_POINTS, id="W")
        self.cost = euclidean_cost(self.v, self.w)
        self.pen = PenaltyVectors(nu=ex.NU, mu=ex.MU)

    def test_reduced_cost_matches_table_except_known_cells(self):
        d = reduced_cost(self.cost, self.pen)
        dev = np.abs(d - ex.D_TABLE)
        mask = np.ones_like(dev, dtype=bool)
        for cell in ex.D_INCONSISTENT_CELLS:
            mask[cell] = False
        assert dev[mask].max() <= 5e-5
        # the two inconsistent cells sit within one print unit
        assert dev[~mask].max() <= 1.1e-4

    def test_penalties_strictly_separate_outside_rectangle(self):
        d = reduced_cost(self.cost, self.pen)
        outside = np.ones((3, 4), dtype=bool)
        outside[: ex.ACTIVE_T, : ex.ACTIVE_K] = False
        assert (d[outside] > 0).all()
        inside = ~outside
        assert (d[inside] < 0).all()

    def test_reduced_cost_identity_cases(self):
        pen0 = PenaltyVectors(nu=np.zeros(3), mu=np.zeros(4))
        assert np.array_equal(reduced_cost(self.cost, pen0), self.cost)
        nu = np.array([1.0, 2.0, 3.0])
        mu = np.array([0.5, 1.5, 2.5, 3.5])
        exact = nu[:, None] + mu[None, :]
        assert np.allclose(reduced_cost(exact, PenaltyVectors(nu=nu, mu=mu)), 0.0)

    def test_quarter_marginals_optimum(self):
        """With 0.25 marginals the optimum ships the tabulated top-left cell
        and, additionally, the second diagonal cell: (2,2) also has negative
        penalized cost with free capacity, so the tabulated single-cell plan
        is not optimal for these marginals."""
        b, a = measures([0.25] * 3, [0.25] * 4)
        plan = solve_partial(self.cost, b, a, self.pen)
        ref = oracle_solve(self.cost, b, a, "partial", self.pen)
        assert abs(plan.objective - ref.objective) <= 1e-8
        assert abs(plan.pi[0, 0] - 0.25) <= 1e-9
        assert abs(plan.pi[1, 1] - 0.25) <= 1e-9
        assert plan.pi.sum() == pytest.approx(0.5, abs=1e-9)
        d = reduced_cost(self.cost, self.pen)
        assert plan.pi[d > 1e-12].max(initial=0.0) <= 1e-12

    def test_tabulated_plan_reproduced_when_second_row_and_column_are_empty(self):
        """Marginals that zero the second row/column capacity make the
        tabulated single-cell plan the unique optimum."""
        b, a = measures([0.25, 0.0, 0.0], [0.25, 0.0, 0.25, 0.25])
        plan = solve_partial(self.cost, b, a, self.pen)
        assert np.abs(plan.pi - ex.PLAN_TABLE).max() <= 1e-9


class TestConstructPenalties:
    def test_full_rectangle_returns_zeros(self):
        cost = np.arange(1, 13, dtype=float).reshape(3, 4)
        pen = construct_penalties(cost, 3, 4)
        assert (pen.nu == 0).all() and (pen.mu == 0).all()

    def test_empty_rectangle_returns_zeros(self):
        cost = np.arange(1, 13, dtype=float).reshape(3, 4)
        pen = construct_penalties(cost, 0, 0)
        assert (pen.nu == 0).all() and (pen.mu == 0).all()

    def test_strict_separation_and_coverage(self, rng):
        for _ in range(40):
            n, m = int(rng.integers(2, 7)), int(rng.integers(2, 7))
            cost = rng.uniform(0.5, 5, (n, m))
            t, k = int(rng.integers(1, n + 1)), int(rng.integers(1, m + 1))
            if t == n and k == m:
                continue
            pen = construct_penalties(cost, t, k)
            d = cost - pen.nu[:, None] - pen.mu[None, :]
            outside = np.ones((n, m), dtype=bool)
            outside[:t, :k] = False
            assert (d[outside] > 0).all()
            assert (pen.nu >= 0).all() and (pen.mu >= 0).all()

    def test_worked_example_rectangle(self):
        v = validate_curve(ex.V_POINTS)
        w = validate_curve(ex.W_POINTS)
        cost = euclidean_cost(v, w)
        pen = construct_penalties(cost, ex.ACTIVE_T, ex.ACTIVE_K)
        d = cost - pen.nu[:, None] - pen.mu[None, :]
        outside = np.ones((3, 4), dtype=bool)
        outside[:2, :2] = False
        assert (d[outside] > 0).all()
        # coverage achieved on the whole active rectangle for this instance
        assert (d[~outside] <= 0).all()

    def test_zero_cost_outside_is_infeasible(self):
        cost = np.array([[1.0, 1.0], [1.0, 0.0]])
        with pytest.raises(InfeasiblePenalties):
            construct_penalties(cost, 1, 1)


class TestDualFeasibilityCheck:
    def test_balanced_solution_certifies(self, rng):
        cost = rng.uniform(0, 3, (4, 5))
        b, a = random_probability(rng, 4), random_probability(rng, 5)
        plan = solve_balanced(cost, b, a)
        report = dual_feasibility_check(plan, plan.dual, cost, b, a)
        assert report.ok(1e-7)

    def test_oracle_duals_also_certify(self, rng):
        cost = rng.uniform(0, 3, (3, 3))
        b, a = random_probability(rng, 3), random_probability(rng, 3)
        plan = solve_balanced(cost, b, a)
        ref = oracle_solve(cost, b, a)
        report = dual_feasibility_check(plan, ref.dual, cost, b, a)
        assert report.duality_gap <= 1e-7

    def test_zero_plan_with_positive_reduced_costs(self):
        cost = np.full((2, 2), 3.0)
        pen = PenaltyVectors(nu=np.ones(2), mu=np.ones(2))
        b, a = measures([0.5, 0.5], [0.5, 0.5])
        plan = solve_partial(cost, b, a, pen)
        report = dual_feasibility_check(plan, plan.dual, cost, b, a, pen)
        assert report.complementary_slackness == 0.0
        assert report.ok(1e-7)

    def test_perturbed_plan_is_flagged(self, rng):
        cost = rng.uniform(0.5, 3, (3, 4))
        b, a = random_probability(rng, 3), random_probability(rng, 4)
        plan = solve_balanced(cost, b, a)
        bad_pi = plan.pi.copy()
        bad_pi[np.unravel_index(np.argmax(cost - (plan.dual.p[:, None] + plan.dual.q[None, :])), cost.shape)] += 1e-3
        bad = TransportPlan(
            pi=bad_pi,
            objective=float((cost * bad_pi).sum()),
            transported_mass=float(bad_pi.sum()),
            dual=plan.dual,
        )
        report = dual_feasibility_check(bad, bad.dual, cost, b, a)
        assert not report.ok(1e-7)

    def test_partial_solution_certifies(self, rng):
        for _ in range(20):
            n, m = int(rng.integers(1, 6)), int(rng.integers(1, 6))
            cost = rng.uniform(0, 4, (n, m))
            pen = PenaltyVectors(nu=rng.uniform(0, 2.5, n), mu=rng.uniform(0, 2.5, m))
            b = DiscreteMeasure(rng.uniform(0.01, 1, n))
            a = DiscreteMeasure(rng.uniform(0.01, 1, m))
            plan = solve_partial(cost, b, a, pen)
            report = dual_feasibility_check(plan, plan.dual, cost, b, a, pen)
            assert report.ok(1e-7), report
