"""Two-phase simplex solver against hand solutions and vertex enumeration."""

from itertools import combinations

import numpy as np
import pytest

from corrineq.errors import DimensionMismatch
from corrineq.simplex import (
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    LpProblem,
    simplex_solve,
)


def solve(c, a_eq=None, b_eq=None, a_ub=None, b_ub=None, maximize=False):
    return simplex_solve(LpProblem(
        c=np.asarray(c, dtype=float),
        a_eq=None if a_eq is None else np.asarray(a_eq, dtype=float),
        b_eq=None if b_eq is None else np.asarray(b_eq, dtype=float),
        a_ub=None if a_ub is None else np.asarray(a_ub, dtype=float),
        b_ub=None if b_ub is None else np.asarray(b_ub, dtype=float),
        maximize=maximize,
    ))


def brute_force_max(c, a_ub, b_ub, tol=1e-9):
    """Exact optimum of max c.x s.t. a_ub x <= b_ub, x >= 0, by vertices.

    Only valid when the feasible region is bounded; returns None when no
    vertex is feasible (region empty, since a bounded nonempty
    polyhedron has a vertex here).
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    rows = [(np.asarray(r, dtype=float), float(rhs)) for r, rhs in zip(a_ub, b_ub)]
    rows += [(-np.eye(n)[i], 0.0) for i in range(n)]
    best = None
    for active in combinations(range(len(rows)), n):
        a = np.array([rows[i][0] for i in active])
        b = np.array([rows[i][1] for i in active])
        try:
            vertex = np.linalg.solve(a, b)
        except np.linalg.LinAlgError:
            continue
        ok = all(np.dot(r, vertex) <= rhs + tol for r, rhs in rows)
        if ok:
            value = float(c @ vertex)
            if best is None or value > best:
                best = value
    return best


class TestKnownSolutions:
    def test_simple_max(self):
        # max x + y s.t. x <= 2, y <= 3
        sol = solve([1, 1], a_ub=[[1, 0], [0, 1]], b_ub=[2, 3], maximize=True)
        assert sol.status == OPTIMAL
        assert sol.objective == pytest.approx(5.0)
        assert sol.x == pytest.approx([2.0, 3.0])

    def test_shared_resource(self):
        # max 3x + 5y s.t. x + 2y <= 14, 3x - y <= 0, x - y <= 2
        sol = solve(
            [3, 5],
            a_ub=[[1, 2], [3, -1], [1, -1]],
            b_ub=[14, 0, 2],
            maximize=True,
        )
        assert sol.status == OPTIMAL
        assert sol.objective == pytest.approx(36.0)
        assert sol.x == pytest.approx([2.0, 6.0])

    def test_equality_constrained(self):
        # min x + 2y + 3z s.t. x + y + z = 1
        sol = solve([1, 2, 3], a_eq=[[1, 1, 1]], b_eq=[1])
        assert sol.status == OPTIMAL
        assert sol.objective == pytest.approx(1.0)

    def test_unbounded(self):
        sol = solve([1, 0], a_ub=[[-1, 0]], b_ub=[1], maximize=True)
        assert sol.status == UNBOUNDED

    def test_infeasible_bounds(self):
        # x <= 1 and -x <= -2 cannot both hold
        sol = solve([1], a_ub=[[1], [-1]], b_ub=[1, -2], maximize=True)
        assert sol.status == INFEASIBLE

    def test_infeasible_equalities(self):
        sol = solve([1, 1], a_eq=[[1, 1], [1, 1]], b_eq=[1, 2])
        assert sol.status == INFEASIBLE

    def test_redundant_equality_rows(self):
        sol = solve([1, 1], a_eq=[[1, 1], [2, 2]], b_eq=[1, 2])
        assert sol.status == OPTIMAL
        assert sol.objective == pytest.approx(1.0)

    def test_degenerate_does_not_cycle(self):
        # classic cycling-prone instance; Bland's rule must terminate
        sol = solve(
            [-0.75, 150, -0.02, 6],
            a_ub=[
                [0.25, -60, -0.04, 9],
                [0.5, -90, -0.02, 3],
                [0, 0, 1, 0],
            ],
            b_ub=[0, 0, 1],
        )
        assert sol.status == OPTIMAL
        assert sol.objective == pytest.approx(-0.05)


class TestCertificates:
    def test_duals_match_objective(self):
        sol = solve(
            [3, 5],
            a_ub=[[1, 2], [3, -1], [1, -1]],
            b_ub=[14, 0, 2],
            maximize=True,
        )
        via_duals = float(sol.duals_ub @ np.array([14.0, 0.0, 2.0]))
        assert via_duals == pytest.approx(sol.objective, abs=1e-9)

    def test_farkas_certificate_for_infeasible(self):
        a_ub = np.array([[1.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
        b_ub = np.array([-1.0, 0.0, 0.0])
        sol = solve([1, 1], a_ub=a_ub, b_ub=b_ub)
        assert sol.status == INFEASIBLE
        yb = float(sol.farkas_ub @ b_ub)
        combo = sol.farkas_ub @ a_ub
        # y <= 0 on <= rows, y.A <= 0 columnwise, y.b > 0 proves emptiness
        assert np.all(sol.farkas_ub <= 1e-9)
        assert np.all(combo <= 1e-7)
        assert yb > 1e-9

    def test_random_infeasible_certificates(self):
        rng = np.random.default_rng(7)
        found = 0
        for _ in range(200):
            n, m = rng.integers(2, 5), rng.integers(2, 6)
            a_ub = rng.normal(size=(m, n)).round(2)
            b_ub = rng.normal(size=m).round(2)
            sol = solve(rng.normal(size=n).round(2), a_ub=a_ub, b_ub=b_ub)
            if sol.status != INFEASIBLE:
                continue
            found += 1
            yb = float(sol.farkas_ub @ b_ub)
            combo = sol.farkas_ub @ a_ub
            assert np.all(sol.farkas_ub <= 1e-7)
            assert np.all(combo <= 1e-6)
            assert yb > 1e-9
        assert found > 10


class TestAgainstEnumeration:
    def test_random_bounded_problems(self):
        rng = np.random.default_rng(42)
        for trial in range(150):
            n = int(rng.integers(2, 5))
            m = int(rng.integers(1, 5))
            a_ub = rng.normal(size=(m, n)).round(2)
            b_ub = rng.uniform(0.5, 3.0, size=m).round(2)
            # box rows keep the region bounded so every optimum is a vertex
            a_full = np.vstack([a_ub, np.eye(n)])
            b_full = np.concatenate([b_ub, np.full(n, 4.0)])
            c = rng.normal(size=n).round(2)
            sol = solve(c, a_ub=a_full, b_ub=b_full, maximize=True)
            expected = brute_force_max(c, a_full, b_full)
            assert sol.status == OPTIMAL, f"trial {trial}"
            assert expected is not None
            assert sol.objective == pytest.approx(expected, abs=1e-7), f"trial {trial}"
            slack = b_full - a_full @ sol.x
            assert slack.min() >= -1e-8
            assert sol.x.min() >= -1e-8

    def test_random_equality_problems(self):
        rng = np.random.default_rng(3)
        for trial in range(60):
            n = int(rng.integers(2, 5))
            x_feas = rng.uniform(0.2, 1.5, size=n).round(2)
            a_eq = rng.normal(size=(1, n)).round(2)
            b_eq = a_eq @ x_feas  # feasible by construction
            a_ub = np.eye(n)
            b_ub = np.full(n, 5.0)
            c = rng.normal(size=n).round(2)
            sol = solve(c, a_eq=a_eq, b_eq=b_eq, a_ub=a_ub, b_ub=b_ub, maximize=True)
            assert sol.status == OPTIMAL, f"trial {trial}"
            assert np.abs(a_eq @ sol.x - b_eq).max() < 1e-8


class TestValidation:
    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            LpProblem(
                c=np.array([1.0, 2.0]),
                a_eq=np.array([[1.0, 2.0, 3.0]]),
                b_eq=np.array([1.0]),
                a_ub=None,
                b_ub=None,
            )

    def test_rhs_length_mismatch(self):
        with pytest.raises(DimensionMismatch):
            LpProblem(
                c=np.array([1.0]),
                a_eq=None,
                b_eq=None,
                a_ub=np.array([[1.0]]),
                b_ub=np.array([1.0, 2.0]),
            )
