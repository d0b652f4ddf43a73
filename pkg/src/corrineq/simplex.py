"""Dense two-phase simplex with Bland's rule.

Sized for the probability polytopes in this package (a few hundred
columns), favouring determinism and auditability over speed.  Infeasible
problems come back with a Farkas vector read off the phase-1 reduced
costs, which downstream code turns into a violated inequality.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NumericalBreakdown

FEASIBILITY_TOL = 1e-9
OPTIMALITY_TOL = 1e-9
PIVOT_TOL = 1e-12

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class LpProblem:
    """min (or max) c.x  s.t.  a_eq x = b_eq,  a_ub x <= b_ub,  x >= 0."""

    c: np.ndarray
    a_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    a_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    maximize: bool = False

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        n = self.c.shape[0]
        for name in ("a_eq", "a_ub"):
            mat = getattr(self, name)
            if mat is not None:
                mat = np.atleast_2d(np.asarray(mat, dtype=float))
                setattr(self, name, mat)
                if mat.shape[1] != n:
                    raise DimensionMismatch(f"{name} has {mat.shape[1]} columns, objective has {n}")
        for aname, bname in (("a_eq", "b_eq"), ("a_ub", "b_ub")):
            mat, vec = getattr(self, aname), getattr(self, bname)
            if (mat is None) != (vec is None):
                raise DimensionMismatch(f"{aname} and {bname} must be given together")
            if vec is not None:
                vec = np.asarray(vec, dtype=float).ravel()
                setattr(self, bname, vec)
                if vec.shape[0] != mat.shape[0]:
                    raise DimensionMismatch(f"{bname} has {vec.shape[0]} entries, {aname} has {mat.shape[0]} rows")


@dataclass
class LpSolution:
    status: str
    objective: float | None
    x: np.ndarray | None
    duals_eq: np.ndarray | None = None
    duals_ub: np.ndarray | None = None
    farkas_eq: np.ndarray | None = None
    farkas_ub: np.ndarray | None = None
    iterations: int = 0
    basis: list = field(default_factory=list)


def _pivot(tab, basis, row, col):
    piv = tab[row, col]
    if abs(piv) < PIVOT_TOL:
        raise NumericalBreakdown(f"pivot {piv:.3e} below {PIVOT_TOL}")
    tab[row] /= piv
    for r in range(tab.shape[0]):
        if r != row and tab[r, col] != 0.0:
            tab[r] -= tab[r, col] * tab[row]
    basis[row] = col


def _run_simplex(tab, basis, cost, allowed, max_iter):
    """Minimize cost over the tableau in place.  Bland's rule throughout.

    tab has shape (m, width+1) with the rhs in the last column; `cost` is
    length width.  Returns (reduced_costs, objective, status, iterations).
    """
    m, wide = tab.shape[0], tab.shape[1] - 1
    iterations = 0
    basis_arr = np.asarray(basis)
    while True:
        # reduced costs r = c - c_B . tab (nonbasic view of the objective)
        c_b = cost[basis_arr]
        r = cost - c_b @ tab[:, :wide]
        candidates = allowed & (r < -OPTIMALITY_TOL)
        if not candidates.any():
            objective = float(c_b @ tab[:, wide])
            basis[:] = basis_arr.tolist()
            return r, objective, OPTIMAL, iterations
        entering = int(np.argmax(candidates))  # first True: Bland's entering rule
        column = tab[:, entering]
        rows = column > FEASIBILITY_TOL
        if not rows.any():
            basis[:] = basis_arr.tolist()
            return r, None, UNBOUNDED, iterations
        ratios = np.full(m, np.inf)
        ratios[rows] = tab[rows, wide] / column[rows]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + 1e-12)
        leaving = int(ties[np.argmin(basis_arr[ties])])  # smallest basis index on ties
        _pivot(tab, basis_arr, leaving, entering)
        iterations += 1
        if iterations > max_iter:
            raise NumericalBreakdown(f"no convergence after {max_iter} pivots")


def simplex_solve(problem: LpProblem) -> LpSolution:
    """Solve an LpProblem; status is optimal, infeasible or unbounded.

    Infeasible results carry Farkas row multipliers y with
    y.b > 0 and y.A <= 0 (proof no feasible point exists); optimal
    results carry dual values per constraint row.
    """
    n = problem.c.shape[0]
    a_eq = problem.a_eq if problem.a_eq is not None else np.zeros((0, n))
    b_eq = problem.b_eq if problem.b_eq is not None else np.zeros(0)
    a_ub = problem.a_ub if problem.a_ub is not None else np.zeros((0, n))
    b_ub = problem.b_ub if problem.b_ub is not None else np.zeros(0)
    m_eq, m_ub = a_eq.shape[0], a_ub.shape[0]
    m = m_eq + m_ub
    c = -problem.c if problem.maximize else problem.c

    # standard form: [A_eq 0; A_ub I] x' = b, slack per ub row, artificial per row
    wide = n + m_ub + m
    tab = np.zeros((m, wide + 1))
    tab[:m_eq, :n] = a_eq
    tab[m_eq:, :n] = a_ub
    tab[m_eq:, n:n + m_ub] = np.eye(m_ub)
    tab[:m_eq, wide] = b_eq
    tab[m_eq:, wide] = b_ub
    row_sign = np.ones(m)
    for i in range(m):
        if tab[i, wide] < 0:
            tab[i] = -tab[i]
            row_sign[i] = -1.0
    tab[:, n + m_ub:wide] = np.eye(m)
    basis = list(range(n + m_ub, wide))
    art = np.arange(n + m_ub, wide)

    phase1_cost = np.zeros(wide)
    phase1_cost[art] = 1.0
    allowed = np.ones(wide, dtype=bool)
    max_iter = 5000 + 50 * (m + wide)
    r1, val1, status, it1 = _run_simplex(tab, basis, phase1_cost, allowed, max_iter)
    if status == UNBOUNDED:
        raise NumericalBreakdown("phase 1 reported unbounded; artificial objective is bounded below")
    if val1 > FEASIBILITY_TOL:
        # y_i = 1 - reduced cost of artificial i certifies infeasibility
        y = (1.0 - r1[art]) * row_sign
        return LpSolution(INFEASIBLE, None, None, farkas_eq=y[:m_eq], farkas_ub=y[m_eq:], iterations=it1)

    # drive any leftover artificials out of the basis; all-zero rows are redundant
    keep = np.ones(m, dtype=bool)
    for i in range(m):
        if basis[i] >= n + m_ub:
            pivot_col = -1
            for j in range(n + m_ub):
                if abs(tab[i, j]) > FEASIBILITY_TOL:
                    pivot_col = j
                    break
            if pivot_col >= 0:
                _pivot(tab, basis, i, pivot_col)
            else:
                keep[i] = False
    if not keep.all():
        tab = tab[keep]
        basis = [b for b, k in zip(basis, keep) if k]

    phase2_cost = np.zeros(wide)
    phase2_cost[:n] = c
    allowed[art] = False
    r2, val2, status, it2 = _run_simplex(tab, basis, phase2_cost, allowed, max_iter)
    if status == UNBOUNDED:
        return LpSolution(UNBOUNDED, None, None, iterations=it1 + it2)
    x = np.zeros(wide)
    for i, b in enumerate(basis):
        x[b] = tab[i, -1]
    # phase-2 artificial cost is 0, so duals are minus the reduced costs there
    y = -r2[art] * row_sign
    if problem.maximize:
        val2, y = -val2, -y
    return LpSolution(
        OPTIMAL, val2, x[:n].copy(),
        duals_eq=y[:m_eq], duals_ub=y[m_eq:],
        iterations=it1 + it2, basis=list(basis),
    )
