"""Search over measurement settings (and product states) for extremal
quantum values of a correlation inequality.

A coarse grid scan locates the basin, then coordinate pattern search
with step halving polishes to 1e-8.  Objectives are evaluated through a
closed-form batch path (correlation tensor for tensor terms, dot
products for sequential terms); the reported optimum is re-evaluated
through the full density-matrix path as an independent check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dsl import VariableId
from .errors import BudgetExhausted
from .polynomials import CorrelationInequality
from .quantum import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    SEQUENTIAL,
    TENSOR,
    auto_assignment,
    evaluate_inequality_quantum,
    plane_vector,
    product_state,
)

DEFAULT_GRID_POINTS = 24
DEFAULT_BUDGET = 10_000_000
REFINEMENT_FLOOR = 1e-8
GRID_CELL_CAP = 1 << 24
_BATCH = 1 << 16

FIXED_STATE = "fixed"
PRODUCT_FAMILY = "product"


class _OutOfBudget(Exception):
    """Internal signal that the evaluation budget ran out mid-search."""


def correlation_tensor(rho) -> np.ndarray:
    """T[i, j] = Tr(rho sigma_i x sigma_j), the two-qubit correlation block."""
    rho = np.asarray(rho, dtype=complex)
    paulis = (PAULI_X, PAULI_Y, PAULI_Z)
    t = np.empty((3, 3))
    for i, si in enumerate(paulis):
        for j, sj in enumerate(paulis):
            t[i, j] = float(np.trace(rho @ np.kron(si, sj)).real)
    return t


@dataclass(frozen=True)
class SettingsParametrization:
    """Angle parameters and how they become Bloch vectors and a state.

    Coplanar mode gives each variable one angle in the x-z plane;
    full_sphere gives two (polar, azimuth).  Product mode appends state
    angles for the two local states, one set when tied, and realizes
    the product state from them; fixed mode keeps the supplied state.
    """

    variables: tuple[VariableId, ...]
    mode: str = FIXED_STATE
    rho: np.ndarray | None = None
    full_sphere: bool = False
    tied_state: bool = True

    def __post_init__(self):
        if self.mode not in (FIXED_STATE, PRODUCT_FAMILY):
            raise ValueError(f"mode must be fixed or product, got {self.mode!r}")
        if self.mode == FIXED_STATE and self.rho is None:
            raise ValueError("fixed mode needs a state")

    @property
    def names(self) -> tuple[str, ...]:
        out = []
        slots = list(map(str, self.variables))
        if self.mode == PRODUCT_FAMILY:
            slots += ["nA"] if self.tied_state else ["nA", "nB"]
        for s in slots:
            out.append(f"theta_{s}")
            if self.full_sphere:
                out.append(f"phi_{s}")
        return tuple(out)

    @property
    def dimension(self) -> int:
        return len(self.names)

    def _vector_block(self, params) -> np.ndarray:
        """(k, n_slots, 3) unit vectors from a (k, dimension) matrix."""
        params = np.atleast_2d(np.asarray(params, dtype=float))
        if self.full_sphere:
            theta, phi = params[:, 0::2], params[:, 1::2]
            sin_t = np.sin(theta)
            return np.stack(
                (sin_t * np.cos(phi), sin_t * np.sin(phi), np.cos(theta)), axis=-1
            )
        return np.stack(
            (np.sin(params), np.zeros_like(params), np.cos(params)), axis=-1
        )

    def batch_vectors(self, params):
        """Per-variable setting vectors plus the two state vectors (or None)."""
        block = self._vector_block(params)
        n_vars = len(self.variables)
        vectors = {var: block[:, i, :] for i, var in enumerate(self.variables)}
        if self.mode == FIXED_STATE:
            return vectors, None, None
        n_a = block[:, n_vars, :]
        n_b = n_a if self.tied_state else block[:, n_vars + 1, :]
        return vectors, n_a, n_b

    def realize(self, params):
        """(state, settings) at one parameter point."""
        vectors, n_a, n_b = self.batch_vectors(np.atleast_2d(params))
        settings = {var: vec[0] for var, vec in vectors.items()}
        if self.mode == FIXED_STATE:
            return self.rho, settings
        return product_state(n_a[0], n_b[0]), settings


@dataclass(frozen=True)
class OptimizationResult:
    value: float
    parameters: np.ndarray
    parameter_names: tuple[str, ...]
    settings: dict[VariableId, np.ndarray]
    state: np.ndarray
    evaluations: int
    converged: bool
    direction: str


def _batch_objective(ineq: CorrelationInequality, parametrization: SettingsParametrization, scenario=None):
    rules = auto_assignment(ineq, scenario)
    tensor = None
    if parametrization.mode == FIXED_STATE and any(r.kind == TENSOR for r in rules.values()):
        tensor = correlation_tensor(parametrization.rho)

    def evaluate(params) -> np.ndarray:
        vectors, n_a, n_b = parametrization.batch_vectors(params)
        total = None
        for mono in ineq.terms:
            rule = rules[mono.variables]
            if rule.kind == TENSOR:
                a, b = vectors[rule.var_a], vectors[rule.var_b]
                if tensor is not None:
                    term = np.einsum("ki,ij,kj->k", a, tensor, b)
                else:
                    term = (a * n_a).sum(axis=1) * (b * n_b).sum(axis=1)
            elif rule.kind == SEQUENTIAL:
                term = (vectors[rule.first] * vectors[rule.second]).sum(axis=1)
            else:
                raise ValueError(f"unknown rule kind {rule.kind!r}")
            contribution = mono.coefficient * term
            total = contribution if total is None else total + contribution
        return total

    return evaluate


def _grid_axes(points):
    return np.linspace(-np.pi, np.pi, points, endpoint=False)


def maximize_violation(
    ineq: CorrelationInequality,
    state,
    parametrization: SettingsParametrization | None = None,
    budget: int = DEFAULT_BUDGET,
    grid_points: int = DEFAULT_GRID_POINTS,
    seed: int = 0,
    scenario=None,
    workers: int | None = None,
) -> OptimizationResult:
    """Find settings (and state, in product mode) extremizing the combination.

    `state` is a density matrix, or the string "product" to search the
    product-state family.  Upper-bound inequalities are maximized,
    lower-bound ones minimized; the result reports the signed value.
    Raises BudgetExhausted (best-so-far attached) if the evaluation
    budget runs out before the step size reaches 1e-8.
    """
    if parametrization is None:
        variables = tuple(sorted(ineq.variables(), key=VariableId.sort_key))
        if isinstance(state, str):
            if state != PRODUCT_FAMILY:
                raise ValueError(f"unknown state family {state!r}")
            parametrization = SettingsParametrization(variables, mode=PRODUCT_FAMILY)
        else:
            parametrization = SettingsParametrization(variables, rho=np.asarray(state, dtype=complex))
    evaluate = _batch_objective(ineq, parametrization, scenario)
    sign = 1.0 if ineq.direction == "<=" else -1.0

    m = parametrization.dimension
    evaluations = 0
    best_value = -np.inf
    best_params = np.zeros(m)

    def consume(count):
        nonlocal evaluations
        evaluations += count
        if evaluations > budget:
            raise _OutOfBudget

    def scan(batch):
        nonlocal best_value, best_params
        consume(batch.shape[0])
        values = sign * evaluate(batch)
        top = int(values.argmax())
        if values[top] > best_value:
            best_value = float(values[top])
            best_params = batch[top].copy()

    def grid_batch(start):
        idx = np.arange(start, min(start + _BATCH, grid_points**m))
        unravelled = np.unravel_index(idx, (grid_points,) * m)
        return np.stack([axis[u] for u in unravelled], axis=1)

    def chunk_best(start):
        batch = grid_batch(start)
        values = sign * evaluate(batch)
        top = int(values.argmax())
        return float(values[top]), batch[top].copy()

    converged = False
    try:
        axis = _grid_axes(grid_points)
        total_cells = grid_points**m
        if total_cells <= GRID_CELL_CAP:
            starts = range(0, total_cells, _BATCH)
            if workers is not None and workers > 1 and total_cells <= budget:
                # parallel chunks; in-order reduction with strict > keeps
                # the same first-cell tie-break as the sequential path
                consume(total_cells)
                from concurrent.futures import ThreadPoolExecutor

                with ThreadPoolExecutor(max_workers=workers) as pool:
                    for value, params in pool.map(chunk_best, starts):
                        if value > best_value:
                            best_value, best_params = value, params
            else:
                for start in starts:
                    scan(grid_batch(start))
        else:
            rng = np.random.default_rng(seed)
            scan(rng.uniform(-np.pi, np.pi, size=(4096 * m, m)))

        step = 2 * np.pi / grid_points
        while step >= REFINEMENT_FLOOR:
            offsets = np.vstack((np.eye(m), -np.eye(m))) * step
            neighbours = best_params[None, :] + offsets
            incumbent = best_value
            scan(neighbours)
            if best_value <= incumbent + 1e-15:
                step /= 2.0
        converged = True
    except _OutOfBudget:
        pass

    rho, settings = parametrization.realize(best_params)
    assignment = auto_assignment(ineq, scenario)
    value = evaluate_inequality_quantum(ineq, rho, settings, assignment)
    result = OptimizationResult(
        value=float(value),
        parameters=best_params,
        parameter_names=parametrization.names,
        settings=settings,
        state=rho,
        evaluations=evaluations,
        converged=converged,
        direction="max" if sign > 0 else "min",
    )
    if not converged:
        raise BudgetExhausted(
            f"budget of {budget} evaluations exhausted at step > {REFINEMENT_FLOOR}", best=result
        )
    return result


@dataclass(frozen=True)
class EnvelopeScan:
    thetas: np.ndarray
    values: np.ndarray
    max_value: float
    argmax: tuple[float, float]

    def rows(self):
        """(theta1, theta2, value) triples in row-major order, CSV-ready."""
        for i, t1 in enumerate(self.thetas):
            for j, t2 in enumerate(self.thetas):
                yield float(t1), float(t2), float(self.values[i, j])


def envelope_grid(thetas1, thetas2) -> np.ndarray:
    """tsirelson_envelope broadcast over two angle arrays."""
    t1 = np.asarray(thetas1, dtype=float)[:, None]
    t2 = np.asarray(thetas2, dtype=float)[None, :]
    inner = np.maximum(1.0 - np.cos(t1 - t2), 0.0)
    return np.abs(np.cos(t1) + np.cos(t2) + np.sqrt(2.0) * np.sqrt(inner))


def envelope_settings(theta1: float, theta2: float) -> dict[VariableId, np.ndarray]:
    """Coplanar settings whose operator realizes an envelope grid point.

    The X pair opens clockwise by theta1 from the z axis, the Y pair
    counter-clockwise by theta2 from a quarter turn below; at the
    saturating angles this reproduces the descending pi/4 ladder.
    """
    return {
        VariableId("X", 1): plane_vector(0.0),
        VariableId("X", 2): plane_vector(-theta1),
        VariableId("Y", 1): plane_vector(-np.pi / 2),
        VariableId("Y", 2): plane_vector(-np.pi / 2 + theta2),
    }


def scan_envelope(resolution: int) -> EnvelopeScan:
    """Dense envelope table over [-pi, pi]^2 with its maximum.

    The maximum is the first grid cell attaining it in row-major order;
    sign-symmetric partners (t1, t2) and (-t1, -t2) carry equal values.
    """
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    thetas = np.linspace(-np.pi, np.pi, resolution)
    values = envelope_grid(thetas, thetas)
    flat = int(values.argmax())
    i, j = divmod(flat, resolution)
    return EnvelopeScan(
        thetas=thetas,
        values=values,
        max_value=float(values[i, j]),
        argmax=(float(thetas[i]), float(thetas[j])),
    )
