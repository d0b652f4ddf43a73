"""Exact qubit evaluation of correlation inequalities.

States are plain complex numpy arrays (2x2 or 4x4 density matrices),
measurement settings are unit Bloch vectors, and correlators come in two
flavours: tensor-product expectations for commuting cross-party pairs
and sequential expectations with collapse for same-party pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dsl import VariableId
from .errors import (
    DimensionMismatch,
    MissingAssignment,
    MissingSetting,
    NonUnitVector,
    NotHermitian,
)
from .polynomials import CorrelationInequality

HERMITICITY_TOL = 1e-10
UNIT_TOL = 1e-12

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
ID2 = np.eye(2, dtype=complex)
ID4 = np.eye(4, dtype=complex)

TENSOR = "tensor"
SEQUENTIAL = "sequential"


def unit_vector(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise NonUnitVector(f"expected 3 components, got shape {v.shape}")
    if abs(np.dot(v, v) - 1.0) > 1e-9:
        raise NonUnitVector(f"|v| = {np.linalg.norm(v):.12f} is not 1")
    return v


def plane_vector(theta: float) -> np.ndarray:
    """Unit vector at angle theta from z toward x, inside the x-z plane."""
    return np.array([np.sin(theta), 0.0, np.cos(theta)])


def ladder_settings(variables, start: float, step: float) -> dict:
    """Coplanar settings for the listed variables, spaced by `step`."""
    return {var: plane_vector(start + i * step) for i, var in enumerate(variables)}


def pauli_observable(direction) -> np.ndarray:
    """n . sigma for a unit Bloch vector n; Hermitian with eigenvalues ±1."""
    n = unit_vector(direction)
    return n[0] * PAULI_X + n[1] * PAULI_Y + n[2] * PAULI_Z


def projectors(direction):
    """The two eigenprojectors (I ± n.sigma)/2."""
    obs = pauli_observable(direction)
    return (ID2 + obs) / 2, (ID2 - obs) / 2


def singlet_state() -> np.ndarray:
    """Density matrix of (|01> - |10>)/sqrt(2)."""
    psi = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
    return np.outer(psi, psi.conj())


def qubit_state(direction) -> np.ndarray:
    """Pure qubit state polarized along a Bloch direction."""
    return (ID2 + pauli_observable(direction)) / 2


def product_state(n_a, n_b) -> np.ndarray:
    """Two-qubit product state |n_a><n_a| x |n_b><n_b|."""
    return np.kron(qubit_state(n_a), qubit_state(n_b))


def maximally_mixed(dimension: int) -> np.ndarray:
    return np.eye(dimension, dtype=complex) / dimension


def validate_density(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape not in ((2, 2), (4, 4)):
        raise DimensionMismatch(f"density matrix must be 2x2 or 4x4, got {rho.shape}")
    if np.abs(rho - rho.conj().T).max() > HERMITICITY_TOL:
        raise NotHermitian("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > 1e-10:
        raise ValueError(f"trace is {np.trace(rho).real}, expected 1")
    if np.linalg.eigvalsh(rho).min() < -1e-10:
        raise ValueError("density matrix has a negative eigenvalue")
    return rho


def _embed(op, subsystem: int) -> np.ndarray:
    """Lift a 2x2 operator onto one factor of a two-qubit space."""
    if subsystem == 0:
        return np.kron(op, ID2)
    if subsystem == 1:
        return np.kron(ID2, op)
    raise DimensionMismatch(f"subsystem must be 0 or 1, got {subsystem}")


def spatial_correlator(rho, a, b) -> float:
    """<A x B> = Tr(rho (a.sigma x b.sigma)) for a 4x4 state."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise DimensionMismatch(f"spatial correlator needs a 4x4 state, got {rho.shape}")
    value = np.trace(rho @ np.kron(pauli_observable(a), pauli_observable(b)))
    return float(value.real)


def sequential_correlator(rho, first, second, subsystem=None) -> float:
    """Two projective measurements in time order with collapse in between.

    Returns sum over outcomes o1, o2 of o1*o2*P(o1 then o2), computed by
    the full collapse sum.  For qubit projective measurements this comes
    out equal to first . second whatever the state; the test suite checks
    that identity rather than assuming it here.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape == (2, 2):
        p1_plus, p1_minus = projectors(first)
        p2_plus, p2_minus = projectors(second)
    elif rho.shape == (4, 4):
        if subsystem not in (0, 1):
            raise DimensionMismatch("a 4x4 state needs subsystem 0 or 1")
        p1_plus, p1_minus = (_embed(p, subsystem) for p in projectors(first))
        p2_plus, p2_minus = (_embed(p, subsystem) for p in projectors(second))
    else:
        raise DimensionMismatch(f"state must be 2x2 or 4x4, got {rho.shape}")
    total = 0.0
    for o1, p1 in ((1, p1_plus), (-1, p1_minus)):
        collapsed = p1 @ rho @ p1
        for o2, p2 in ((1, p2_plus), (-1, p2_minus)):
            total += o1 * o2 * float(np.trace(p2 @ collapsed).real)
    return total


@dataclass(frozen=True)
class TermRule:
    """How to evaluate one inequality term on a two-qubit state.

    kind "tensor": var_a acts on subsystem 0 and var_b on subsystem 1,
    jointly.  kind "sequential": first then second, both on `subsystem`,
    with collapse in between.
    """

    kind: str
    var_a: VariableId | None = None
    var_b: VariableId | None = None
    subsystem: int | None = None
    first: VariableId | None = None
    second: VariableId | None = None


def tensor_rule(var_on_a, var_on_b) -> TermRule:
    return TermRule(TENSOR, var_a=var_on_a, var_b=var_on_b)


def sequential_rule(subsystem, first, second) -> TermRule:
    return TermRule(SEQUENTIAL, subsystem=subsystem, first=first, second=second)


def auto_assignment(ineq: CorrelationInequality, scenario=None) -> dict:
    """Default rules: cross-party terms tensor, same-party sequential.

    Parties are ranked alphabetically onto subsystems 0 and 1;
    sequential order follows ascending variable order, matching a
    protocol that measures lower indices earlier.  Without a scenario
    the variable letter stands in for the party, so a single-party
    multi-letter inequality needs its scenario passed explicitly.
    """
    if scenario is None:
        party_of = {v: v.letter for v in ineq.variables()}
    else:
        party_of = {v: scenario.party(v) for v in ineq.variables()}
    names = sorted(set(party_of.values()))
    if len(names) > 2:
        raise MissingAssignment(f"cannot auto-assign {len(names)} parties to two subsystems")
    side = {name: i for i, name in enumerate(names)}
    rules = {}
    for mono in ineq.terms:
        a, b = sorted(mono.variables, key=VariableId.sort_key)
        if party_of[a] == party_of[b]:
            rules[mono.variables] = sequential_rule(side[party_of[a]], a, b)
        elif side[party_of[a]] == 0:
            rules[mono.variables] = tensor_rule(a, b)
        else:
            rules[mono.variables] = tensor_rule(b, a)
    return rules


def term_correlator(rho, rule: TermRule, settings) -> float:
    def setting(var):
        try:
            return settings[var]
        except KeyError:
            raise MissingSetting(f"no direction given for {var}") from None

    if rule.kind == TENSOR:
        return spatial_correlator(rho, setting(rule.var_a), setting(rule.var_b))
    if rule.kind == SEQUENTIAL:
        return sequential_correlator(rho, setting(rule.first), setting(rule.second), rule.subsystem)
    raise MissingAssignment(f"unknown rule kind {rule.kind!r}")


def evaluate_inequality_quantum(ineq, rho, settings, assignment=None) -> float:
    """Signed sum of per-term correlators under the given rules."""
    if assignment is None:
        assignment = auto_assignment(ineq)
    total = 0.0
    for mono in ineq.terms:
        rule = assignment.get(mono.variables)
        if rule is None:
            raise MissingAssignment(f"no rule for term {mono}")
        total += mono.coefficient * term_correlator(rho, rule, settings)
    return total


def hybrid_settings(variables=None):
    """Canonical descending pi/4 ladder in the x-z plane for X1 X2 Y1 Y2.

    These directions realize the maximal singlet value of the hybrid
    combination under the literal tensor-product sign convention.
    """
    if variables is None:
        variables = [VariableId("X", 1), VariableId("X", 2), VariableId("Y", 1), VariableId("Y", 2)]
    x1, x2, y1, y2 = variables
    return {
        x1: plane_vector(0.0),
        x2: plane_vector(-np.pi / 4),
        y1: plane_vector(-np.pi / 2),
        y2: plane_vector(-3 * np.pi / 4),
    }


def product_ladder_settings(variables=None):
    """Ascending pi/4 ladder ordered X2, X1, Y2, Y1 in the x-z plane.

    Along this ordering neighbours differ by pi/4 starting from X2 on
    the z axis; with both local states polarized along the Y2 direction
    the hybrid combination reaches 3/sqrt(2) on a product state.
    """
    if variables is None:
        variables = [VariableId("X", 2), VariableId("X", 1), VariableId("Y", 2), VariableId("Y", 1)]
    return ladder_settings(variables, 0.0, np.pi / 4)


def hybrid_f_product(n_a, n_b, settings) -> float:
    """Closed-form hybrid value on the product state |n_a>|n_b>.

    x1.x2 + (x1.n_a)(y2.n_b) - (x2.n_a)(y1.n_b) + y1.y2; the same-party
    dot products are the state-independent sequential correlators.
    """
    n_a, n_b = unit_vector(n_a), unit_vector(n_b)
    x1 = unit_vector(settings[VariableId("X", 1)])
    x2 = unit_vector(settings[VariableId("X", 2)])
    y1 = unit_vector(settings[VariableId("Y", 1)])
    y2 = unit_vector(settings[VariableId("Y", 2)])
    return float(
        x1 @ x2 + (x1 @ n_a) * (y2 @ n_b) - (x2 @ n_a) * (y1 @ n_b) + y1 @ y2
    )


def build_f_operator(settings):
    """Operator split F = S1 + S2 for the hybrid combination.

    S1 carries the two sequential terms as the scalar
    (x1.x2 + y1.y2) times identity; S2 carries the tensor terms
    (x1.sigma)x(y2.sigma) - (x2.sigma)x(y1.sigma).
    """
    x1 = unit_vector(settings[VariableId("X", 1)])
    x2 = unit_vector(settings[VariableId("X", 2)])
    y1 = unit_vector(settings[VariableId("Y", 1)])
    y2 = unit_vector(settings[VariableId("Y", 2)])
    s1 = float(x1 @ x2 + y1 @ y2) * ID4
    s2 = np.kron(pauli_observable(x1), pauli_observable(y2)) - np.kron(
        pauli_observable(x2), pauli_observable(y1)
    )
    return s1 + s2, s1, s2


def s2_square_closed_form(settings) -> np.ndarray:
    """2[I - (x1.x2)(y1.y2) - ((x1 cross x2).sigma) x ((y1 cross y2).sigma)].

    Independent of build_f_operator's matrix product; the two must agree
    element by element.
    """
    x1 = unit_vector(settings[VariableId("X", 1)])
    x2 = unit_vector(settings[VariableId("X", 2)])
    y1 = unit_vector(settings[VariableId("Y", 1)])
    y2 = unit_vector(settings[VariableId("Y", 2)])
    cx = np.cross(x1, x2)
    cy = np.cross(y1, y2)

    def dot_sigma(v):
        return v[0] * PAULI_X + v[1] * PAULI_Y + v[2] * PAULI_Z

    return 2.0 * (
        ID4 * (1.0 - (x1 @ x2) * (y1 @ y2)) - np.kron(dot_sigma(cx), dot_sigma(cy))
    )


def tsirelson_envelope(theta1: float, theta2: float) -> float:
    """|cos t1 + cos t2 + sqrt(2) sqrt(1 - cos(t1 - t2))|.

    Upper envelope of the hybrid operator norm over coplanar settings
    with relative angles t1 (between the X pair) and t2 (between the Y
    pair); bounded by 2 sqrt(2) everywhere.
    """
    inner = max(1.0 - np.cos(theta1 - theta2), 0.0)
    return float(abs(np.cos(theta1) + np.cos(theta2) + np.sqrt(2.0) * np.sqrt(inner)))


def operator_norm(matrix) -> float:
    """Largest absolute eigenvalue of a Hermitian matrix."""
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got {m.shape}")
    if np.abs(m - m.conj().T).max() > HERMITICITY_TOL:
        raise NotHermitian("operator norm here is defined for Hermitian matrices only")
    return float(np.abs(np.linalg.eigvalsh(m)).max())
