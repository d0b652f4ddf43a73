"""Multilinear algebra over ±1 variables and inequality derivation.

Squaring a linear form in dichotomic variables and reducing with v*v = 1
leaves only a constant and degree-2 cross terms.  Summing squares of
forms whose coefficients add to an odd number gives a guaranteed lower
bound (each odd square is at least 1), and rearranging yields a
correlation inequality with an exact rational bound.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction

from .dsl import ScenarioSpec, SosExpression, VariableId
from .errors import EvenGroupWarning, ResidualDegreeError, UnmappedVariable

SPATIAL = "spatial"
CONTEXTUAL = "contextual"
TEMPORAL = "temporal"
HYBRID = "hybrid"

CROSS_PARTY = "cross-party"
SAME_PARTY = "same-party"


def _varset_key(varset):
    return tuple(v.sort_key() for v in sorted(varset, key=VariableId.sort_key))


def format_varset(varset) -> str:
    return "".join(str(v) for v in sorted(varset, key=VariableId.sort_key))


@dataclass(frozen=True, slots=True)
class Monomial:
    """A product of distinct ±1 variables with an integer coefficient."""

    variables: frozenset[VariableId]
    coefficient: int

    def __str__(self):
        name = format_varset(self.variables) if self.variables else "1"
        return f"{self.coefficient}*{name}"


class MultilinearPoly:
    """Integer polynomial with every variable appearing at most once per term.

    Internally a map from frozenset of variables to coefficient; the
    empty set keys the constant.  Multiplication applies v*v = 1, so the
    product of two terms is keyed by the symmetric difference of their
    variable sets.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms=None):
        self._terms = {}
        if terms:
            for varset, coeff in dict(terms).items():
                if coeff != 0:
                    self._terms[frozenset(varset)] = coeff

    @classmethod
    def constant(cls, value):
        return cls({frozenset(): value})

    @classmethod
    def variable(cls, var, coeff=1):
        return cls({frozenset([var]): coeff})

    @classmethod
    def from_linear_form(cls, form):
        return cls({frozenset([var]): coeff for coeff, var in form.terms})

    def items(self):
        return self._terms.items()

    def coefficient(self, varset):
        return self._terms.get(frozenset(varset), 0)

    def constant_term(self):
        return self._terms.get(frozenset(), 0)

    def degrees(self):
        return sorted({len(s) for s in self._terms})

    def monomials(self):
        return [Monomial(s, c) for s, c in sorted(self._terms.items(), key=lambda kv: _varset_key(kv[0]))]

    def variables(self):
        out = set()
        for s in self._terms:
            out |= s
        return frozenset(out)

    def __add__(self, other):
        if isinstance(other, int):
            other = MultilinearPoly.constant(other)
        out = dict(self._terms)
        for s, c in other._terms.items():
            new = out.get(s, 0) + c
            if new:
                out[s] = new
            else:
                out.pop(s, None)
        return MultilinearPoly(out)

    __radd__ = __add__

    def __mul__(self, other):
        if isinstance(other, int):
            return MultilinearPoly({s: c * other for s, c in self._terms.items()})
        out = {}
        for s1, c1 in self._terms.items():
            for s2, c2 in other._terms.items():
                key = s1 ^ s2  # v*v = 1
                new = out.get(key, 0) + c1 * c2
                if new:
                    out[key] = new
                else:
                    out.pop(key, None)
        return MultilinearPoly(out)

    __rmul__ = __mul__

    def evaluate(self, assignment) -> int:
        total = 0
        for s, c in self._terms.items():
            prod = c
            for var in s:
                prod *= assignment[var]
            total += prod
        return total

    def __eq__(self, other):
        return isinstance(other, MultilinearPoly) and self._terms == other._terms

    def __repr__(self):
        if not self._terms:
            return "0"
        return " + ".join(str(m) for m in self.monomials())


@dataclass(frozen=True, slots=True)
class GroupVerdict:
    """Odd-sum check for one squared form."""

    term_count: int
    coefficient_sum: int
    parity: str          # "odd" or "even"
    implied_bound: int   # 1 when the square cannot vanish, else 0


@dataclass(frozen=True)
class CorrelationInequality:
    """Degree-2 correlator combination compared against a rational bound."""

    terms: tuple[Monomial, ...]
    direction: str
    bound: Fraction
    term_kinds: dict[frozenset[VariableId], str]
    provenance: SosExpression | None = None

    def __post_init__(self):
        for mono in self.terms:
            if len(mono.variables) != 2:
                raise ResidualDegreeError(f"inequality term {mono} is not degree 2")

    def variables(self):
        out = set()
        for mono in self.terms:
            out |= mono.variables
        return frozenset(out)

    def coefficient(self, varset):
        target = frozenset(varset)
        for mono in self.terms:
            if mono.variables == target:
                return mono.coefficient
        return 0

    def as_poly(self) -> MultilinearPoly:
        return MultilinearPoly({m.variables: m.coefficient for m in self.terms})

    def evaluate_correlators(self, correlators) -> float:
        """Value of the combination given pairwise expectation values."""
        total = 0.0
        for mono in self.terms:
            total += mono.coefficient * correlators[mono.variables]
        return total

    def satisfied_by(self, value, tolerance=0.0) -> bool:
        if self.direction == "<=":
            return value <= float(self.bound) + tolerance
        return value >= float(self.bound) - tolerance


def format_inequality(ineq: CorrelationInequality) -> str:
    """Human text like 'X1Y1 + X1Y2 + X2Y1 - X2Y2 <= 2'."""
    bits = []
    for i, mono in enumerate(ineq.terms):
        mag = abs(mono.coefficient)
        name = format_varset(mono.variables)
        body = name if mag == 1 else f"{mag}*{name}"
        if i == 0:
            bits.append(f"-{body}" if mono.coefficient < 0 else body)
        else:
            bits.append(f"{'-' if mono.coefficient < 0 else '+'} {body}")
    bound = ineq.bound
    btxt = str(bound.numerator) if bound.denominator == 1 else str(bound)
    return f"{' '.join(bits)} {ineq.direction} {btxt}"


def expand(expr: SosExpression) -> MultilinearPoly:
    """Sum of squared groups plus offset, reduced with v*v = 1."""
    total = MultilinearPoly.constant(expr.constant_offset)
    for group in expr.groups:
        form = MultilinearPoly.from_linear_form(group)
        total = total + form * form
    return total


def validate_odd_groups(expr: SosExpression) -> list[GroupVerdict]:
    """Per-group parity report.

    A form whose coefficients sum to an odd number takes odd integer
    values on ±1 inputs, so its square is at least 1.  Even sums allow
    the square to vanish, which weakens the guaranteed bound.
    """
    out = []
    for group in expr.groups:
        s = group.coefficient_sum()
        odd = s % 2 != 0
        out.append(GroupVerdict(len(group.terms), s, "odd" if odd else "even", 1 if odd else 0))
    return out


def implied_lower_bound(expr: SosExpression) -> int:
    """Guaranteed minimum of the expression value from the parity argument."""
    return sum(v.implied_bound for v in validate_odd_groups(expr)) + expr.constant_offset


def inequality_from_poly(poly, comparator, bound, provenance=None) -> CorrelationInequality:
    """Normalize `poly cmp bound` into a correlator inequality.

    The polynomial must contain only a constant and degree-2 terms with
    even coefficients (what squaring produces).  Both sides are divided
    by 2 and the sign is fixed so the first term is positive.
    """
    residual = [d for d in poly.degrees() if d not in (0, 2)]
    if residual:
        raise ResidualDegreeError(f"expansion left terms of degree {residual}")
    constant = poly.constant_term()
    terms = []
    for mono in poly.monomials():
        if not mono.variables:
            continue
        if mono.coefficient % 2 != 0:
            raise ResidualDegreeError(f"odd degree-2 coefficient {mono.coefficient} cannot be halved exactly")
        terms.append(Monomial(mono.variables, mono.coefficient // 2))
    if not terms:
        raise ResidualDegreeError("no degree-2 terms survive the expansion")
    new_bound = Fraction(bound - constant, 2)
    direction = comparator
    if terms[0].coefficient < 0:
        terms = [Monomial(m.variables, -m.coefficient) for m in terms]
        new_bound = -new_bound
        direction = "<=" if direction == ">=" else ">="
    kinds = {}
    for mono in terms:
        a, b = sorted(mono.variables, key=VariableId.sort_key)
        kinds[mono.variables] = SAME_PARTY if a.letter == b.letter else CROSS_PARTY
    return CorrelationInequality(tuple(terms), direction, new_bound, kinds, provenance)


def derive_inequality(expr: SosExpression) -> CorrelationInequality:
    """Turn a sum-of-squares statement into a correlation inequality.

    For a >= source the stated bound is tightened to the parity-implied
    minimum when that is larger; stating `... + 5 >= 0` therefore still
    yields the sharp bound.  Warns (EvenGroupWarning) when a group has an
    even coefficient sum, since the parity argument then contributes 0.
    """
    verdicts = validate_odd_groups(expr)
    even = [i for i, v in enumerate(verdicts) if v.parity == "even"]
    if even:
        warnings.warn(
            f"group(s) {even} have even coefficient sums; their squares may vanish",
            EvenGroupWarning,
            stacklevel=2,
        )
    if expr.comparator == ">=":
        effective = max(expr.bound, implied_lower_bound(expr))
    else:
        effective = expr.bound
    return inequality_from_poly(expand(expr), expr.comparator, effective, provenance=expr)


def classify(ineq: CorrelationInequality, scenario: ScenarioSpec) -> str:
    """Sort an inequality by the compatibility type of its terms.

    Cross-party pairs commute by separation (spatial); same-party pairs
    in a declared context commute by assumption (contextual); same-party
    pairs with no shared context need sequential measurement (temporal).
    A mix of types is hybrid.
    """
    declared = set(scenario.variables)
    kinds = set()
    for mono in ineq.terms:
        a, b = sorted(mono.variables, key=VariableId.sort_key)
        if a not in declared or b not in declared:
            missing = a if a not in declared else b
            raise UnmappedVariable(f"{missing} is not declared in the scenario")
        if not scenario.same_party(a, b):
            kinds.add(SPATIAL)
        elif scenario.in_common_context(a, b):
            kinds.add(CONTEXTUAL)
        else:
            kinds.add(TEMPORAL)
    if len(kinds) == 1:
        return kinds.pop()
    return HYBRID
