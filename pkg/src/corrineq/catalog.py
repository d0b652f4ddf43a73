"""Shipped expression and scenario fixtures plus cycle-family generators.

The data files under corrineq/data are the canonical statements of the
inequalities this package reproduces; everything here parses those files
or builds the odd n-cycle generalizations programmatically.
"""

from __future__ import annotations

from importlib import resources

from .dsl import LinearForm, ScenarioSpec, SosExpression, VariableId, parse_scenario, parse_sos


def _data_text(name: str) -> str:
    return resources.files("corrineq").joinpath("data").joinpath(name).read_text(encoding="utf-8")


def load_expression(name: str) -> SosExpression:
    """Parse one of the shipped .rsx files by file name."""
    return parse_sos(_data_text(name))


def load_scenario(name: str) -> ScenarioSpec:
    """Parse one of the shipped .scn files by file name."""
    return parse_scenario(_data_text(name))


def chsh_source() -> SosExpression:
    return load_expression("chsh.rsx")


def kcbs_source() -> SosExpression:
    return load_expression("kcbs.rsx")


def cycle7_source() -> SosExpression:
    return load_expression("cycle7.rsx")


def lg_source() -> SosExpression:
    return load_expression("lg.rsx")


def hybrid_source() -> SosExpression:
    return load_expression("hybrid.rsx")


def monogamy_source() -> SosExpression:
    return load_expression("monogamy.rsx")


def chsh_scenario() -> ScenarioSpec:
    return load_scenario("chsh.scn")


def kcbs_scenario() -> ScenarioSpec:
    return load_scenario("kcbs.scn")


def lg_scenario() -> ScenarioSpec:
    return load_scenario("lg.scn")


def hybrid_scenario() -> ScenarioSpec:
    return load_scenario("hybrid.scn")


def monogamy_scenario() -> ScenarioSpec:
    return load_scenario("monogamy.scn")


def _x(i: int) -> VariableId:
    return VariableId("X", i)


def cycle_source(n: int, offset_form: bool = False) -> SosExpression:
    """Sum-of-squares source whose expansion is the n-cycle X1X2+...+XnX1.

    Needs odd n >= 5.  Edge groups (X_{2k-1}+X_{2k}+X_{2k+1})^2 cover
    consecutive edges; correction groups (X1-X_{2k+1}+X_{2k+3})^2 cancel
    the skips and close the cycle, n-2 odd groups in total.  With
    offset_form the statement is written as `... + (n-2) >= 0`, whose
    sharp bound comes from the parity argument rather than the stated 0.
    """
    if n < 5 or n % 2 == 0:
        raise ValueError(f"cycle length must be odd and at least 5, got {n}")
    groups = []
    for k in range(1, (n - 1) // 2 + 1):
        groups.append(LinearForm(((1, _x(2 * k - 1)), (1, _x(2 * k)), (1, _x(2 * k + 1)))))
    for k in range(1, (n - 3) // 2 + 1):
        groups.append(LinearForm(((1, _x(1)), (-1, _x(2 * k + 1)), (1, _x(2 * k + 3)))))
    if offset_form:
        return SosExpression(tuple(groups), constant_offset=n - 2, comparator=">=", bound=0)
    return SosExpression(tuple(groups), comparator=">=", bound=n - 2)


def alternating_cycle_source(n: int) -> SosExpression:
    """Source for the chain X1X2+...+X_{n-1}Xn - XnX1 with bound n-2.

    Same construction as cycle_source with every even-index variable
    negated, which flips each edge term's sign except the closing one;
    canonicalization then yields the chain bounded above by n-2.
    """
    if n < 5 or n % 2 == 0:
        raise ValueError(f"cycle length must be odd and at least 5, got {n}")

    def signed(i):
        return (-1 if i % 2 == 0 else 1, _x(i))

    groups = []
    for k in range(1, (n - 1) // 2 + 1):
        groups.append(LinearForm((signed(2 * k - 1), signed(2 * k), signed(2 * k + 1))))
    for k in range(1, (n - 3) // 2 + 1):
        sign, var = signed(2 * k + 1)
        groups.append(LinearForm(((1, _x(1)), (-sign, var), signed(2 * k + 3))))
    return SosExpression(tuple(groups), comparator=">=", bound=n - 2)


def cycle_scenario(n: int) -> ScenarioSpec:
    """Odd n-cycle compatibility: neighbouring variables share a context."""
    if n < 3:
        raise ValueError(f"cycle length must be at least 3, got {n}")
    variables = tuple(_x(i) for i in range(1, n + 1))
    contexts = tuple(
        frozenset({_x(i), _x(i % n + 1)}) for i in range(1, n + 1)
    )
    return ScenarioSpec(variables, {v: "X" for v in variables}, contexts, ())
