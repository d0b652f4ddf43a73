"""
How far qubits push past the classical bounds
=============================================

Every inequality in the catalog caps an algebraic combination of
correlators at its classical value.  Qubit measurements break those
caps: entangled pairs for the cross-party combinations, repeated
measurement of one qubit for the sequential ones.  This script
evaluates the exact quantum values, confirms them with a numerical
optimizer, cross-checks against an operator norm, and maps how the
attainable maximum varies with the two free measurement angles.
"""

import numpy as np

from corrineq import catalog
from corrineq.dsl import VariableId
from corrineq.optimize import (
    SettingsParametrization,
    maximize_violation,
    scan_envelope,
)
from corrineq.polynomials import derive_inequality
from corrineq.quantum import (
    auto_assignment,
    build_f_operator,
    evaluate_inequality_quantum,
    hybrid_f_product,
    hybrid_settings,
    ladder_settings,
    maximally_mixed,
    operator_norm,
    plane_vector,
    product_ladder_settings,
    product_state,
    qubit_state,
    singlet_state,
)

SQRT8 = 2.0 * np.sqrt(2.0)
X1, X2 = VariableId("X", 1), VariableId("X", 2)
Y1, Y2 = VariableId("Y", 1), VariableId("Y", 2)

##############################################################################
# The four-term cross-party combination on a singlet.  The singlet
# correlator for directions a, b is -a.b, so the right settings place
# each product at +1/sqrt(2) and the total at 2 sqrt(2) -- well past
# the classical cap of 2.

chsh = derive_inequality(catalog.chsh_source())
settings = {
    X1: plane_vector(0.0),
    X2: plane_vector(np.pi / 2),
    Y1: plane_vector(-3 * np.pi / 4),
    Y2: plane_vector(3 * np.pi / 4),
}
value = evaluate_inequality_quantum(chsh, singlet_state(), settings)
print(f"cross-party combination on the singlet: {value:.12f}")
print(f"classical bound {chsh.bound}, 2*sqrt(2) = {SQRT8:.12f}")

##############################################################################
# The four-time sequential combination.  Measuring one qubit at four
# times with directions descending in pi/4 steps gives the same
# 2 sqrt(2), and the sequential correlator a.b does not depend on the
# state at all -- a pure state and the maximally mixed state agree.

lg = derive_inequality(catalog.lg_source())
times = sorted(lg.variables())
ladder = ladder_settings(times, 0.0, -np.pi / 4)
rules = auto_assignment(lg, catalog.lg_scenario())
for label, rho in [("polarized qubit", qubit_state([0.0, 0.0, 1.0])),
                   ("maximally mixed", maximally_mixed(2))]:
    v = evaluate_inequality_quantum(lg, rho, ladder, assignment=rules)
    print(f"sequential combination, {label}: {v:.12f}")

##############################################################################
# The hybrid combination mixes both term kinds: two tensor products
# across the parties, two sequential products within a party.  On the
# singlet it also reaches 2 sqrt(2); a numerical search over coplanar
# settings recovers the same number without being told the answer.

hybrid = derive_inequality(catalog.hybrid_source())
hscn = catalog.hybrid_scenario()
hrules = auto_assignment(hybrid, hscn)
exact = evaluate_inequality_quantum(
    hybrid, singlet_state(), hybrid_settings(), assignment=hrules
)
print(f"\nhybrid combination at the canonical ladder: {exact:.12f}")

result = maximize_violation(hybrid, singlet_state(), scenario=hscn, seed=3)
print(f"optimizer best value: {result.value:.12f} (converged: {result.converged})")

##############################################################################
# Independent check: the whole hybrid combination is one Hermitian
# operator once the settings are fixed, and no state can beat that
# operator's norm.  At the optimizer's settings the norm matches the
# value it found, so the search stopped at a true maximum.

f_op, _, _ = build_f_operator(result.settings)
print(f"operator norm at the found settings: {operator_norm(f_op):.12f}")
print(f"gap to optimizer value: {abs(operator_norm(f_op) - result.value):.2e}")

##############################################################################
# Product states cannot reach 2 sqrt(2), but they are not classical
# either.  With an ascending ladder ordered X2, X1, Y2, Y1 and both
# qubits polarized along the Y2 direction, a closed form gives
# 3/sqrt(2) ~ 2.121; the matrix evaluation agrees to machine
# precision.  Letting the optimizer vary settings and state together
# does a little better still, topping out at 5/2.

psettings = product_ladder_settings()
n = psettings[Y2]
analytic = hybrid_f_product(n, n, psettings)
matrix = evaluate_inequality_quantum(
    hybrid, product_state(n, n), psettings, assignment=hrules
)
print(f"\nproduct-state ladder, closed form: {analytic:.12f}")
print(f"product-state ladder, matrix path: {matrix:.12f}")
print(f"3/sqrt(2) = {3 / np.sqrt(2):.12f}")

family = SettingsParametrization(tuple(sorted(hybrid.variables())), mode="product")
best = maximize_violation(
    hybrid, None, parametrization=family, scenario=hscn, grid_points=12, seed=5
)
print(f"best over all product states and settings: {best.value:.9f}")

##############################################################################
# Finally the envelope: fix every setting except the two within-party
# angles theta1, theta2 and record the largest value any two-qubit
# state can give.  A closed form covers the whole plane; scanning it
# shows the global maximum sits at 2 sqrt(2), reached near
# (pi/4, -pi/4) and its sign-flipped partner.

scan = scan_envelope(400)
t1, t2 = scan.argmax
print(f"\nenvelope maximum over a 400x400 grid: {scan.max_value:.9f}")
print(f"located at theta1 = {t1:+.6f}, theta2 = {t2:+.6f}")
print(f"shortfall from 2*sqrt(2): {SQRT8 - scan.max_value:.2e}")
