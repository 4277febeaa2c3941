"""Symbols, delta-cohomology and the Janet/Spencer dimension diagram."""

from difmod import DiffField
from difmod.geometry import conformal_killing_operator, euclidean, killing_operator
from difmod.jetspencer import (
    JetSystem,
    bundle_dims,
    delta_cohomology,
    first_spencer_operator,
    formal_integrability_test,
    prolong,
    symbol,
    symbol_family,
)


def flat(n):
    return euclidean(DiffField([f"x{i + 1}" for i in range(n)]))


# Killing equations of the plane: finite type, 3 parameters
R1 = JetSystem.from_operator(killing_operator(flat(2)))
print("g1, g2:", symbol(R1).dim, symbol(R1, 1).dim)
print(formal_integrability_test(R1, steps=2))

# add the second order jets and look at the bundle dimensions
R2 = prolong(R1, 1)
t = bundle_dims(R2)
print("C    =", t.C)
print("C(E) =", t.CE)
print("F    =", t.F)
print("columns exact:", t.columns_exact())

# the first Spencer operator on the 3 parametric jets; its adjoint gives Cosserat equilibrium
D1, params = first_spencer_operator(R2)
print(D1)
print(D1.adjoint())

# H^2 of the symbols: Riemann for Killing, Weyl for conformal Killing
for n in (2, 3, 4):
    fam = symbol_family(JetSystem.from_operator(killing_operator(flat(n))), 1)
    print(f"n={n} Riemann:", delta_cohomology(fam, [(2, 1)]).H(2, 1))
for n in (3, 4, 5):
    fam = symbol_family(JetSystem.from_operator(conformal_killing_operator(flat(n))), 1)
    print(f"n={n} Weyl:", delta_cohomology(fam, [(2, 1)]).H(2, 1))
