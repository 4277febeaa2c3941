"""Torsion and parametrizations through the double duality test."""

from difmod.builtins import get_builtin
from difmod.duality import double_duality_test, verify_parametrization
from difmod.involutive import row_module_equal

# stress equilibrium in the plane: torsion-free, parametrized by the Airy function
cauchy = get_builtin("cauchy2")
v = double_duality_test(cauchy.operator)
print(v.verdict)
print(v.parametrization)
print("same module as the Airy matrix:", bool(row_module_equal(v.parametrization, cauchy.candidate)))

# the five intermediate operators are kept
for k, M in v.steps.items():
    print(f"step {k}: {M.nrows} x {M.ncols}")

# d12 xi = 0, d22 xi = 0 has torsion: z = d2 xi is killed by d1 and d2
w = double_duality_test(get_builtin("ex310").operator)
print(w.verdict)
for g in w.generators:
    print("  element", g.fmt(), "annihilators", g.annihilator_strs())

# a candidate parametrization can be checked directly, with a left inverse search
contact = get_builtin("contact")
r = verify_parametrization(contact.operator, contact.candidate)
print("contact candidate:", r.composes_to_zero, r.generates_cc)
print("left inverse:", r.left_inverse)

# gauge freedom: A -> dA parametrizes dF = 0 but has no left inverse
maxwell = get_builtin("maxwell")
r = verify_parametrization(maxwell.operator, maxwell.candidate, 1)
print("maxwell:", r.ok, "left inverse up to order", r.searched_order, "->", r.left_inverse)
