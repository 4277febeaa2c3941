"""Controllability as torsion-freeness; Kalman's test as a special case."""

from fractions import Fraction

from difmod.builtins import get_builtin, pendulum_state_form
from difmod.duality import adjoint_injectivity_test, kalman_test, specialize

# double pendulum on a cart with symbolic lengths l1, l2 and gravity g
D = get_builtin("pendulum").operator
print(D)
r = adjoint_injectivity_test(D)
print("ad(D) injective generically:", r.injective, "obstruction:", r.obstruction)

# equal lengths lose controllability
print("l1 = l2 = 1:", adjoint_injectivity_test(specialize(D, {"l1": 1, "l2": 1})).injective)

# a time-varying coefficient a(t); the obstruction is a Riccati expression in a
R = get_builtin("riccati").operator
print("Riccati obstruction:", adjoint_injectivity_test(R).obstruction)
for a in (0, 1, 2):
    print(f"  a = {a}:", adjoint_injectivity_test(specialize(R, {"a": a})).injective)

# state-space form: rank test and duality test agree
for l2 in (2, 1):
    A, B = pendulum_state_form(1, l2, 1)
    k = kalman_test(A, B)
    print(f"l2 = {l2}: rank {k.rank}/{k.m}, rank test {k.rank_controllable}, duality {k.duality_controllable}")

A = [[Fraction(0), Fraction(1)], [Fraction(-1), Fraction(0)]]
print("oscillator, force input:", kalman_test(A, [[0], [1]]).rank_controllable)
print("oscillator, no input:   ", kalman_test(A, [[0], [0]]).rank_controllable)
