"""Compatibility conditions, formal adjoints and membership certificates."""

from difmod import DiffField, OperatorMatrix, ScalarOperator
from difmod.involutive import compatibility_conditions, complete, row_module_membership

K = DiffField(["x1", "x2"])
d = lambda *i: ScalarOperator.d(K, *i)
one = ScalarOperator.scalar(K, 1)

# y -> (P y, Q y) with P = d22 and Q = d12 - 1
P, Q = d(2, 2), d(1, 2) - one
D = OperatorMatrix.from_entries(K, [[P], [Q]], ["y"])
print(D)

# which (u, v) = (P y, Q y) are reachable?  one generating condition
C = compatibility_conditions(D)
print("CC:")
print(C)
print("CC o D == 0:", C.compose(D).is_zero())

# completion of the rows of D already contains y itself
B = complete(D)
print("Janet basis:")
print(B.matrix())
m = row_module_membership({(0, (0, 0)): K.one}, D)
print("y in the row module:", bool(m))
print("  y =", " + ".join(f"({a})*row{k + 1}" for k, a in enumerate(m.cofactors)))

# adjoints: ad(ad(P)) == P, and ad(PQ) == ad(Q) ad(P)
print("ad(P):", P.adjoint(), "| ad(Q):", Q.adjoint())
print("ad is an involution:", P.adjoint().adjoint() == P)
print("ad reverses products:", (P * Q).adjoint() == Q.adjoint() * P.adjoint())
