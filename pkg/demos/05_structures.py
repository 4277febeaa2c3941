"""Medolaghi systems, structure constants and curvature."""

from difmod import DiffField
from difmod.builtins import unimodular_data
from difmod.geometry import (
    DifferentialForm,
    Metric,
    constant_curvature_check,
    exterior_d,
    jacobi_check,
    medolaghi,
    vessiot_constants,
    wedge,
)
from difmod.involutive import compatibility_conditions
from difmod.jetspencer import JetSystem, involutivity_classes

K = DiffField(["x1", "x2", "x3"])
x1, x2, x3 = K.x

# contact form dx1 - x3 dx2
alpha = DifferentialForm.one_form(K, [1, -x3, 0])
print("d alpha =", exterior_d(alpha))
print("alpha ^ d alpha =", wedge(alpha, exterior_d(alpha)))

C = medolaghi("contact", K, [1, -x3, 0])
print(C)
rep = involutivity_classes(JetSystem.from_operator(C))
print("classes:", rep.beta, "involutive:", rep.involutive)
print("CC:", compatibility_conditions(C).nrows)
print("c =", vessiot_constants("contact", K, [1, -x3, 0]).constants["c"])
print("c =", vessiot_constants("contact", K, [1, 0, 0]).constants["c"])

# 1-form and 2-form pair
for v in range(3):
    rec = vessiot_constants("unimodular", K, unimodular_data(K, v))
    c1, c2 = (str(c) for c in rec.values())
    print(f"variant {v}: (c', c'') = ({c1}, {c2}), Jacobi: {jacobi_check(rec)}")

# affine structure on the line
L = DiffField(["x"])
x = L.x[0]
print("c(alpha=1) =", vessiot_constants("affine", L, (1, 0)).constants["c"])
print("c(alpha=1/x) =", vessiot_constants("affine", L, (1 / x, 0)).constants["c"])

# the round sphere in stereographic coordinates has constant curvature 1
P = DiffField(["x1", "x2"])
u, w = P.x
lam = 4 / (1 + u * u + w * w) ** 2
print("sphere: c =", constant_curvature_check(Metric(P, [[lam, 0], [0, lam]])).constants["c"])
