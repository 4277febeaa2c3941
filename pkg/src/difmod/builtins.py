"""Named example systems, usable from the command line with ``--builtin``."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .field import DiffField, ParameterSpec
from .geometry import (
    DifferentialForm,
    conformal_killing_operator,
    einstein_operator,
    euclidean,
    killing_operator,
    medolaghi,
    minkowski,
)
from .weyl import OperatorMatrix, ScalarOperator

__all__ = ["Builtin", "BUILTINS", "get_builtin", "pendulum_state_form", "maxwell_operators"]


@dataclass
class Builtin:
    name: str
    operator: OperatorMatrix
    description: str = ""
    candidate: OperatorMatrix | None = None
    prolong: int = 0
    kalman: tuple | None = None
    extra: dict = dc_field(default_factory=dict)


def _ops(K):
    d = lambda *i: ScalarOperator.d(K, *i)
    zero = ScalarOperator.scalar(K, 0)
    one = ScalarOperator.scalar(K, 1)
    return d, zero, one


def ex37() -> Builtin:
    K = DiffField(["x1", "x2"])
    d, _, one = _ops(K)
    D = OperatorMatrix.from_entries(K, [[d(2, 2)], [d(1, 2) - one]], ["y"], ["u", "v"])
    return Builtin("ex37", D, "d22 y = u, d12 y - y = v")


def ex310() -> Builtin:
    K = DiffField(["x1", "x2"])
    d, _, _ = _ops(K)
    D = OperatorMatrix.from_entries(K, [[d(1, 2)], [d(2, 2)]], ["xi"], ["eta1", "eta2"])
    return Builtin("ex310", D, "xi -> (d12 xi, d22 xi)")


def cauchy2() -> Builtin:
    K = DiffField(["x1", "x2"])
    d, z, _ = _ops(K)
    D = OperatorMatrix.from_entries(K, [[d(1), d(2), z], [z, d(1), d(2)]], ["s11", "s12", "s22"], ["f1", "f2"])
    airy = OperatorMatrix.from_entries(K, [[d(2, 2)], [-d(1, 2)], [d(1, 1)]], ["phi"], ["s11", "s12", "s22"])
    return Builtin("cauchy2", D, "stress equations, n = 2, symmetric stress", candidate=airy)


def killing2() -> Builtin:
    K = DiffField(["x1", "x2"])
    return Builtin("killing2", killing_operator(euclidean(K)), "Killing operator, euclidean plane", prolong=1)


def killing4() -> Builtin:
    K = DiffField(["x1", "x2", "x3", "t"])
    return Builtin("killing4", killing_operator(minkowski(K)), "Killing operator, Minkowski space-time", prolong=1)


def conformal4() -> Builtin:
    K = DiffField(["x1", "x2", "x3", "t"])
    return Builtin("conformal4", conformal_killing_operator(minkowski(K)), "conformal Killing operator, Minkowski", prolong=2)


def einstein4() -> Builtin:
    K = DiffField(["x1", "x2", "x3", "t"])
    return Builtin("einstein4", einstein_operator(minkowski(K)), "linearized Einstein operator, Minkowski")


def contact() -> Builtin:
    K = DiffField(["x1", "x2", "x3"])
    x3 = K.x[2]
    d, _, one = _ops(K)
    D = medolaghi("contact", K, [1, -x3, 0])
    # generating function theta = xi1 - x3 xi2 for the 1-form dx1 - x3 dx2
    cand = OperatorMatrix.from_entries(
        K, [[one - x3 * d(3)], [-d(3)], [d(2) + x3 * d(1)]], ["theta"], list(D.col_names)
    )
    literal = OperatorMatrix.from_entries(
        K, [[one - x3 * d(3)], [-d(3)], [d(2) - x3 * d(1)]], ["theta"], list(D.col_names)
    )
    return Builtin("contact", D, "contact structure dx1 - x3 dx2 (Medolaghi system)", candidate=cand,
                   extra={"literal_candidate": literal})


def unimodular_data(K, variant: int = 0):
    x1, x3 = K.x[0], K.x[2]
    if variant == 0:
        return DifferentialForm.one_form(K, [1, -x3, 0]), DifferentialForm(K, 2, {(1, 2): 1})
    if variant == 1:
        return DifferentialForm.one_form(K, [1, 0, 0]), DifferentialForm(K, 2, {(1, 2): 1})
    if variant == 2:
        return DifferentialForm.one_form(K, [1 / x1, 0, 0]), DifferentialForm(K, 2, {(1, 2): x1})
    raise ValueError("unimodular variants are 0, 1, 2")


def unimodular() -> Builtin:
    K = DiffField(["x1", "x2", "x3"])
    return Builtin("unimodular", medolaghi("unimodular", K, unimodular_data(K, 0)), "1-form and 2-form pair")


def pendulum() -> Builtin:
    K = DiffField(["t"], consts=["l1", "l2", "g"])
    l1, l2, g = (K.symbol(s) for s in ("l1", "l2", "g"))
    dd = ScalarOperator.d(K, 1, 1)
    z = ScalarOperator.scalar(K, 0)
    D = OperatorMatrix.from_entries(
        K, [[dd, l1 * dd + g, z], [dd, z, l2 * dd + g]], ["x", "th1", "th2"], ["e1", "e2"]
    )
    return Builtin("pendulum", D, "double pendulum on a cart, symbolic lengths and gravity")


def riccati() -> Builtin:
    K = DiffField(["t"], params=[ParameterSpec("a", order=8)])
    a = K.jet("a")
    d = lambda k: ScalarOperator.d(K, *([1] * k))
    D = OperatorMatrix.from_entries(K, [[d(2) - a, -d(2) - d(1)]], ["y2", "y3"], ["e"])
    return Builtin("riccati", D, "y2'' - y3'' - y3' - a(t) y2 = 0")


def ode_torsion() -> Builtin:
    K = DiffField(["t"])
    D = OperatorMatrix.from_entries(K, [[ScalarOperator.d(K, 1)]], ["z"], ["e"])
    return Builtin("ode-torsion", D, "z' = 0")


def grad() -> Builtin:
    K = DiffField(["x1", "x2"])
    d, _, _ = _ops(K)
    return Builtin("grad", OperatorMatrix.from_entries(K, [[d(1)], [d(2)]], ["f"]), "gradient")


def pendulum_state_form(l1=1, l2=2, g=1):
    """(A, B) for states (x, x', th1, th1', th2, th2') and input u = x''."""
    l1, l2, g = Fraction(l1), Fraction(l2), Fraction(g)
    A = [[Fraction(0)] * 6 for _ in range(6)]
    A[0][1] = A[2][3] = A[4][5] = Fraction(1)
    A[3][2] = -g / l1
    A[5][4] = -g / l2
    B = [[Fraction(0)] for _ in range(6)]
    B[1][0] = Fraction(1)
    B[3][0] = -1 / l1
    B[5][0] = -1 / l2
    return A, B


def _kalman(name, l1, l2) -> Builtin:
    from .duality import control_operator

    A, B = pendulum_state_form(l1, l2, 1)
    D = control_operator(A, B)
    return Builtin(name, D, f"double pendulum state form, l1 = {l1}, l2 = {l2}, g = 1", kalman=(A, B))


def maxwell_operators(K=None):
    """(dF on 2-forms, d on 1-forms) in dimension 4."""
    K = K or DiffField(["x1", "x2", "x3", "x4"])
    n = K.n
    pairs = list(itertools.combinations(range(n), 2))
    rows = []
    for I in itertools.combinations(range(n), 3):
        row = {}
        for pos, i in enumerate(I):
            rest = I[:pos] + I[pos + 1 :]
            mu = [0] * n
            mu[i] = 1
            row[(pairs.index(rest), tuple(mu))] = K.convert((-1) ** pos)
        rows.append(row)
    F = [f"F{i + 1}{j + 1}" for i, j in pairs]
    dF = OperatorMatrix(K, rows, len(pairs), F, [f"B{''.join(str(i + 1) for i in I)}" for I in itertools.combinations(range(n), 3)])
    rows = []
    for i, j in pairs:
        mi = [0] * n
        mi[i] = 1
        mj = [0] * n
        mj[j] = 1
        rows.append({(j, tuple(mi)): K.one, (i, tuple(mj)): -K.one})
    dA = OperatorMatrix(K, rows, n, [f"A{i + 1}" for i in range(n)], F)
    return dF, dA


def maxwell() -> Builtin:
    dF, dA = maxwell_operators()
    return Builtin("maxwell", dF, "dF = 0 for 2-forms in dimension 4", candidate=dA)


BUILTINS = {
    "ex37": ex37,
    "ex310": ex310,
    "cauchy2": cauchy2,
    "killing2": killing2,
    "killing4": killing4,
    "conformal4": conformal4,
    "einstein4": einstein4,
    "contact": contact,
    "unimodular": unimodular,
    "pendulum": pendulum,
    "riccati": riccati,
    "ode-torsion": ode_torsion,
    "grad": grad,
    "maxwell": maxwell,
    "kalman-demo": lambda: _kalman("kalman-demo", 1, 2),
    "kalman-equal": lambda: _kalman("kalman-equal", 1, 1),
}


def get_builtin(name: str) -> Builtin:
    try:
        return BUILTINS[name]()
    except KeyError:
        raise KeyError(f"unknown builtin {name!r}; choose from {', '.join(sorted(BUILTINS))}") from None
