import itertools

import pytest
import sympy as sp
from hypothesis import HealthCheck, given, settings, strategies as st

from difmod.field import DiffField
from difmod.geometry import (
    DifferentialForm,
    Metric,
    VectorField,
    bracket,
    christoffel,
    conformal_killing_operator,
    constant_curvature_check,
    einstein_operator,
    einstein_pairing,
    einstein_term,
    euclidean,
    exterior_d,
    interior,
    jacobi_check,
    killing_operator,
    lie_derivative_form,
    medolaghi,
    minkowski,
    riemann,
    sym_pairs,
    vessiot_constants,
    wedge,
)
from difmod.involutive import compatibility_conditions, row_module_equal
from difmod.jetspencer import solution_dimension
from difmod.weyl import OperatorMatrix, ScalarOperator, mi_all, op_apply

K2 = DiffField(["x1", "x2"])
K3 = DiffField(["x1", "x2", "x3"])
K4 = DiffField(["x1", "x2", "x3", "t"])
K1 = DiffField(["x"])


def to_sympy(a):
    return sp.sympify(str(a).replace("^", "**"))


def dform(K, deg, **kw):
    return DifferentialForm(K, deg, {tuple(int(c) - 1 for c in k[1:]): v for k, v in kw.items()})


# -- exterior calculus --------------------------------------------------------------
def test_d_of_contact_form():
    x3 = K3.x[2]
    a = DifferentialForm.one_form(K3, [1, -x3, 0])
    assert exterior_d(a) == dform(K3, 2, i23=1)
    assert wedge(a, exterior_d(a)) == dform(K3, 3, i123=1)


def test_d_simple_and_top_degree():
    x1 = K2.x[0]
    assert exterior_d(DifferentialForm.one_form(K2, [0, x1])) == dform(K2, 2, i12=1)
    assert exterior_d(dform(K2, 2, i12=x1 * x1)).is_zero()


def test_interior_and_graded_commutativity():
    e1 = VectorField(K2, [1, 0])
    assert interior(e1, dform(K2, 2, i12=1)) == dform(K2, 1, i2=1)
    a = DifferentialForm.one_form(K3, [K3.x[1], 1, 0])
    b = DifferentialForm.one_form(K3, [0, K3.x[0], 2])
    assert wedge(a, b) == -wedge(b, a)
    c = dform(K3, 2, i12=K3.x[2])
    assert wedge(a, c) == wedge(c, a)


def test_bracket_examples():
    d1, d2 = VectorField(K2, [1, 0]), VectorField(K2, [0, 1])
    assert bracket(d1, d2) == VectorField(K2, [0, 0])
    x1d2 = VectorField(K2, [0, K2.x[0]])
    assert bracket(x1d2, d1) == VectorField(K2, [0, -1])


def _polys(K):
    monos = [m for dg in range(3) for m in mi_all(K.n, dg)]

    def build(cs):
        out = K.zero
        for c, mu in zip(cs, monos):
            t = K.convert(c)
            for i, e in enumerate(mu):
                t = t * K.x[i] ** e
            out = out + t
        return out

    return st.lists(st.integers(-2, 2), min_size=len(monos), max_size=len(monos)).map(build)


def _vf(K):
    return st.lists(_polys(K), min_size=K.n, max_size=K.n).map(lambda cs: VectorField(K, cs))


def _form(K, deg):
    idx = list(itertools.combinations(range(K.n), deg))
    return st.lists(_polys(K), min_size=len(idx), max_size=len(idx)).map(lambda cs: DifferentialForm(K, deg, dict(zip(idx, cs))))


@settings(max_examples=30, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(_vf(K3), _vf(K3), st.integers(0, 3).flatmap(lambda p: _form(K3, p)))
def test_lie_derivative_commutator(X, Y, w):
    lhs = lie_derivative_form(X, lie_derivative_form(Y, w)) - lie_derivative_form(Y, lie_derivative_form(X, w))
    assert lhs == lie_derivative_form(bracket(X, Y), w)


# -- metrics --------------------------------------------------------------------------------
def test_metric_validation():
    with pytest.raises(ValueError):
        Metric(K2, [[1, 1], [1, 1]])
    with pytest.raises(ValueError):
        Metric(K2, [[1, K2.x[0]], [0, 1]])
    with pytest.raises(ValueError):
        Metric(K2, [[1]])


def test_killing_shapes_and_rotation():
    D = killing_operator(euclidean(K2))
    assert D.shape == (3, 2) and D.order == 1
    x1, x2 = K2.x
    assert all(not v for v in op_apply(D, [-x2, x1]))
    assert all(not v for v in op_apply(D, [0, 0]))
    assert killing_operator(minkowski(K4)).shape == (10, 4)


@pytest.mark.parametrize("seed", range(4))
def test_killing_matches_sympy_lie_derivative(seed):
    import random

    rng = random.Random(seed)
    x1, x2 = K2.x
    lam = 1 + x1 * x1
    g = [[lam, x2], [x2, 2 + x2 * x2]]
    w = Metric(K2, g)
    xi = [sum((rng.randint(-2, 2) * x1 ** a * x2 ** b for a in range(3) for b in range(3 - a)), K2.zero) for _ in range(2)]
    ours = op_apply(killing_operator(w), xi)
    X = sp.symbols("x1 x2")
    G = sp.Matrix(2, 2, lambda i, j: to_sympy(w.g[i][j]))
    V = [to_sympy(c) for c in xi]
    for (i, j), val in zip(sym_pairs(2), ours):
        L = sum(V[r] * sp.diff(G[i, j], X[r]) + G[r, j] * sp.diff(V[r], X[i]) + G[i, r] * sp.diff(V[r], X[j]) for r in range(2))
        assert sp.simplify(L - to_sympy(val)) == 0


def test_conformal_killing():
    D = conformal_killing_operator(euclidean(K2))
    x1, x2 = K2.x
    assert all(not v for v in op_apply(D, [x1, x2]))
    assert all(not v for v in op_apply(D, [-x2, x1]))
    assert solution_dimension(conformal_killing_operator(minkowski(K4))) == 15


def test_conformal_output_is_trace_free():
    w = minkowski(K4)
    D = conformal_killing_operator(w)
    pairs = sym_pairs(4)
    trace = {}
    for (i, j), r in zip(pairs, D.rows):
        if i == j:
            for t, a in r.items():
                trace[t] = trace.get(t, K4.zero) + w.inv[i][i] * a
    assert all(not v for v in trace.values())


# -- curvature --------------------------------------------------------------------------------
def test_flat_christoffel_and_curvature():
    for w in (euclidean(K3), minkowski(K4)):
        assert all(not v for v in christoffel(w).values())
        rec = constant_curvature_check(w)
        assert rec.constant and rec.constants["c"] == 0


def _sphere():
    x1, x2 = K2.x
    lam = 4 / (1 + x1 * x1 + x2 * x2) ** 2
    return Metric(K2, [[lam, 0], [0, lam]])


def test_sphere_christoffel_against_sympy():
    w = _sphere()
    G = christoffel(w)
    X = sp.symbols("x1 x2")
    g = sp.Matrix(2, 2, lambda i, j: to_sympy(w.g[i][j]))
    gi = g.inv()
    for k, i, j in itertools.product(range(2), repeat=3):
        want = sum(gi[k, r] * (sp.diff(g[r, j], X[i]) + sp.diff(g[r, i], X[j]) - sp.diff(g[i, j], X[r])) for r in range(2)) / 2
        assert sp.simplify(want - to_sympy(G[(k, i, j)])) == 0
        assert G[(k, i, j)] == G[(k, j, i)]


def test_sphere_constant_curvature_one():
    w = _sphere()
    rho = riemann(christoffel(w), K2)
    rec = constant_curvature_check(w, rho)
    assert rec.constant and rec.constants["c"] == 1


def test_non_constant_curvature_reports_obstruction():
    x1 = K2.x[0]
    w = Metric(K2, [[1 + x1 * x1, 0], [0, 1]])
    rec = constant_curvature_check(w)
    # a metric depending on x1 only in the x1 direction is flat
    assert rec.constant and rec.constants["c"] == 0
    w = Metric(K2, [[1, 0], [0, 1 + x1 * x1]])
    rec = constant_curvature_check(w)
    assert not rec.constant and rec.obstruction


def test_riemann_metric_compatibility_identity():
    x1, x2 = K3.x[:2]
    w = Metric(K3, [[1 + x2 * x2, 0, 0], [0, 1 + x1 * x1, 0], [0, 0, 1]])
    rho = riemann(christoffel(w), K3)
    n = 3
    for k, l, i, j in itertools.product(range(n), repeat=4):
        s = sum((w.g[r][l] * rho[(r, k, i, j)] + w.g[k][r] * rho[(r, l, i, j)] for r in range(n)), K3.zero)
        assert not s


# -- Einstein ---------------------------------------------------------------------------------
def test_einstein_shape_and_self_adjoint():
    w = minkowski(K4)
    E = einstein_operator(w)
    P = einstein_pairing(w)
    assert E.shape == (10, 10) and E.order == 2
    assert E.adjoint().compose(P) == P.compose(E)


def test_einstein_kills_constant_perturbations():
    E = einstein_operator(minkowski(K4))
    assert all(not v for v in op_apply(E, [k + 1 for k in range(10)]))


def test_einstein_term_pairing_first_and_sixth():
    w = minkowski(K4)
    P = einstein_pairing(w)
    T1, T6 = einstein_term(w, 1), einstein_term(w, 6)
    assert T1.adjoint().compose(P) == P.compose(T6)
    assert T6.adjoint().compose(P) == P.compose(T1)


def test_einstein_rejects_curved_background():
    x1 = K4.x[0]
    w = Metric(K4, [[1 + x1 * x1 if i == j == 0 else (1 if i == j else 0) for j in range(4)] for i in range(4)])
    with pytest.raises(ValueError):
        einstein_operator(w)


def test_killing_compatibility_counts():
    assert compatibility_conditions(killing_operator(euclidean(K2))).nrows == 1


# -- Medolaghi systems -------------------------------------------------------------------------
def _d(K, *i):
    return ScalarOperator.d(K, *i)


def test_medolaghi_contact_display():
    x3 = K3.x[2]
    D = medolaghi("contact", K3, [1, -x3, 0])
    s = lambda a: ScalarOperator.scalar(K3, a)
    d = lambda *i: _d(K3, *i)
    shown = OperatorMatrix.from_entries(K3, [
        [-d(1), d(2) + 2 * x3 * d(1), d(3)],
        [d(3), -x3 * d(3), s(0)],
        [d(2) + x3 * d(1), -x3 * d(2) - x3 * x3 * d(1), s(-1)],
    ], ["xi1", "xi2", "xi3"])
    assert row_module_equal(D, shown)


def test_medolaghi_contact_flat_display():
    D = medolaghi("contact", K3, [1, 0, 0])
    d = lambda *i: _d(K3, *i)
    z = ScalarOperator.scalar(K3, 0)
    shown = OperatorMatrix.from_entries(K3, [[-d(1), d(2), d(3)], [d(3), z, z], [d(2), z, z]], ["xi1", "xi2", "xi3"])
    assert row_module_equal(D, shown)


def test_medolaghi_unimodular_display():
    x3 = K3.x[2]
    a = DifferentialForm.one_form(K3, [1, -x3, 0])
    D = medolaghi("unimodular", K3, (a, exterior_d(a)))
    d = lambda *i: _d(K3, *i)
    s = lambda v: ScalarOperator.scalar(K3, v)
    z = s(0)
    shown = OperatorMatrix.from_entries(K3, [
        [d(1), z, z], [z, d(1), z], [z, z, d(1)],
        [d(2), z, x3 * d(3) - 1], [z, d(2), d(3)], [d(3), -x3 * d(3), z],
    ], ["xi1", "xi2", "xi3"])
    assert row_module_equal(D, shown)


def test_medolaghi_principal_identity_frame():
    D = medolaghi("principal", K2, [[1, 0], [0, 1]])
    rows = [{(k, tuple(1 if a == i else 0 for a in range(2))): K2.one} for k in range(2) for i in range(2)]
    assert sorted(map(str, D.rows)) == sorted(map(str, rows))


def test_medolaghi_errors():
    with pytest.raises(ValueError):
        medolaghi("principal", K2, [[1, 1], [1, 1]])
    with pytest.raises(ValueError):
        medolaghi("unimodular", K3, (DifferentialForm.one_form(K3, [0, 1, 0]), dform(K3, 2, i12=1)))
    with pytest.raises(ValueError):
        medolaghi("affine", K2, (1, 0))
    with pytest.raises(ValueError):
        medolaghi("nope", K2, None)


# -- structure constants -----------------------------------------------------------------------
def test_vessiot_contact_constants():
    x3 = K3.x[2]
    assert vessiot_constants("contact", K3, [1, -x3, 0]).constants["c"] == 1
    assert vessiot_constants("contact", K3, [1, 0, 0]).constants["c"] == 0
    rec = vessiot_constants("contact", K3, [1, -x3 * x3, 0])
    assert not rec.constant


def test_vessiot_affine_constants():
    x = K1.x[0]
    assert vessiot_constants("affine", K1, (1, 0)).constants["c"] == 0
    assert vessiot_constants("affine", K1, (1 / x, 0)).constants["c"] == -1
    assert not vessiot_constants("affine", K1, (1 + x * x, 0)).constant


def test_vessiot_unimodular_variants():
    from difmod.builtins import unimodular_data

    got = []
    for v in range(3):
        rec = vessiot_constants("unimodular", K3, unimodular_data(K3, v))
        assert rec.constant and jacobi_check(rec)
        got.append(rec.values())
    assert got == [(1, 0), (0, 0), (0, 1)]


def test_jacobi_fails_for_both_constants_nonzero():
    from difmod.geometry import StructureConstantsRecord

    assert not jacobi_check(StructureConstantsRecord("unimodular", {"c1": 1, "c2": 1}))


def test_principal_constants_abelian_and_nonabelian():
    rec = vessiot_constants("principal", K2, [[1, 0], [0, 1]])
    assert rec.constant and all(v == 0 for v in rec.constants.values()) and jacobi_check(rec, 2)
    # left-invariant frame of the affine group: dx1/x1, dx2/x1 with d(omega^2) = -omega^1 ^ omega^2
    x1 = K2.x[0]
    rec = vessiot_constants("principal", K2, [[1 / x1, 0], [0, 1 / x1]])
    assert rec.constant and jacobi_check(rec, 2)
    assert {k: v for k, v in rec.constants.items() if v} == {(1, 0, 1): -1}
