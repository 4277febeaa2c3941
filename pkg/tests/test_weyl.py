import pytest

from difmod.duality import control_operator
from difmod.field import DiffField
from difmod.geometry import euclidean, killing_operator
from difmod.weyl import (
    JetSection,
    OperatorMatrix,
    ScalarOperator,
    green_divergence,
    mi_class,
    op_apply,
    term_key,
)

K = DiffField(["x1", "x2"])
x1, x2 = K.x


def d(*i):
    return ScalarOperator.d(K, *i)


one = ScalarOperator.scalar(K, 1)


def test_leibniz_commutation():
    assert d(1) * x1 == x1 * d(1) + one
    assert (d(1) * x1).order == 1


def test_unit_and_commuting_constants():
    P = x2 * d(1, 2) + d(2)
    assert P * one == P and one * P == P
    assert (d(1, 2) - one) * d(2, 2) - d(2, 2) * (d(1, 2) - one) == ScalarOperator(K, {})


def test_order_is_additive():
    P = x1 * d(1, 1) + d(2)
    Q = x2 * d(2) + x1
    assert (P * Q).order == P.order + Q.order
    assert ScalarOperator(K, {}).order == float("-inf")


def test_adjoint_examples():
    assert d(1).adjoint() == -d(1)
    assert (x1 * d(1, 1)).adjoint() == x1 * d(1, 1) + 2 * d(1)
    D = OperatorMatrix.from_entries(K, [[d(1, 2)], [d(2, 2)]], ["xi"])
    assert D.adjoint() == OperatorMatrix.from_entries(K, [[d(1, 2), d(2, 2)]])
    assert D.adjoint().shape == (1, 2)


def test_control_system_adjoint():
    # -y' + A y + B u  ->  adjoint rows  l' + l A  (for y)  and  l B  (for u)
    A = [[0, 1], [0, 0]]
    B = [[0], [1]]
    D = control_operator(A, B)
    Kt = D.field
    dt = ScalarOperator.d(Kt, 1)
    s = lambda a: ScalarOperator.scalar(Kt, a)
    expected = OperatorMatrix.from_entries(
        Kt,
        [[dt, s(0)], [s(1), dt], [s(0), s(1)]],
    )
    assert D.adjoint().rows == expected.rows


def test_apply():
    assert op_apply(OperatorMatrix.from_entries(K, [[d(2, 2)]]), [x2**2]) == [2]
    assert op_apply(OperatorMatrix.from_entries(K, [[d(1, 2) - one]]), [x1 * x2]) == [1 - x1 * x2]
    kill = killing_operator(euclidean(K))
    assert all(v == 0 for v in op_apply(kill, [-x2, x1]))
    assert any(v != 0 for v in op_apply(kill, [x2, x1]))


def test_apply_jet_section_order_check():
    D = OperatorMatrix.from_entries(K, [[d(1, 1)]])
    with pytest.raises(ValueError):
        op_apply(D, JetSection(K, 1, 1))
    xi = JetSection.holonomic(K, [x1**3], 2)
    assert op_apply(D, xi) == [6 * x1]


def test_green_examples():
    z = (0, 0)
    B = green_divergence(d(1))
    assert B[0] == {(z, z): K.one} and B[1] == {}
    B = green_divergence(ScalarOperator.scalar(K, x1))
    assert B == [{}, {}]
    B = green_divergence(d(1, 1))
    # B1 = l * d1 x - (d1 l) * x
    assert B[0] == {(z, (1, 0)): K.one, ((1, 0), z): -K.one} and B[1] == {}


def test_multi_index_helpers():
    assert mi_class((0, 2, 1)) == 1
    # degree first, then the unknown
    assert term_key(0, (1, 0)) > term_key(1, (0, 0))


def test_matrix_validation():
    with pytest.raises(ValueError):
        OperatorMatrix(K, [{(2, (0, 0)): 1}], 2)
    with pytest.raises(ValueError):
        OperatorMatrix.from_entries(K, [[d(1), d(2)], [d(1)]])
    A = OperatorMatrix.from_entries(K, [[d(1), d(2)]])
    with pytest.raises(ValueError):
        A.compose(A)


def test_matrix_adjoint_reverses_composition():
    A = OperatorMatrix.from_entries(K, [[x1 * d(1), d(2)], [one, x2 * d(1, 2)]])
    B = OperatorMatrix.from_entries(K, [[d(2) + x1], [x2 * d(1)]])
    lhs = A.compose(B).adjoint()
    rhs = B.adjoint().compose(A.adjoint())
    assert lhs.rows == rhs.rows


def test_printing():
    D = OperatorMatrix.from_entries(K, [[d(1, 2) - one, -d(2, 2)]], ["u", "v"])
    assert D.equations() == ["d[1,2](u) - d[2,2](v) - u"]
