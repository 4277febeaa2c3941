"""Geometric operators and structures.

Exterior calculus on forms with field coefficients, vector fields and
brackets, Killing / conformal Killing / linearized Einstein operators,
Christoffel symbols and curvature, the Medolaghi systems of a few classical
structures and their Vessiot structure constants.

Symmetric tensors (metrics, their perturbations) are packed over index
pairs ``i <= j`` in lexicographic order; see :func:`sym_pairs`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from typing import Mapping, Sequence

from .weyl import OperatorMatrix, ScalarOperator, mi_unit, mi_zero

__all__ = [
    "Metric",
    "DifferentialForm",
    "VectorField",
    "StructureConstantsRecord",
    "sym_pairs",
    "exterior_d",
    "wedge",
    "interior",
    "lie_derivative_form",
    "bracket",
    "killing_operator",
    "conformal_killing_operator",
    "christoffel",
    "riemann",
    "constant_curvature_check",
    "einstein_operator",
    "einstein_pairing",
    "einstein_term",
    "medolaghi",
    "vessiot_constants",
    "jacobi_check",
    "euclidean",
    "minkowski",
]


def sym_pairs(n: int) -> list[tuple[int, int]]:
    """Packed basis of symmetric 2-tensors: (i, j) with i <= j."""
    return [(i, j) for i in range(n) for j in range(i, n)]


def _solve_inverse(K, A):
    """Inverse of a square matrix of field elements (Gauss-Jordan)."""
    n = len(A)
    M = [[K.convert(x) for x in row] + [K.one if i == j else K.zero for j in range(n)] for i, row in enumerate(A)]
    for c in range(n):
        p = next((r for r in range(c, n) if M[r][c]), None)
        if p is None:
            raise ValueError("singular matrix")
        M[c], M[p] = M[p], M[c]
        inv = K.one / M[c][c]
        M[c] = [x * inv for x in M[c]]
        for r in range(n):
            if r != c and M[r][c]:
                f = M[r][c]
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    return [row[n:] for row in M]


def _det(K, A):
    n = len(A)
    M = [[K.convert(x) for x in row] for row in A]
    det = K.one
    for c in range(n):
        p = next((r for r in range(c, n) if M[r][c]), None)
        if p is None:
            return K.zero
        if p != c:
            M[c], M[p] = M[p], M[c]
            det = -det
        det = det * M[c][c]
        inv = K.one / M[c][c]
        for r in range(c + 1, n):
            if M[r][c]:
                f = M[r][c] * inv
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    return det


class Metric:
    """Symmetric nondegenerate matrix of field elements."""

    def __init__(self, field, g: Sequence[Sequence]):
        self.field = field
        self.n = field.n
        self.g = [[field.convert(x) for x in row] for row in g]
        if len(self.g) != self.n or any(len(r) != self.n for r in self.g):
            raise ValueError("metric has the wrong size")
        for i in range(self.n):
            for j in range(i):
                if self.g[i][j] != self.g[j][i]:
                    raise ValueError("metric is not symmetric")
        self.det = _det(field, self.g)
        if not self.det:
            raise ValueError("singular metric")
        self.inv = _solve_inverse(field, self.g)

    def is_constant(self) -> bool:
        K = self.field
        return all(not K.derive(x, i) for row in self.g for x in row for i in range(self.n))

    def is_diagonal(self) -> bool:
        return all(not self.g[i][j] for i in range(self.n) for j in range(self.n) if i != j)


def euclidean(field) -> Metric:
    n = field.n
    return Metric(field, [[1 if i == j else 0 for j in range(n)] for i in range(n)])


def minkowski(field) -> Metric:
    """Signature (+,...,+,-) with the last variable as time."""
    n = field.n
    return Metric(field, [[(-1 if i == n - 1 else 1) if i == j else 0 for j in range(n)] for i in range(n)])


# -- exterior calculus -------------------------------------------------------
def _sort_sign(idx: Sequence[int]):
    """(sign, sorted tuple) of a permutation of distinct indices; None if repeated."""
    idx = list(idx)
    if len(set(idx)) != len(idx):
        return None
    sign = 1
    for i in range(len(idx)):
        for j in range(len(idx) - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sign = -sign
    return sign, tuple(idx)


class DifferentialForm:
    """Form of degree r; coefficients over strictly increasing index tuples."""

    def __init__(self, field, degree: int, coeffs: Mapping | None = None):
        self.field = field
        self.degree = degree
        self.coeffs: dict = {}
        for I, a in (coeffs or {}).items():
            I = tuple(I)
            if len(I) != degree:
                raise ValueError("index length does not match the degree")
            s = _sort_sign(I)
            if s is None:
                continue
            sign, J = s
            a = field.convert(a)
            v = self.coeffs.get(J, field.zero) + (a if sign > 0 else -a)
            if v:
                self.coeffs[J] = v
            else:
                self.coeffs.pop(J, None)

    @classmethod
    def one_form(cls, field, comps: Sequence) -> "DifferentialForm":
        return cls(field, 1, {(i,): c for i, c in enumerate(comps)})

    def __getitem__(self, I):
        return self.coeffs.get(tuple(I), self.field.zero)

    def __add__(self, other):
        if other.degree != self.degree:
            raise ValueError("degree mismatch")
        out = dict(self.coeffs)
        for I, a in other.coeffs.items():
            out[I] = out.get(I, self.field.zero) + a
        return DifferentialForm(self.field, self.degree, out)

    def __neg__(self):
        return DifferentialForm(self.field, self.degree, {I: -a for I, a in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "DifferentialForm":
        c = self.field.convert(c)
        return DifferentialForm(self.field, self.degree, {I: c * a for I, a in self.coeffs.items()})

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other):
        if not isinstance(other, DifferentialForm):
            return NotImplemented
        return self.degree == other.degree and self.coeffs == other.coeffs

    def __repr__(self):
        parts = [f"({a})*dx{'^dx'.join(str(i + 1) for i in I)}" if I else f"{a}" for I, a in sorted(self.coeffs.items())]
        return f"DifferentialForm[{self.degree}](" + " + ".join(parts) + ")"


def exterior_d(w: DifferentialForm) -> DifferentialForm:
    K = w.field
    n = K.n
    if w.degree >= n:
        return DifferentialForm(K, w.degree + 1)
    acc: dict = {}
    for I, a in w.coeffs.items():
        for i in range(n):
            if i in I:
                continue
            da = K.derive(a, i)
            if not da:
                continue
            sign, J = _sort_sign((i,) + I)
            acc[J] = acc.get(J, K.zero) + (da if sign > 0 else -da)
    return DifferentialForm(K, w.degree + 1, acc)


def wedge(a: DifferentialForm, b: DifferentialForm) -> DifferentialForm:
    K = a.field
    acc: dict = {}
    for I, x in a.coeffs.items():
        for J, y in b.coeffs.items():
            s = _sort_sign(I + J)
            if s is None:
                continue
            sign, L = s
            v = x * y
            acc[L] = acc.get(L, K.zero) + (v if sign > 0 else -v)
    return DifferentialForm(K, a.degree + b.degree, acc)


class VectorField:
    def __init__(self, field, comps: Sequence):
        self.field = field
        if len(comps) != field.n:
            raise ValueError("vector field has the wrong number of components")
        self.comps = [field.convert(c) for c in comps]

    def __getitem__(self, i):
        return self.comps[i]

    def __eq__(self, other):
        return isinstance(other, VectorField) and self.comps == other.comps

    def __add__(self, other):
        return VectorField(self.field, [a + b for a, b in zip(self.comps, other.comps)])

    def __repr__(self):
        return f"VectorField({', '.join(str(c) for c in self.comps)})"


def interior(xi: VectorField, w: DifferentialForm) -> DifferentialForm:
    """``(i(xi) w)_{I} = xi^i w_{i I}``."""
    K = w.field
    if w.degree == 0:
        return DifferentialForm(K, 0)
    acc: dict = {}
    for I, a in w.coeffs.items():
        for pos, i in enumerate(I):
            rest = I[:pos] + I[pos + 1 :]
            v = xi[i] * a
            if pos % 2:
                v = -v
            acc[rest] = acc.get(rest, K.zero) + v
    return DifferentialForm(K, w.degree - 1, acc)


def lie_derivative_form(xi: VectorField, w: DifferentialForm) -> DifferentialForm:
    """Cartan formula ``L(xi) = i(xi) d + d i(xi)``."""
    out = interior(xi, exterior_d(w))
    if w.degree > 0:
        out = out + exterior_d(interior(xi, w))
    return out


def bracket(xi: VectorField, eta: VectorField) -> VectorField:
    K = xi.field
    n = K.n
    comps = []
    for i in range(n):
        v = K.zero
        for r in range(n):
            v = v + xi[r] * K.derive(eta[i], r) - eta[r] * K.derive(xi[i], r)
        comps.append(v)
    return VectorField(K, comps)


# -- Killing type operators -------------------------------------------------
def _killing_rows(w: Metric) -> list[dict]:
    K = w.field
    n = w.n
    z = mi_zero(n)
    rows = []
    for i, j in sym_pairs(n):
        r: dict = {}

        def add(t, v):
            if not v:
                return
            nv = r.get(t, K.zero) + v
            if nv:
                r[t] = nv
            else:
                r.pop(t, None)

        for k in range(n):
            add((k, mi_unit(n, i)), w.g[k][j])
            add((k, mi_unit(n, j)), w.g[i][k])
            add((k, z), K.derive(w.g[i][j], k))
        rows.append(r)
    return rows


def killing_operator(w: Metric, names: Sequence[str] | None = None) -> OperatorMatrix:
    """``Omega_ij = w_rj d_i xi^r + w_ir d_j xi^r + xi^r d_r w_ij`` for i <= j."""
    n = w.n
    cols = list(names) if names else [f"xi{k + 1}" for k in range(n)]
    rn = [f"O{i + 1}{j + 1}" for i, j in sym_pairs(n)]
    return OperatorMatrix(w.field, _killing_rows(w), n, cols, rn)


def conformal_killing_operator(w: Metric, names: Sequence[str] | None = None) -> OperatorMatrix:
    """Trace-free part ``Omega_ij - (1/n) w_ij w^{rs} Omega_rs`` of the Killing operator."""
    K = w.field
    n = w.n
    base = _killing_rows(w)
    pairs = sym_pairs(n)
    trace: dict = {}
    for (r, s), row in zip(pairs, base):
        c = w.inv[r][s] if r == s else w.inv[r][s] * 2
        if not c:
            continue
        for t, v in row.items():
            trace[t] = trace.get(t, K.zero) + c * v
    rows = []
    inv_n = K.one / n
    for (i, j), row in zip(pairs, base):
        r = dict(row)
        f = w.g[i][j] * inv_n
        if f:
            for t, v in trace.items():
                nv = r.get(t, K.zero) - f * v
                if nv:
                    r[t] = nv
                else:
                    r.pop(t, None)
        rows.append(r)
    cols = list(names) if names else [f"xi{k + 1}" for k in range(n)]
    rn = [f"C{i + 1}{j + 1}" for i, j in pairs]
    return OperatorMatrix(K, rows, n, cols, rn)


def christoffel(w: Metric) -> dict:
    """``gamma[(k, i, j)]`` with the Levi-Civita formula."""
    K = w.field
    n = w.n
    dg = [[[K.derive(w.g[a][b], c) for c in range(n)] for b in range(n)] for a in range(n)]
    half = K.one / 2
    out = {}
    for k in range(n):
        for i in range(n):
            for j in range(n):
                v = K.zero
                for r in range(n):
                    if w.inv[k][r]:
                        v = v + w.inv[k][r] * (dg[r][j][i] + dg[r][i][j] - dg[i][j][r])
                out[(k, i, j)] = v * half
    return out


def riemann(gamma: Mapping, field) -> dict:
    """``rho[(k, l, i, j)] = d_i g^k_lj - d_j g^k_li + g^r_lj g^k_ri - g^r_li g^k_rj``."""
    K = field
    n = K.n
    out = {}
    for k, l, i, j in itertools.product(range(n), repeat=4):
        v = K.derive(gamma[(k, l, j)], i) - K.derive(gamma[(k, l, i)], j)
        for r in range(n):
            v = v + gamma[(r, l, j)] * gamma[(k, r, i)] - gamma[(r, l, i)] * gamma[(k, r, j)]
        out[(k, l, i, j)] = v
    return out


@dataclass
class StructureConstantsRecord:
    kind: str
    constants: dict = dc_field(default_factory=dict)
    constant: bool = True
    obstruction: list = dc_field(default_factory=list)

    def values(self):
        return tuple(self.constants[k] for k in sorted(self.constants))


def _is_const(K, a) -> bool:
    return all(not K.derive(a, i) for i in range(K.n))


def constant_curvature_check(w: Metric, rho: Mapping | None = None) -> StructureConstantsRecord:
    """Eisenhart condition ``rho^k_lij = c (delta^k_i w_lj - delta^k_j w_li)``."""
    K = w.field
    n = w.n
    if rho is None:
        rho = riemann(christoffel(w), K)
    if n < 2:
        return StructureConstantsRecord("riemann", {"c": K.zero})
    c = rho[(0, 1, 0, 1)] / w.g[1][1]
    bad = []
    for k, l, i, j in itertools.product(range(n), repeat=4):
        model = c * ((w.g[l][j] if k == i else K.zero) - (w.g[l][i] if k == j else K.zero))
        diff = rho[(k, l, i, j)] - model
        if diff:
            bad.append(((k, l, i, j), diff))
    if bad:
        return StructureConstantsRecord("riemann", {}, False, bad)
    if not _is_const(K, c):
        return StructureConstantsRecord("riemann", {}, False, [("c", c)])
    return StructureConstantsRecord("riemann", {"c": c})


# -- Einstein ----------------------------------------------------------------
def einstein_operator(w: Metric) -> OperatorMatrix:
    """Linearized Einstein operator on a constant background metric.

    ``w^rs (d_ij O_rs + d_rs O_ij - d_ri O_sj - d_sj O_ri)
    - w_ij (w^rs w^uv d_rs O_uv - w^ru w^sv d_rs O_uv)`` for i <= j.
    """
    if not w.is_constant():
        raise ValueError("the linearized Einstein operator needs a constant background metric")
    E = einstein_term(w, 1)
    rows = [dict(r) for r in E.rows]
    K = w.field
    for t in range(2, 7):
        for r, extra in zip(rows, einstein_term(w, t).rows):
            for key, v in extra.items():
                nv = r.get(key, K.zero) + v
                if nv:
                    r[key] = nv
                else:
                    r.pop(key, None)
    names = [f"E{a + 1}{b + 1}" for a, b in sym_pairs(w.n)]
    return OperatorMatrix(K, rows, E.ncols, E.col_names, names)


def einstein_pairing(w: Metric) -> OperatorMatrix:
    """Packed pairing ``lambda^{ij} E_ij`` with indices raised by the metric.

    Diagonal entry for the pair (i, j) is ``weight * w^ii w^jj`` with weight 2
    off the diagonal; requires a diagonal metric.
    """
    K = w.field
    if not w.is_diagonal():
        raise ValueError("pairing is implemented for diagonal metrics only")
    pairs = sym_pairs(w.n)
    z = mi_zero(w.n)
    rows = []
    for c, (i, j) in enumerate(pairs):
        wt = 1 if i == j else 2
        rows.append({(c, z): w.inv[i][i] * w.inv[j][j] * wt})
    names = [f"O{a + 1}{b + 1}" for a, b in pairs]
    return OperatorMatrix(K, rows, len(pairs), names, names)


def einstein_term(w: Metric, which: int) -> OperatorMatrix:
    """One of the six terms of the Einstein operator (1-based), for the
    adjoint pairing witness."""
    K = w.field
    n = w.n
    pairs = sym_pairs(n)
    col = {}
    for c, (a, b) in enumerate(pairs):
        col[(a, b)] = col[(b, a)] = c
    g, gi = w.g, w.inv
    rows = []
    for i, j in pairs:
        r: dict = {}

        def add(a, b, u, v, coef):
            if not coef:
                return
            mu = [0] * n
            mu[a] += 1
            mu[b] += 1
            t = (col[(u, v)], tuple(mu))
            nv = r.get(t, K.zero) + coef
            if nv:
                r[t] = nv
            else:
                r.pop(t, None)

        for rr in range(n):
            for s in range(n):
                c = gi[rr][s]
                if which == 1:
                    add(i, j, rr, s, c)
                elif which == 2:
                    add(rr, s, i, j, c)
                elif which == 3:
                    add(rr, i, s, j, -c)
                elif which == 4:
                    add(s, j, rr, i, -c)
        if which in (5, 6) and g[i][j]:
            for rr, s, u, v in itertools.product(range(n), repeat=4):
                c = gi[rr][s] * gi[u][v] if which == 5 else -gi[rr][u] * gi[s][v]
                add(rr, s, u, v, -g[i][j] * c)
        rows.append(r)
    return OperatorMatrix(K, rows, len(pairs), [f"O{a + 1}{b + 1}" for a, b in pairs])


# -- Medolaghi systems ---------------------------------------------------------
def _lie_form_rows(K, coeffs_of_form, degree, n):
    """Rows of ``L(xi) w`` as an operator on xi, for a form given by coefficients."""
    z = mi_zero(n)
    rows = []
    for I in itertools.combinations(range(n), degree):
        r: dict = {}

        def add(t, v):
            if not v:
                return
            nv = r.get(t, K.zero) + v
            if nv:
                r[t] = nv
            else:
                r.pop(t, None)

        # xi^r d_r w_I
        for k in range(n):
            add((k, z), K.derive(coeffs_of_form.get(I, K.zero), k))
        # sum over positions: w_{i1..r..ip} d_{i_pos} xi^r
        for pos, ipos in enumerate(I):
            for k in range(n):
                J = I[:pos] + (k,) + I[pos + 1 :]
                s = _sort_sign(J)
                if s is None:
                    continue
                sign, Js = s
                a = coeffs_of_form.get(Js)
                if a:
                    add((k, mi_unit(n, ipos)), a if sign > 0 else -a)
        rows.append(r)
    return rows


def medolaghi(kind: str, field, data) -> OperatorMatrix:
    """Medolaghi (linearized Lie) equations of a structure.

    kinds: ``affine`` (data ``(alpha, gamma)``, n = 1), ``principal``
    (``n`` one-forms as rows of components), ``riemann`` (a :class:`Metric`),
    ``contact`` (components of a 1-form density, n = 3), ``unimodular``
    (``(alpha, beta)`` as :class:`DifferentialForm` of degrees 1 and 2).
    """
    K = field
    n = K.n
    z = mi_zero(n)
    xi = [f"xi{k + 1}" for k in range(n)]
    if kind == "affine":
        if n != 1:
            raise ValueError("affine structure lives in dimension 1")
        alpha, gamma = (K.convert(x) for x in data)
        if not alpha:
            raise ValueError("alpha must be nonzero")
        r1 = {(0, (1,)): alpha, (0, (0,)): K.derive(alpha, 0)}
        r2 = {(0, (2,)): K.one, (0, (1,)): gamma, (0, (0,)): K.derive(gamma, 0)}
        return OperatorMatrix(K, [r1, r2], 1, xi, ["La", "Lg"])
    if kind == "principal":
        forms = [[K.convert(x) for x in row] for row in data]
        if not _det(K, forms):
            raise ValueError("the 1-forms are not independent")
        rows = []
        names = []
        for t, wt in enumerate(forms):
            for i in range(n):
                r = {}
                for k in range(n):
                    if wt[k]:
                        r[(k, mi_unit(n, i))] = wt[k]
                    dv = K.derive(wt[i], k)
                    if dv:
                        r[(k, z)] = r.get((k, z), K.zero) + dv
                rows.append({t_: v for t_, v in r.items() if v})
                names.append(f"O{t + 1}_{i + 1}")
        return OperatorMatrix(K, rows, n, xi, names)
    if kind == "riemann":
        return killing_operator(data)
    if kind == "contact":
        if n != 3:
            raise ValueError("contact structures are implemented for n = 3")
        w = [K.convert(x) for x in data]
        if not any(w):
            raise ValueError("degenerate 1-form density")
        half = K.one / 2
        rows = []
        for i in range(n):
            r: dict = {}
            for k in range(n):
                if w[k]:
                    r[(k, mi_unit(n, i))] = r.get((k, mi_unit(n, i)), K.zero) + w[k]
                if w[i]:
                    r[(k, mi_unit(n, k))] = r.get((k, mi_unit(n, k)), K.zero) - half * w[i]
                dv = K.derive(w[i], k)
                if dv:
                    r[(k, z)] = r.get((k, z), K.zero) + dv
            rows.append({t: v for t, v in r.items() if v})
        return OperatorMatrix(K, rows, n, xi, [f"O{i + 1}" for i in range(n)])
    if kind == "unimodular":
        alpha, beta = data
        if wedge(alpha, beta).is_zero():
            raise ValueError("alpha ^ beta vanishes")
        rows = _lie_form_rows(K, alpha.coeffs, 1, n) + _lie_form_rows(K, beta.coeffs, 2, n)
        names = [f"A{i + 1}" for i in range(n)] + [f"B{i + 1}{j + 1}" for i, j in itertools.combinations(range(n), 2)]
        return OperatorMatrix(K, rows, n, xi, names)
    raise ValueError(f"unknown structure kind {kind!r}")


# -- Vessiot structure constants ---------------------------------------------
def _record(kind, K, named: dict) -> StructureConstantsRecord:
    bad = [(nm, v) for nm, v in named.items() if not _is_const(K, v)]
    if bad:
        return StructureConstantsRecord(kind, {}, False, bad)
    return StructureConstantsRecord(kind, dict(named))


def _proportional(K, a: DifferentialForm, b: DifferentialForm):
    """c with a = c b (field element), or None."""
    if b.is_zero():
        raise ValueError("cannot compare with a zero form")
    I = next(iter(sorted(b.coeffs)))
    c = a[I] / b[I]
    if a != b.scale(c):
        return None
    return c


def vessiot_constants(kind: str, field, data) -> StructureConstantsRecord:
    """Evaluate the defining expressions of the structure constants."""
    K = field
    n = K.n
    if kind == "affine":
        alpha, gamma = (K.convert(x) for x in data)
        if not alpha:
            raise ValueError("alpha must be nonzero")
        c = (K.derive(alpha, 0) - gamma * alpha) / (alpha * alpha)
        return _record(kind, K, {"c": c})
    if kind == "principal":
        forms = [[K.convert(x) for x in row] for row in data]
        if not _det(K, forms):
            raise ValueError("the 1-forms are not independent")
        # alpha[i][a]: inverse matrix, sum_i forms[rho][i] alpha[i][a] = delta
        alpha = _solve_inverse(K, forms)
        consts = {}
        for t in range(n):
            curl = [[K.derive(forms[t][j], i) - K.derive(forms[t][i], j) for j in range(n)] for i in range(n)]
            for a, b in itertools.combinations(range(n), 2):
                v = K.zero
                for i in range(n):
                    for j in range(n):
                        if curl[i][j]:
                            v = v + alpha[i][a] * alpha[j][b] * curl[i][j]
                consts[(t, a, b)] = v
        return _record(kind, K, consts)
    if kind == "riemann":
        return constant_curvature_check(data)
    if kind == "contact":
        if n != 3:
            raise ValueError("contact structures are implemented for n = 3")
        w = [K.convert(x) for x in data]
        d = K.derive
        c = w[0] * (d(w[2], 1) - d(w[1], 2)) + w[1] * (d(w[0], 2) - d(w[2], 0)) + w[2] * (d(w[1], 0) - d(w[0], 1))
        return _record(kind, K, {"c": c})
    if kind == "unimodular":
        alpha, beta = data
        ab = wedge(alpha, beta)
        if ab.is_zero():
            raise ValueError("alpha ^ beta vanishes")
        c1 = _proportional(K, exterior_d(alpha), beta)
        c2 = _proportional(K, exterior_d(beta), ab)
        if c1 is None or c2 is None:
            return StructureConstantsRecord(kind, {}, False, [("proportionality", None)])
        return _record(kind, K, {"c1": c1, "c2": c2})
    raise ValueError(f"unknown structure kind {kind!r}")


def jacobi_check(rec: StructureConstantsRecord, n: int | None = None) -> bool:
    """Quadratic conditions on the constants (principal and unimodular kinds)."""
    if not rec.constant:
        return False
    if rec.kind == "unimodular":
        return not (rec.constants["c1"] * rec.constants["c2"])
    if rec.kind == "principal":
        if n is None:
            n = 1 + max(max(a, b) for (_, a, b) in rec.constants)

        def c(t, a, b):
            if a == b:
                return 0
            if a < b:
                return rec.constants.get((t, a, b), 0)
            return -rec.constants.get((t, b, a), 0)

        for lam, rho, sig, tau in itertools.product(range(n), repeat=4):
            s = 0
            for mu in range(n):
                s = s + c(lam, mu, rho) * c(mu, sig, tau) + c(lam, mu, sig) * c(mu, tau, rho) + c(lam, mu, tau) * c(mu, rho, sig)
            if s:
                return False
        return True
    return True
