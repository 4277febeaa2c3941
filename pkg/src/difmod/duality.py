"""Torsion, parametrizations and controllability by double duality.

The module ``M`` presented by an operator matrix ``D`` is torsion-free iff
the operator ``D'`` of compatibility conditions of ``D_{-1} = ad(CC(ad D))``
generates the same row module as ``D``.  When it does not, the extra rows of
``D'`` give torsion elements.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field as dc_field
from typing import Mapping, Sequence

import flint

from .field import QQ
from .involutive import (
    CompletionError,
    Equality,
    Membership,
    complete,
    compatibility_conditions,
    row_module_equal,
    row_module_membership,
    syzygies,
    working_field,
)
from .linalg import rref_sparse
from .weyl import (
    OperatorMatrix,
    ScalarOperator,
    compose_row,
    format_row,
    mi_zero,
    prolong_row,
    term_key,
)

__all__ = [
    "DualityError",
    "TorsionElement",
    "ParamVerdict",
    "double_duality_test",
    "torsion_elements",
    "KalmanVerdict",
    "kalman_test",
    "InjectivityReport",
    "adjoint_injectivity_test",
    "specialize",
    "ParametrizationReport",
    "verify_parametrization",
    "left_inverse",
    "CosseratReport",
    "cosserat_parametrization_check",
]


class DualityError(RuntimeError):
    """Completion failed inside the double duality pipeline."""

    def __init__(self, step: int, cause: Exception):
        super().__init__(f"step {step}: {cause}")
        self.step = step
        self.cause = cause


def _row_order(row) -> int:
    return max((sum(mu) for _, mu in row), default=-1)


# -- torsion ------------------------------------------------------------------
@dataclass
class TorsionElement:
    representative: dict
    annihilators: list
    certificates: list = dc_field(default_factory=list)
    names: list | None = None
    field: object = None

    def verify(self, D: OperatorMatrix) -> bool:
        """Nonzero class, and every annihilator sends it into module(D)."""
        B = complete(D)
        if not B.normal_form(self.representative):
            return False
        K = D.field
        for a in self.annihilators:
            if not a:
                return False
            if B.normal_form(compose_row(K, a.terms, self.representative)):
                return False
        return True

    def fmt(self) -> str:
        return format_row(self.field, self.representative, self.names)

    def annihilator_strs(self, name: str = "z") -> list[str]:
        """Annihilators applied to the element, written as acting on ``name``."""
        return [a.fmt(name) for a in self.annihilators]


@dataclass
class ParamVerdict:
    torsion_free: bool
    parametrization: OperatorMatrix | None = None
    certified: Equality | None = None
    generators: list = dc_field(default_factory=list)
    steps: dict = dc_field(default_factory=dict)
    timing: dict = dc_field(default_factory=dict)

    @property
    def verdict(self) -> str:
        return "torsion_free" if self.torsion_free else "has_torsion"

    def __bool__(self):
        return self.torsion_free


def _cc(D: OperatorMatrix, cap=None) -> OperatorMatrix:
    if D.ncols == 0:
        # every relation among zero rows is a compatibility condition
        names = D.row_names or [f"v{i + 1}" for i in range(D.nrows)]
        return OperatorMatrix.identity(D.field, D.nrows, names)
    return compatibility_conditions(D, cap=cap)


def _annihilators(D: OperatorMatrix, z: dict, cap=None) -> list[ScalarOperator]:
    """Minimal generators of ``{a : a z in module(D)}``."""
    K = D.field
    S = OperatorMatrix(K, [z] + list(D.rows), D.ncols)
    firsts = []
    for syz in syzygies(S, cap=cap):
        t = {mu: a for (j, mu), a in syz.items() if j == 0}
        if t:
            firsts.append({(0, mu): a for mu, a in t.items()})
    if not firsts:
        return []
    A = OperatorMatrix(K, firsts, 1)
    B = complete(A)
    elems = sorted(B.matrix().rows, key=lambda r: (_row_order(r), [term_key(*t) for t in sorted(r, key=lambda t: term_key(*t), reverse=True)]))
    kept: list[dict] = []
    for r in elems:
        if not kept or complete(OperatorMatrix(K, kept, 1)).normal_form(r):
            kept.append(r)
    return [ScalarOperator(K, {mu: a for (_, mu), a in r.items()}) for r in kept]


def _symbol_gcd(K, ops: list[ScalarOperator]):
    """gcd of constant-coefficient operators as commutative polynomials, or None."""
    n = K.n
    ctx = flint.fmpq_mpoly_ctx.get([f"c{i}" for i in range(n)], "lex")
    g = None
    for a in ops:
        if not all(K.is_constant(c) for c in a.terms.values()):
            return None
        P = ctx.from_dict({mu: flint.fmpq(K.evaluate(c, {}) if not K.constant else c) for mu, c in a.terms.items()})
        g = P if g is None else g.gcd(P)
    if g is None or g.total_degree() < 1:
        return None
    return ScalarOperator(K, {tuple(e): K.convert(c) for e, c in zip(g.monoms(), g.coeffs())})


def _refine(D: OperatorMatrix, BD, z: dict, cap=None):
    """Replace ``z`` by ``g z`` while the annihilators share a common factor ``g``.

    Only for constant coefficients, where operators commute with each other.
    """
    K = D.field
    ann = _annihilators(D, z, cap)
    for _ in range(16):
        g = _symbol_gcd(K, ann) if ann else None
        if g is None:
            break
        gz = BD.normal_form(compose_row(K, g.terms, z))
        if not gz:
            break
        z, ann = gz, _annihilators(D, gz, cap)
    return z, ann


def _torsion_generators(D: OperatorMatrix, Dp: OperatorMatrix, cap=None) -> list[TorsionElement]:
    K = D.field
    BD = complete(D, cap=cap)
    cands = []
    for r in Dp.rows:
        nf = BD.normal_form(r)
        if nf:
            cands.append(nf)
    cands.sort(key=lambda r: (_row_order(r), len(r)))
    kept: list[dict] = []
    for r in cands:
        cur = complete(OperatorMatrix(K, list(D.rows) + kept, D.ncols), cap=cap)
        nf = cur.normal_form(r)
        if nf:
            kept.append(nf if _row_order(nf) <= _row_order(r) else r)
    out = []
    for z in kept:
        z, ann = _refine(D, BD, z, cap)
        certs = [row_module_membership(compose_row(K, a.terms, z), D, BD) for a in ann]
        out.append(TorsionElement(z, ann, certs, list(D.col_names), K))
    return out


def double_duality_test(D: OperatorMatrix, cap: int | None = None, generators: bool = True) -> ParamVerdict:
    """Five steps: D, ad(D), CC(ad D), D_{-1} = ad(CC(ad D)), D' = CC(D_{-1})."""
    steps = {1: D}
    timing = {}
    t0 = time.perf_counter()
    adD = D.adjoint()
    steps[2] = adD
    try:
        C = _cc(adD, cap)
    except CompletionError as e:
        raise DualityError(3, e) from e
    steps[3] = C
    timing[3] = time.perf_counter() - t0
    Dm1 = C.adjoint(col_names=[f"phi{i + 1}" for i in range(C.nrows)])
    Dm1 = OperatorMatrix(Dm1.field, Dm1.rows, Dm1.ncols, Dm1.col_names, list(D.col_names))
    steps[4] = Dm1
    try:
        Dp = _cc(Dm1, cap)
    except CompletionError as e:
        raise DualityError(5, e) from e
    Dp = OperatorMatrix(Dp.field, Dp.rows, D.ncols, D.col_names)
    steps[5] = Dp
    timing[5] = time.perf_counter() - t0
    try:
        eq = row_module_equal(Dp, D)
    except CompletionError as e:
        raise DualityError(5, e) from e
    timing["compare"] = time.perf_counter() - t0
    if eq:
        return ParamVerdict(True, Dm1, eq, [], steps, timing)
    gens = _torsion_generators(D, Dp, cap) if generators else []
    timing["generators"] = time.perf_counter() - t0
    return ParamVerdict(False, None, eq, gens, steps, timing)


def torsion_elements(D: OperatorMatrix, cap: int | None = None) -> list[TorsionElement]:
    return double_duality_test(D, cap).generators


# -- control systems --------------------------------------------------------------
@dataclass
class KalmanVerdict:
    rank_controllable: bool
    duality_controllable: bool
    rank: int
    m: int

    @property
    def agree(self) -> bool:
        return self.rank_controllable == self.duality_controllable

    def __bool__(self):
        return self.rank_controllable and self.duality_controllable


def _qmat(A) -> flint.fmpq_mat:
    if isinstance(A, flint.fmpq_mat):
        return A
    rows = [list(r) for r in A]
    M = flint.fmpq_mat(len(rows), len(rows[0]) if rows else 0)
    for i, r in enumerate(rows):
        for j, v in enumerate(r):
            M[i, j] = QQ(v)
    return M


def control_operator(A, B, field=None) -> OperatorMatrix:
    """Rows ``-y' + A y + B u`` over unknowns ``(y_1..y_m, u_1..u_p)``."""
    from .field import DiffField

    A, B = _qmat(A), _qmat(B)
    m, p = A.nrows(), B.ncols()
    K = field or DiffField(["t"])
    rows = []
    for i in range(m):
        r = {(i, (1,)): K.convert(-1)}
        for j in range(m):
            if A[i, j] != 0:
                r[(j, (0,))] = r.get((j, (0,)), K.zero) + K.convert(A[i, j])
        for j in range(p):
            if B[i, j] != 0:
                r[(m + j, (0,))] = K.convert(B[i, j])
        rows.append(r)
    names = [f"y{i + 1}" for i in range(m)] + [f"u{j + 1}" for j in range(p)]
    return OperatorMatrix(K, rows, m + p, names)


def kalman_test(A, B) -> KalmanVerdict:
    A, B = _qmat(A), _qmat(B)
    m = A.nrows()
    if A.ncols() != m or B.nrows() != m:
        raise ValueError("A must be m x m and B must be m x p")
    blocks = []
    P = B
    for _ in range(m):
        blocks.append(P)
        P = A * P
    p = B.ncols()
    C = flint.fmpq_mat(m, p * m)
    for b, blk in enumerate(blocks):
        for i in range(m):
            for j in range(p):
                C[i, b * p + j] = blk[i, j]
    rk = C.rank() if p else 0
    dual = double_duality_test(control_operator(A, B), generators=False).torsion_free
    return KalmanVerdict(rk == m, dual, rk, m)


# -- adjoint injectivity (one independent variable) ---------------------------
@dataclass
class InjectivityReport:
    injective: bool
    obstruction: object = None
    determinant: object = None
    assumed_nonzero: list = dc_field(default_factory=list)
    zero_order: list = dc_field(default_factory=list)

    @property
    def generic(self) -> bool:
        """Injective away from the zero set of the obstruction."""
        return self.injective

    def __bool__(self):
        return self.injective


def _poly_factors(K, a) -> set:
    """Irreducible nonconstant factors of numerator and denominator (as strings)."""
    out = set()
    if K.constant:
        return out
    a = K.convert(a)
    for poly in (a.num, a.den):
        _, facs = poly.factor()
        for f, _e in facs:
            out.add(str(f))
    return out


def _clear(K, row: dict) -> dict:
    """Multiply a zero-order row by the lcm of its denominators."""
    if K.constant:
        return dict(row)
    from .field import Scalar

    L = None
    for a in row.values():
        d = a.den
        L = d if L is None else (L * d / L.gcd(d))
    return {t: a * Scalar(L) for t, a in row.items()}


def _det(K, M: list[list]):
    n = len(M)
    M = [list(r) for r in M]
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


class _OdeSolver:
    """One pivot row per unknown (n = 1), plus collected zero-order rows."""

    def __init__(self, K, m):
        self.K = K
        self.m = m
        self.piv: dict[int, dict] = {}  # unknown -> monic row with pivot of order >= 1

    @staticmethod
    def lead(row):
        return max(row, key=lambda t: term_key(*t))

    def nf(self, row: dict) -> dict:
        K = self.K
        row = dict(row)
        while True:
            hit = None
            for t in sorted(row, key=lambda t: term_key(*t), reverse=True):
                k, (s,) = t
                if k in self.piv:
                    pk = self.lead(self.piv[k])[1][0]
                    if s >= pk:
                        hit = t
                        break
            if hit is None:
                return row
            k, (s,) = hit
            prow = self.piv[k]
            for _ in range(s - self.lead(prow)[1][0]):
                prow = prolong_row(K, prow, 0)
            c = row[hit] / prow[hit]
            for t, v in prow.items():
                nv = row.get(t, K.zero) - c * v
                if nv:
                    row[t] = nv
                else:
                    row.pop(t, None)


def specialize(D: OperatorMatrix, values: Mapping[str, object]) -> OperatorMatrix:
    """Substitute values for field symbols (parameters or their jets).

    A parameter given by its base name without values for its jets is
    treated as a constant: its jets are set to 0.
    """
    K = D.field
    values = dict(values)
    for prm in getattr(K, "params", ()):
        if prm.name in values:
            for k in range(1, prm.order + 1):
                values.setdefault(prm.jet_name(k), 0)
    rows = [{t: K.substitute(a, values) for t, a in r.items()} for r in D.rows]
    return OperatorMatrix(K, rows, D.ncols, D.col_names, D.row_names)


def adjoint_injectivity_test(D: OperatorMatrix, check_surjective: bool = True) -> InjectivityReport:
    """Is ``ad(D)`` injective?  Elimination in the adjoint system (n = 1).

    Zero-order consequences are differentiated and reduced by the solved
    higher-order equations until either ``p`` independent zero-order rows
    are found (injective, with obstruction the determinant of those rows)
    or nothing new appears (not injective).  Factors of the determinant that
    divide coefficients of the adjoint system are reported as assumed
    nonzero and removed from the obstruction.
    """
    K = D.field
    if K.n != 1:
        raise ValueError("the injectivity elimination needs one independent variable")
    if check_surjective and _cc(D).nrows:
        raise ValueError("D is not surjective: it has compatibility conditions")
    adD = D.adjoint()
    p = adD.ncols
    W = working_field(adD)
    rows = [{t: W.convert(a) for t, a in r.items()} for r in adD.rows]
    coeff_factors = set()
    for r in rows:
        for a in r.values():
            coeff_factors |= _poly_factors(W, a)
    solver = _OdeSolver(W, p)
    zero: list[dict] = []
    queue = list(rows)
    key = lambda t: term_key(*t)
    guard = 0
    while queue and len(zero) < p:
        guard += 1
        if guard > 10000:
            raise RuntimeError("elimination did not terminate")
        r = solver.nf(queue.pop(0))
        if not r:
            continue
        lt = solver.lead(r)
        if lt[1][0] == 0:
            if len(rref_sparse(W, zero + [r], key)) > len(zero):
                zero.append(_clear(W, r))
                queue.append(prolong_row(W, r, 0))
            continue
        inv = W.one / r[lt]
        r = {t: v * inv for t, v in r.items()}
        old = solver.piv.get(lt[0])
        solver.piv[lt[0]] = r
        if old is not None:
            queue.append(old)
    if len(zero) < p:
        return InjectivityReport(False, None, None, [], [{t: K.convert(a) for t, a in z.items()} for z in zero])
    M = [[z.get((k, (0,)), W.zero) for k in range(p)] for z in zero]
    det = _det(W, M)
    zo = [{t: K.convert(a) for t, a in z.items()} for z in zero]
    if W.constant:
        return InjectivityReport(bool(det), K.convert(det) if det else K.zero, K.convert(det), [], zo)
    _, facs = det.num.factor()
    kept = K.one
    assumed = []
    from .field import Scalar

    for f, _e in facs:
        if str(f) in coeff_factors:
            assumed.append(Scalar(f))
        else:
            kept = kept * Scalar(f)
    return InjectivityReport(True, kept, det, assumed, zo)


# -- parametrizations ---------------------------------------------------------------
def left_inverse(P: OperatorMatrix, cap: int = 2) -> OperatorMatrix | None:
    """Some ``L`` of order <= cap with ``L o P = Id``, or None."""
    from .weyl import _compose_terms, mi_all

    K = P.field
    W = working_field(P)
    n, m, r = K.n, P.nrows, P.ncols
    mus = [mu for s in range(cap + 1) for mu in mi_all(n, s)]
    # d_mu o P_{k,j} for every k, mu
    comp = {}
    for k in range(m):
        entries = {}
        for (j, nu), a in P.rows[k].items():
            entries.setdefault(j, {})[nu] = W.convert(a)
        for mu in mus:
            dmu = {mu: W.one}
            for j, e in entries.items():
                comp[(k, mu, j)] = _compose_terms(W, dmu, e)
    # unknown c[i,k,mu]; equation for output (i, j, nu)
    out = []
    for i in range(r):
        eqs: dict = {}
        for k in range(m):
            for mu in mus:
                var = (k, mu)
                for j in range(r):
                    for nu, a in comp.get((k, mu, j), {}).items():
                        eqs.setdefault((j, nu), {})[var] = a
        rhs_key = (j0 := i, mi_zero(n))
        aug = []
        for eq, row in eqs.items():
            rr = dict(row)
            if eq == rhs_key:
                rr["rhs"] = -W.one
            aug.append(rr)
        if rhs_key not in eqs:
            return None
        red = rref_sparse(W, aug, key=lambda c: (1,) if c != "rhs" else (0,))
        sol = {}
        for piv, row in red:
            if piv == "rhs":
                return None
            sol[piv] = -row.get("rhs", W.zero)
        out.append({(k, mu): K.convert(v) for (k, mu), v in sol.items() if v})
    return OperatorMatrix(K, out, m, P.row_names or [f"e{k + 1}" for k in range(m)], list(P.col_names))


@dataclass
class ParametrizationReport:
    composes_to_zero: bool
    generates_cc: bool
    left_inverse: OperatorMatrix | None = None
    searched_order: int | None = None

    @property
    def ok(self) -> bool:
        return self.composes_to_zero and self.generates_cc

    def __bool__(self):
        return self.ok


def verify_parametrization(D: OperatorMatrix, candidate: OperatorMatrix, inverse_order_cap: int | None = 2) -> ParametrizationReport:
    if D.ncols != candidate.nrows:
        raise ValueError("D o candidate is not defined")
    a = D.compose(candidate).is_zero()
    cc = _cc(candidate)
    cc = OperatorMatrix(cc.field, cc.rows, D.ncols, D.col_names)
    b = bool(row_module_equal(cc, D))
    L = None
    if inverse_order_cap is not None:
        L = left_inverse(candidate, inverse_order_cap)
        if L is not None:
            L = OperatorMatrix(L.field, L.rows, L.ncols, D.col_names, list(candidate.col_names))
    return ParametrizationReport(a, b, L, inverse_order_cap)


# -- Cosserat couple-stress parametrization --------------------------------------
@dataclass
class CosseratReport:
    from_spencer: bool
    identity: bool
    airy: bool
    zero: bool

    def __bool__(self):
        return self.from_spencer and self.identity and self.airy and self.zero


def cosserat_operators():
    """(Cosserat equations, first order parametrization, Airy specialization, Airy matrix).

    Unknowns ``(s11, s12, s21, s22, m1, m2)``; potentials ``(phi1, phi2, phi3)``.
    """
    from .field import DiffField

    K = DiffField(["x1", "x2"])
    d = lambda *i: ScalarOperator.d(K, *i)
    one = ScalarOperator.scalar(K, 1)
    zero = ScalarOperator.scalar(K, 0)
    cols = ["s11", "s12", "s21", "s22", "m1", "m2"]
    C = OperatorMatrix.from_entries(
        K,
        [
            [d(1), d(2), zero, zero, zero, zero],
            [zero, zero, d(1), d(2), zero, zero],
            [zero, one, -one, zero, d(1), d(2)],
        ],
        cols,
    )
    Phi = OperatorMatrix.from_entries(
        K,
        [
            [d(2), zero, zero],
            [-d(1), zero, zero],
            [zero, -d(2), zero],
            [zero, d(1), zero],
            [one, zero, d(2)],
            [zero, -one, -d(1)],
        ],
        ["phi1", "phi2", "phi3"],
    )
    S = OperatorMatrix.from_entries(K, [[d(2)], [d(1)], [-one]], ["phi"])
    airy = OperatorMatrix.from_entries(
        K,
        [[d(2, 2)], [-d(1, 2)], [-d(1, 2)], [d(1, 1)], [zero], [zero]],
        ["phi"],
    )
    return C, Phi, S, airy


def cosserat_parametrization_check(seed: int = 0) -> CosseratReport:
    """Cosserat equations from the first Spencer operator and their parametrization."""
    from .geometry import euclidean, killing_operator
    from .jetspencer import JetSystem, first_spencer_operator, prolong

    C, Phi, S, airy = cosserat_operators()
    K = C.field
    R = prolong(JetSystem.from_operator(killing_operator(euclidean(K))), 1)
    D1, param = first_spencer_operator(R)
    adj = D1.adjoint()
    # dual variables of D1 rows are (i, z): stress s^{k i} for k = 1, 2 and -m_i for the rotation
    n = K.n
    z = mi_zero(n)
    M = []
    for idx in range(D1.nrows):
        zi, i = divmod(idx, n)
        if zi < 2:
            target = 2 * zi + i
            M.append({(target, z): K.one})
        else:
            M.append({(4 + i, z): -K.one})
    change = OperatorMatrix(K, M, 6, C.col_names)
    via = adj.compose(change)
    from_spencer = bool(row_module_equal(via, C))
    identity = C.compose(Phi).is_zero()
    airy_ok = Phi.compose(S) == airy
    from .weyl import op_apply

    zero_vals = op_apply(Phi, [K.zero, K.zero, K.zero])
    zero_ok = all(not v for v in zero_vals)
    return CosseratReport(from_spencer, identity, airy_ok, zero_ok)
