"""Jet-level view of linear systems: prolongation, symbols, Spencer maps.

A :class:`JetSystem` ``R_q`` is a list of linear equations in the jet
coordinates ``y^k_mu`` (``|mu| <= q``).  Symbols are handled as vectors of
homogeneous polynomials in covector variables ``chi``; prolongation of a
symbol is multiplication by ``chi_i``.  Dimensions are ranks over the
coefficient field, computed at a random rational point and confirmed at a
second one.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from math import comb
from typing import Mapping, Sequence

import flint

from .field import PoleError
from .linalg import GenericPoint, evaluate_rows, kernel_q, rank_q, rref_sparse
from .weyl import (
    JetSection,
    OperatorMatrix,
    format_row,
    mi_add,
    mi_all,
    mi_class,
    mi_sub,
    mi_unit,
    prolong_row,
    term_key,
)

__all__ = [
    "JetSystem",
    "SymbolSpace",
    "SymbolFamily",
    "DeltaReport",
    "DimTable",
    "InvolutivityReport",
    "FIReport",
    "prolong",
    "project",
    "symbol",
    "symbol_family",
    "delta_apply",
    "delta_map",
    "delta_cohomology",
    "involutivity_classes",
    "formal_integrability_test",
    "spencer_operator",
    "bundle_dims",
    "first_spencer_operator",
    "jet_dim",
    "solution_dimension",
]


def jet_dim(n: int, m: int, q: int) -> int:
    """dim J_q(E) = m C(n+q, q)."""
    return m * comb(n + q, q)


def _jets(n: int, m: int, q: int) -> list[tuple]:
    """All (k, mu) with |mu| <= q, descending term order."""
    out = [(k, mu) for s in range(q + 1) for mu in mi_all(n, s) for k in range(m)]
    return sorted(out, key=lambda t: term_key(*t), reverse=True)


def _sym_cols(n: int, m: int, s: int) -> list[tuple]:
    return [(k, mu) for mu in mi_all(n, s) for k in range(m)]


class JetSystem:
    """Linear system ``R_q`` in jet coordinates."""

    def __init__(self, field, m: int, q: int, equations: Sequence[Mapping], names: Sequence[str] | None = None):
        self.field = field
        self.n = field.n
        self.m = m
        self.q = q
        self.equations = [dict(e) for e in equations if e]
        for e in self.equations:
            for k, mu in e:
                if sum(mu) > q:
                    raise ValueError("equation order exceeds the declared system order")
        self.names = list(names) if names else [f"u{k + 1}" for k in range(m)]

    @classmethod
    def from_operator(cls, D: OperatorMatrix, q: int | None = None) -> "JetSystem":
        order = D.order if q is None else q
        order = 0 if order == float("-inf") else order
        return cls(D.field, D.ncols, order, D.rows, D.col_names)

    def to_operator(self) -> OperatorMatrix:
        return OperatorMatrix(self.field, self.equations, self.m, self.names)

    def jets(self, upto: int | None = None) -> list[tuple]:
        return _jets(self.n, self.m, self.q if upto is None else upto)

    def dim_J(self, s: int | None = None) -> int:
        return jet_dim(self.n, self.m, self.q if s is None else s)

    def top_parts(self) -> list[dict]:
        return [{t: a for t, a in e.items() if sum(t[1]) == self.q} for e in self.equations]

    def __str__(self):
        return "\n".join(f"{format_row(self.field, e, self.names)} = 0" for e in self.equations)

    def __repr__(self):
        return f"JetSystem(n={self.n}, m={self.m}, q={self.q}, {len(self.equations)} equations)"


# -- prolongation and projection ---------------------------------------------
def prolong(R: JetSystem, r: int) -> JetSystem:
    """All formal derivatives of order <= r of the equations, as an R_{q+r}."""
    if r < 0:
        raise ValueError("r must be non-negative")
    K = R.field
    level = list(R.equations)
    seen = {(j, (0,) * R.n): e for j, e in enumerate(level)}
    allrows = list(level)
    frontier = dict(seen)
    for _ in range(r):
        nxt = {}
        for (j, lam), e in frontier.items():
            start = max((i for i, x in enumerate(lam) if x), default=0)
            for i in range(start, R.n):
                key = (j, mi_add(lam, mi_unit(R.n, i)))
                if key in nxt:
                    continue
                nxt[key] = prolong_row(K, e, i)
        allrows.extend(nxt.values())
        frontier = nxt
    return JetSystem(K, R.m, R.q + r, allrows, R.names)


def _work(R: JetSystem):
    K = R.field
    if not K.constant and all(a.is_constant() for e in R.equations for a in e.values()):
        W = K.constant_field()
        return W, [{t: W.convert(a) for t, a in e.items()} for e in R.equations]
    return K, R.equations


def _reduced(R: JetSystem):
    W, rows = _work(R)
    return W, rref_sparse(W, rows, key=lambda t: term_key(*t))


def project(R: JetSystem, s: int) -> JetSystem:
    """Image of ``R`` in ``J_s(E)`` (exact elimination over the field)."""
    if s >= R.q:
        raise ValueError("projection order must be below the system order")
    W, red = _reduced(R)
    K = R.field
    rows = [{t: K.convert(a) for t, a in r.items()} for p, r in red if sum(p[1]) <= s]
    return JetSystem(K, R.m, s, rows, R.names)


# -- symbols -------------------------------------------------------------------
class SymbolSpace:
    """Kernel ``g_s`` of an evaluated symbol matrix on ``S_s T* (x) E``."""

    def __init__(self, n: int, m: int, s: int, rows: list[dict], point):
        self.n, self.m, self.s = n, m, s
        self.rows = rows
        self.point = point
        self.cols = _sym_cols(n, m, s)
        self.rank = rank_q(rows, self.cols)
        self._basis = None

    @property
    def dim(self) -> int:
        return len(self.cols) - self.rank

    def basis(self) -> list[dict]:
        if self._basis is None:
            self._basis = kernel_q(self.rows, self.cols)
        return self._basis

    def __repr__(self):
        return f"SymbolSpace(order {self.s}, dim {self.dim})"


def _eval_top(R: JetSystem, point) -> list[dict]:
    return evaluate_rows(R.field, R.top_parts(), point)


def _mult_rows(rows: list[dict], n: int, r: int) -> list[dict]:
    """Multiply symbol rows by all monomials chi^lam, |lam| = r."""
    if r == 0:
        return rows
    out = []
    for lam in mi_all(n, r):
        for row in rows:
            out.append({(k, mi_add(mu, lam)): v for (k, mu), v in row.items()})
    return out


def _sample_top(R: JetSystem, sampler: GenericPoint, check_level: int):
    """Evaluated top-order rows at a point of maximal rank (two agreeing samples)."""
    if R.field.constant:
        return _eval_top(R, None), None
    cols = _sym_cols(R.n, R.m, R.q + check_level)
    best = None
    agree = 0
    tries = 0
    while agree < 2 and tries < 6:
        tries += 1
        pt = sampler.sample()
        try:
            rows = _eval_top(R, pt)
        except PoleError:
            continue
        rk = rank_q(_mult_rows(rows, R.n, check_level), cols)
        if best is None or rk > best[0]:
            best, agree = (rk, rows, pt), 1
        elif rk == best[0]:
            agree += 1
    if best is None:
        raise PoleError("no admissible generic point found")
    return best[1], best[2]


def symbol(R: JetSystem, r: int = 0, seed: int = 0) -> SymbolSpace:
    """Symbol ``g_{q+r}`` of ``prolong(R, r)`` at a generic point."""
    rows, pt = _sample_top(R, GenericPoint(R.field, seed), r)
    return SymbolSpace(R.n, R.m, R.q + r, _mult_rows(rows, R.n, r), pt)


@dataclass
class SymbolFamily:
    """Symbols g_q, ..., g_{q+levels} sharing one evaluation point; below q the
    full spaces S_t T* (x) E are used."""

    n: int
    m: int
    q: int
    spaces: dict

    def __getitem__(self, t: int) -> SymbolSpace:
        if t not in self.spaces:
            if t < self.q and t >= 0:
                self.spaces[t] = SymbolSpace(self.n, self.m, t, [], None)
            else:
                raise KeyError(t)
        return self.spaces[t]


def symbol_family(R: JetSystem, levels: int, seed: int = 0) -> SymbolFamily:
    rows, pt = _sample_top(R, GenericPoint(R.field, seed), 0)
    spaces = {R.q + r: SymbolSpace(R.n, R.m, R.q + r, _mult_rows(rows, R.n, r), pt) for r in range(levels + 1)}
    return SymbolFamily(R.n, R.m, R.q, spaces)


# -- Spencer delta ---------------------------------------------------------------
def _wedge_in(i: int, I: tuple):
    """(sign, sorted) for dx^i ^ dx^I, or None when i in I."""
    if i in I:
        return None
    pos = sum(1 for j in I if j < i)
    return (-1) ** pos, tuple(sorted(I + (i,)))


def delta_apply(vec: Mapping, n: int) -> dict:
    """``(delta w)^k_mu = dx^i ^ w^k_{mu+1_i}`` on a sparse form-valued vector.

    ``vec`` maps ``(I, (k, nu))`` to coefficients, ``I`` a sorted index tuple.
    """
    out: dict = {}
    for (I, (k, nu)), c in vec.items():
        for i in range(n):
            if nu[i] == 0:
                continue
            w = _wedge_in(i, I)
            if w is None:
                continue
            sign, J = w
            key = (J, (k, mi_sub(nu, mi_unit(n, i))))
            v = out.get(key, 0) + sign * c
            if v:
                out[key] = v
            else:
                out.pop(key, None)
    return out


def _forms(n: int, s: int) -> list[tuple]:
    return list(itertools.combinations(range(n), s))


def _lift(space: SymbolSpace, n: int, s: int) -> list[dict]:
    """Basis of wedge^s T* (x) g as sparse form-valued vectors."""
    out = []
    for I in _forms(n, s):
        for b in space.basis():
            out.append({(I, col): v for col, v in b.items()})
    return out


def delta_map(family: SymbolFamily, s: int, t: int) -> list[dict]:
    """Images of a basis of wedge^s T* (x) g_t under delta."""
    return [delta_apply(v, family.n) for v in _lift(family[t], family.n, s)]


def _image_rank(images: list[dict]) -> int:
    cols = sorted({c for v in images for c in v})
    return rank_q(images, cols)


@dataclass
class DeltaReport:
    """``(s, t) -> (dim B, dim Z, dim H)`` for delta on wedge^s T* (x) g_t."""

    entries: dict = dc_field(default_factory=dict)

    def B(self, s, t):
        return self.entries[(s, t)][0]

    def Z(self, s, t):
        return self.entries[(s, t)][1]

    def H(self, s, t):
        return self.entries[(s, t)][2]


def delta_cohomology(family: SymbolFamily, bidegrees: Sequence[tuple[int, int]]) -> DeltaReport:
    """dims of coboundaries, cocycles and cohomology at the given (s, t)."""
    n = family.n
    rep = DeltaReport()
    for s, t in bidegrees:
        g = family[t]
        total = comb(n, s) * g.dim
        rk = _image_rank(delta_map(family, s, t)) if t > 0 else 0
        Z = total - rk
        if s == 0:
            B = 0
        else:
            B = _image_rank(delta_map(family, s - 1, t + 1))
        rep.entries[(s, t)] = (B, Z, Z - B)
    return rep


# -- involutivity ---------------------------------------------------------------
def _class_key(n):
    def key(col):
        k, mu = col
        return tuple(-e for e in mu) + (-k,)

    return key


def _betas(rows: list[dict], n: int) -> dict[int, int]:
    red = rref_sparse(flint_Q, rows, key=_class_key(n))
    beta: dict[int, int] = {i: 0 for i in range(1, n + 1)}
    for (k, mu), _ in red:
        c = mi_class(mu)
        if c >= 0:
            beta[c + 1] += 1
    return beta


class _FlintQ:
    constant = True
    zero = flint.fmpq(0)
    one = flint.fmpq(1)


flint_Q = _FlintQ()


def _transform(rows: list[dict], n: int, T) -> list[dict]:
    """Substitute chi_old_i = sum_j T[i][j] chi_new_j in symbol rows."""
    ctx = flint.fmpq_mpoly_ctx.get(tuple(f"c{i}" for i in range(n)), "degrevlex")
    gens = ctx.gens()
    forms = [sum((gens[j] * T[i][j] for j in range(n)), ctx.constant(0)) for i in range(n)]
    out = []
    for row in rows:
        polys: dict = {}
        for (k, mu), v in row.items():
            p = polys.get(k, ctx.constant(0))
            polys[k] = p + ctx.constant(v) * ctx.from_dict({mu: 1})
        new = {}
        for k, p in polys.items():
            q = p.compose(*forms) if not p.is_zero() else p
            for mu, c in q.to_dict().items():
                if c != 0:
                    new[(k, tuple(mu))] = flint.fmpq(c)
        out.append(new)
    return out


@dataclass
class InvolutivityReport:
    beta: dict
    cartan: bool
    coordinates: str
    rank_next: int
    order: int

    @property
    def involutive(self) -> bool:
        return self.cartan


def _cartan(rows, n, m, q):
    beta = _betas(rows, n)
    rk = rank_q(_mult_rows(rows, n, 1), _sym_cols(n, m, q + 1))
    return beta, rk, rk == sum(i * b for i, b in beta.items())


def involutivity_classes(R: JetSystem, seed: int = 0, attempts: int = 3) -> InvolutivityReport:
    """Class counts beta^i_q of the symbol and the Cartan test.

    Coordinates are changed (permutations first, then random integer linear
    maps) when the given ones are not delta-regular.
    """
    n, m, q = R.n, R.m, R.q
    rows, _ = _sample_top(R, GenericPoint(R.field, seed), 1)
    rows = [r for r in rows if r]
    beta, rk, ok = _cartan(rows, n, m, q)
    if ok:
        return InvolutivityReport(beta, True, "original", rk, q)
    first = (beta, rk)
    for perm in itertools.permutations(range(n)):
        if perm == tuple(range(n)):
            continue
        T = [[1 if perm[i] == j else 0 for j in range(n)] for i in range(n)]
        b, r2, ok = _cartan(_transform(rows, n, T), n, m, q)
        if ok:
            return InvolutivityReport(b, True, f"permutation {tuple(p + 1 for p in perm)}", r2, q)
    rng = GenericPoint(R.field, seed + 1).rng
    for _ in range(attempts):
        while True:
            T = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(n)]
            if flint.fmpq_mat(n, n, [x for r in T for x in r]).det() != 0:
                break
        b, r2, ok = _cartan(_transform(rows, n, T), n, m, q)
        if ok:
            return InvolutivityReport(b, True, f"linear change {T}", r2, q)
    return InvolutivityReport(first[0], False, "original", first[1], q)


# -- formal integrability --------------------------------------------------------
@dataclass
class FIReport:
    integrable: bool | None
    steps: int
    new_order: int | None = None
    new_equations: list = dc_field(default_factory=list)
    involutive_at: int | None = None

    def __bool__(self):
        return bool(self.integrable)


def _new_equations(W, lower, higher, s):
    """Rows of ``higher`` projected to order s that are not in span(lower)."""
    key = lambda t: term_key(*t)
    base = rref_sparse(W, lower, key=key)
    proj = [r for p, r in rref_sparse(W, higher, key=key) if sum(p[1]) <= s]
    rk = len(base)
    full = rref_sparse(W, [r for _, r in base] + proj, key=key)
    if len(full) == rk:
        return []
    have = {p for p, _ in base}
    return [r for p, r in full if p not in have]


def formal_integrability_test(R: JetSystem, steps: int = 2, seed: int = 0) -> FIReport:
    """Check projections of prolongations; stop once the symbol is involutive."""
    if steps < 1:
        raise ValueError("steps must be at least 1")
    K = R.field
    for r in range(steps + 1):
        Rr = prolong(R, r)
        Rr1 = prolong(R, r + 1)
        W, low = _work(Rr)
        _, high = _work(Rr1)
        new = _new_equations(W, low, high, R.q + r)
        if new:
            eqs = [{t: K.convert(a) for t, a in e.items()} for e in new]
            order = max(sum(mu) for e in new for (_, mu) in e)
            return FIReport(False, r, order, eqs)
        if involutivity_classes(Rr, seed=seed).cartan:
            return FIReport(True, r, involutive_at=R.q + r)
    return FIReport(None, steps)


# -- Spencer operator -------------------------------------------------------------
def spencer_operator(xi: JetSection) -> dict:
    """``(D xi)^k_{mu,i} = d_i xi^k_mu - xi^k_{mu+1_i}`` for |mu| <= q-1.

    Returns a mapping ``(i, k, mu) -> value`` (i 0-based).
    """
    K = xi.field
    n = K.n
    if xi.q < 1:
        raise ValueError("the Spencer operator needs a section of order >= 1")
    out = {}
    for s in range(xi.q):
        for mu in mi_all(n, s):
            for k in range(xi.m):
                for i in range(n):
                    v = K.derive(xi[(k, mu)], i) - xi[(k, mi_add(mu, mi_unit(n, i)))]
                    out[(i, k, mu)] = v
    return out


# -- bundle dimensions ---------------------------------------------------------
@dataclass
class DimTable:
    n: int
    q: int
    dim_J: int
    dim_R: int
    dim_g: dict
    F: tuple
    C: tuple
    CE: tuple

    def columns_exact(self) -> bool:
        return all(ce == c + f for ce, c, f in zip(self.CE, self.C, self.F))


def _full_rank(R: JetSystem, sampler):
    cols = R.jets()
    W, rows = _work(R)
    if W.constant:
        ev = evaluate_rows(W, rows, None)
        return ev, None
    for _ in range(6):
        pt = sampler.sample()
        try:
            return evaluate_rows(W, rows, pt), pt
        except PoleError:
            continue
    raise PoleError("no admissible generic point found")


def bundle_dims(R: JetSystem, seed: int = 0) -> DimTable:
    """Dimensions of R_q, g, Janet bundles F_r and Spencer bundles C_r, C_r(E)."""
    n, m, q = R.n, R.m, R.q
    sampler = GenericPoint(R.field, seed)
    ev, pt = _full_rank(R, sampler)
    jcols = R.jets()
    dim_J = len(jcols)
    R_basis = kernel_q(ev, jcols)
    dim_R = len(R_basis)
    fam = symbol_family(R, 1, seed)
    g1 = fam[q + 1]
    full1 = SymbolSpace(n, m, q + 1, [], None)
    C, CE, F = [], [], []
    for r in range(n + 1):
        if r == 0:
            dg = 0
            dS = []
        else:
            dg = _image_rank([delta_apply(v, n) for v in _lift(g1, n, r - 1)])
            dS = [delta_apply(v, n) for v in _lift(full1, n, r - 1)]
        C.append(comb(n, r) * dim_R - dg)
        rS = _image_rank(dS) if dS else 0
        CE.append(comb(n, r) * dim_J - rS)
        span = [{(I, col): v for col, v in b.items()} for I in _forms(n, r) for b in R_basis] + dS
        F.append(comb(n, r) * dim_J - (_image_rank(span) if span else 0))
    return DimTable(n, q, dim_J, dim_R, {q: fam[q].dim, q + 1: g1.dim}, tuple(F), tuple(C), tuple(CE))


def first_spencer_operator(R: JetSystem, check: bool = True) -> tuple[OperatorMatrix, list[tuple]]:
    """First Spencer operator ``D_1 : R_q -> T* (x) R_q / delta(g_{q+1})``.

    Returns the operator on the parametric jets ``z`` of ``R_q`` and the list
    of those jets ``(k, mu)``.
    """
    K = R.field
    n, q = R.n, R.q
    if check:
        rep = formal_integrability_test(R, steps=1)
        if rep.integrable is False:
            raise ValueError("system is not formally integrable")
    R1 = prolong(R, 1)
    W, rows = _work(R1)
    red = rref_sparse(W, rows, key=lambda t: term_key(*t))
    pivots = {p: r for p, r in red}
    allj = _jets(n, R.m, q + 1)
    param = [t for t in allj if t not in pivots and sum(t[1]) <= q]
    param.sort(key=lambda t: (t[0], term_key(0, t[1])))
    zi = {t: a for a, t in enumerate(param)}
    top_param = [t for t in allj if t not in pivots and sum(t[1]) == q + 1]

    def express(t):
        """jet t as a W-linear combination of the z's (top parametric set to 0)."""
        if t in zi:
            return {zi[t]: W.one}
        if t in pivots:
            out = {}
            for c, v in pivots[t].items():
                if c == t or c in top_param:
                    continue
                if c not in zi:
                    raise AssertionError("reduced form is not in terms of parametric jets")
                out[zi[c]] = out.get(zi[c], W.zero) - v
            return {a: v for a, v in out.items() if v}
        return {}

    z0 = (0,) * n
    out_rows = []
    row_names = []
    for a, (k, mu) in enumerate(param):
        for i in range(n):
            row = {(a, mi_unit(n, i)): W.one}
            for b, v in express((k, mi_add(mu, mi_unit(n, i)))).items():
                old = row.get((b, z0), W.zero)
                if old - v:
                    row[(b, z0)] = old - v
                else:
                    row.pop((b, z0), None)
            out_rows.append(row)
            row_names.append(f"z{a + 1}_{i + 1}")
    g1 = symbol(R, 1).dim
    if g1:
        # quotient by delta(g_{q+1}) inside T* (x) R_q, in parametric coordinates
        fam = symbol_family(R, 1)
        idx = {}
        for a, (k, mu) in enumerate(param):
            for i in range(n):
                idx[((i,), (k, mu))] = a * n + i
        imgs = []
        for v in _lift(fam[q + 1], n, 0):
            w = {idx[c]: x for c, x in delta_apply(v, n).items() if c in idx}
            if w:
                imgs.append(w)
        red_img = rref_sparse(flint_Q, imgs, key=lambda j: (j,))
        keep = [j for j in range(len(out_rows)) if j not in {p for p, _ in red_img}]
        new_rows = []
        for j in keep:
            row = dict(out_rows[j])
            for p, w in red_img:
                c = w.get(j)
                if c:
                    for t, v in out_rows[p].items():
                        nv = row.get(t, W.zero) - W.convert(c) * v
                        if nv:
                            row[t] = nv
                        else:
                            row.pop(t, None)
            new_rows.append(row)
        out_rows = new_rows
        row_names = [row_names[j] for j in keep]
    names = [f"z{a + 1}" for a in range(len(param))]
    Dm = OperatorMatrix(K, [{t: K.convert(v) for t, v in r.items()} for r in out_rows], len(param), names, row_names)
    return Dm, param


def solution_dimension(D: OperatorMatrix, cap: int | None = None) -> int | None:
    """Number of parametric derivatives of ``D y = 0``; None if infinite.

    Counted from the leading terms of a Janet basis: a jet is principal iff
    it is a derivative of some leading term.
    """
    from .involutive import complete

    B = complete(D, cap=cap)
    lts = B.leading_terms()
    n, m = D.field.n, D.ncols
    top = max((sum(mu) for _, mu in lts), default=0)
    count = 0
    for s in range(top + 2):
        free = [(k, mu) for k in range(m) for mu in mi_all(n, s)
                if not any(k == j and all(a >= b for a, b in zip(mu, nu)) for j, nu in lts)]
        if s == top + 1:
            return None if free else count
        count += len(free)
    return count
