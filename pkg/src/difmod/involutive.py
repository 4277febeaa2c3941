"""Janet bases of row modules over D, normal forms, syzygies and CC.

The completion is the classical Gerdt-Blinkov loop with Janet division.
Every basis element may carry a *representation*: a row of ``D^p`` saying
how it is obtained from the ``p`` input rows.  Reducing a non-multiplicative
prolongation to zero then yields a syzygy of the inputs, and these together
with the reductions of the inputs themselves generate all syzygies.

Constant-coefficient input is moved to plain Q arithmetic and moved back
transparently.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field as dc_field
from typing import Iterable, Sequence

from .weyl import (
    OperatorMatrix,
    ScalarOperator,
    _add_to,
    mi_le,
    mi_sub,
    mi_unit,
    prolong_row,
    term_key,
)

__all__ = [
    "CompletionError",
    "TermOrder",
    "JanetBasis",
    "complete",
    "involutive_normal_form",
    "syzygies",
    "compatibility_conditions",
    "Resolution",
    "free_resolution",
    "row_module_membership",
    "row_module_equal",
    "leading_term",
]


class CompletionError(RuntimeError):
    """The completion exceeded its prolongation-order cap."""


class TermOrder:
    """Degree first, then lower unknown index, then grevlex with ``x_n`` largest.

    ``key`` returns a tuple; the term with the larger key is leading.
    """

    name = "degree-position-grevlex"

    @staticmethod
    def key(k: int, mu: tuple) -> tuple:
        return term_key(k, mu)


def leading_term(row) -> tuple:
    return max(row, key=lambda t: term_key(*t))


def _neg_key(t):
    return tuple(-e for e in term_key(*t))


def working_field(D: OperatorMatrix):
    """Plain Q when every coefficient is a rational constant."""
    K = D.field
    if K.constant:
        return K
    if D.is_constant():
        return K.constant_field()
    return K


class _Elem:
    __slots__ = ("row", "rep", "lt", "P", "cache", "uid")

    def __init__(self, row, rep, lt, uid):
        self.row = row
        self.rep = rep
        self.lt = lt
        self.P: set = set()
        self.cache: dict = {}
        self.uid = uid


class JanetBasis:
    """Janet-involutive basis of a submodule of ``D^m``.

    Parameters
    ----------
    field : coefficient field used for the arithmetic
    ncols : rank m of the ambient free module
    track : keep representations in terms of the inserted rows
    cap : maximal order allowed for intermediate rows
    """

    def __init__(self, field, ncols: int, track: bool = False, cap: int | None = None):
        self.field = field
        self.ncols = ncols
        self.track = track
        self.cap = cap
        self.elems: list[_Elem] = []
        self.ninputs = 0
        self.inputs: list[dict] = []
        self._bycol: dict[int, list[_Elem]] = {}
        self._mult: dict[int, dict] = {}
        self._uid = itertools.count()

    # -- Janet division ------------------------------------------------------
    def _multvars(self, k: int) -> dict:
        hit = self._mult.get(k)
        if hit is not None:
            return hit
        els = self._bycol.get(k, [])
        U = [e.lt[1] for e in els]
        n = self.field.n
        out = {}
        for e in els:
            u = e.lt[1]
            mv = []
            for i in range(n - 1, -1, -1):
                top = max(v[i] for v in U if v[i + 1 :] == u[i + 1 :])
                if u[i] == top:
                    mv.append(i)
            out[e.uid] = frozenset(mv)
        self._mult[k] = out
        return out

    def multiplicative(self, e: _Elem) -> frozenset:
        return self._multvars(e.lt[0])[e.uid]

    def nonmultiplicative(self, e: _Elem) -> list[int]:
        mv = self.multiplicative(e)
        return [i for i in range(self.field.n) if i not in mv]

    def _divisor(self, k, mu):
        els = self._bycol.get(k)
        if not els:
            return None
        mv = self._multvars(k)
        for e in els:
            nu = e.lt[1]
            if mi_le(nu, mu):
                m = mv[e.uid]
                if all(d == 0 or i in m for i, d in enumerate(mi_sub(mu, nu))):
                    return e
        return None

    def _add(self, e: _Elem):
        self.elems.append(e)
        self._bycol.setdefault(e.lt[0], []).append(e)
        self._mult.pop(e.lt[0], None)

    def _remove(self, e: _Elem):
        self.elems.remove(e)
        self._bycol[e.lt[0]].remove(e)
        self._mult.pop(e.lt[0], None)

    # -- prolongations -------------------------------------------------------
    def _prolonged(self, e: _Elem, lam: tuple):
        if not any(lam):
            return e.row, e.rep
        hit = e.cache.get(lam)
        if hit is not None:
            return hit
        i = max(j for j, x in enumerate(lam) if x)
        prow, prep = self._prolonged(e, lam[:i] + (lam[i] - 1,) + lam[i + 1 :])
        K = self.field
        out = (prolong_row(K, prow, i), prolong_row(K, prep, i) if self.track else None)
        e.cache[lam] = out
        return out

    # -- normal form ---------------------------------------------------------
    def _reduce(self, row: dict, rep: dict | None, skip_lead: bool = False):
        K = self.field
        work = dict(row)
        wrep = dict(rep) if (self.track and rep is not None) else None
        heap = [(_neg_key(t), t) for t in work]
        heapq.heapify(heap)
        rem: dict = {}
        first = skip_lead
        while heap:
            _, t = heapq.heappop(heap)
            c = work.pop(t, None)
            if c is None:
                continue
            if first:
                first = False
                rem[t] = c
                continue
            g = self._divisor(*t)
            if g is None:
                rem[t] = c
                continue
            prow, prep = self._prolonged(g, mi_sub(t[1], g.lt[1]))
            for t2, b in prow.items():
                if t2 == t:
                    continue
                old = work.get(t2)
                if old is None:
                    work[t2] = -c * b
                    heapq.heappush(heap, (_neg_key(t2), t2))
                else:
                    new = old - c * b
                    if new:
                        work[t2] = new
                    else:
                        del work[t2]
            if wrep is not None:
                for t2, b in prep.items():
                    _add_to(wrep, t2, -c * b, K.zero)
        return rem, wrep

    def _monic(self, row: dict, rep):
        lt = leading_term(row)
        lc = row[lt]
        if lc != 1:
            inv = self.field.one / lc
            row = {t: inv * a for t, a in row.items()}
            if rep is not None:
                rep = {t: inv * a for t, a in rep.items()}
        return row, rep, lt

    def _check_cap(self, lt):
        if self.cap is not None and sum(lt[1]) > self.cap:
            raise CompletionError(f"prolongation order exceeded the cap {self.cap}")

    # -- completion ----------------------------------------------------------
    def insert(self, rows: Iterable[dict], reps: Iterable[dict] | None = None):
        """Add rows and restore involutivity."""
        K = self.field
        Q: list = []
        counter = itertools.count()
        rows = list(rows)
        if reps is None:
            reps = []
            for r in rows:
                j = self.ninputs
                self.ninputs += 1
                self.inputs.append(r)
                reps.append({(j, (0,) * K.n): K.one} if self.track else None)
        for r, rp in zip(rows, reps):
            if r:
                heapq.heappush(Q, (term_key(*leading_term(r)), next(counter), r, rp))
        while Q:
            h = None
            while Q and h is None:
                _, _, p, prep = heapq.heappop(Q)
                rem, rrep = self._reduce(p, prep)
                if rem:
                    h = (rem, rrep)
            if h is None:
                break
            row, rep, lt = self._monic(*h)
            self._check_cap(lt)
            # elements whose leading term is a proper multiple move back to Q
            for g in list(self._bycol.get(lt[0], [])):
                if g.lt != lt and mi_le(lt[1], g.lt[1]):
                    self._remove(g)
                    heapq.heappush(Q, (term_key(*g.lt), next(counter), g.row, g.rep))
            self._add(_Elem(row, rep, lt, next(self._uid)))
            for g in list(self.elems):
                for i in self.nonmultiplicative(g):
                    if i in g.P:
                        continue
                    g.P.add(i)
                    prow, prep = self._prolonged(g, mi_unit(K.n, i))
                    if prow:
                        self._check_cap(leading_term(prow))
                        heapq.heappush(Q, (term_key(*leading_term(prow)), next(counter), prow, prep))
        self._tail_reduce()
        return self

    def _tail_reduce(self):
        for e in self.elems:
            rem, rep = self._reduce(e.row, e.rep, skip_lead=True)
            if rem != e.row:
                e.row, e.rep = rem, rep
                e.cache.clear()

    # -- queries -------------------------------------------------------------
    def normal_form(self, row: dict) -> dict:
        rem, _ = self._reduce(row, None)
        return rem

    def normal_form_tracked(self, row: dict):
        """Return (remainder, cofactor row over the inputs) with
        ``row = sum cofactor_j * input_j + remainder``."""
        if not self.track:
            raise ValueError("basis was built without representations")
        rem, rep = self._reduce(row, {})
        return rem, {t: -a for t, a in rep.items()}

    def contains(self, row: dict) -> bool:
        return not self.normal_form(row)

    @property
    def order(self):
        return max((sum(e.lt[1]) for e in self.elems), default=float("-inf"))

    def sorted_elems(self) -> list[_Elem]:
        return sorted(self.elems, key=lambda e: term_key(*e.lt))

    def syzygy_rows(self) -> list[dict]:
        """Generators of the syzygies of the inserted rows (tracked bases)."""
        if not self.track:
            raise ValueError("basis was built without representations")
        K = self.field
        out = []
        for e in self.sorted_elems():
            for i in self.nonmultiplicative(e):
                prow, prep = self._prolonged(e, mi_unit(K.n, i))
                rem, rep = self._reduce(prow, prep)
                if rem:
                    raise AssertionError("basis is not involutive")
                if rep:
                    out.append(rep)
        z = (0,) * K.n
        for j, r in enumerate(self.inputs):
            rem, rep = self._reduce(r, {(j, z): K.one})
            if rem:
                raise AssertionError("input row not reduced by its own basis")
            if rep:
                out.append(rep)
        return out

    def classes(self) -> dict[int, int]:
        """Number of basis elements of maximal order per class (1-based)."""
        q = self.order
        out: dict[int, int] = {}
        for e in self.elems:
            if sum(e.lt[1]) == q:
                c = next(i for i, x in enumerate(e.lt[1]) if x) + 1 if q > 0 else 0
                out[c] = out.get(c, 0) + 1
        return out

    def is_involutive(self) -> bool:
        K = self.field
        for e in self.elems:
            for i in self.nonmultiplicative(e):
                prow, _ = self._prolonged(e, mi_unit(K.n, i))
                if self.normal_form(prow):
                    return False
        return True


def _default_cap(D: OperatorMatrix) -> int:
    q = D.order
    q = 0 if q == float("-inf") else q
    return 3 * q + 6


class InvolutiveBasis:
    """User-facing wrapper tying a :class:`JanetBasis` to the input field."""

    def __init__(self, D: OperatorMatrix, track: bool = False, cap: int | None = None):
        self.source = D
        self.field = D.field
        self.work_field = working_field(D)
        self.cap = _default_cap(D) if cap is None else cap
        self._full = None
        self.core = JanetBasis(self.work_field, D.ncols, track=track, cap=self.cap)
        W = self.work_field
        self.core.insert([{t: W.convert(a) for t, a in r.items()} for r in D.rows])

    def _in(self, row):
        W = self.work_field
        return {t: W.convert(a) for t, a in row.items()}

    def _out(self, row):
        K = self.field
        return {t: K.convert(a) for t, a in row.items()}

    def _query_core(self, row):
        """Core able to reduce ``row``: a constant-field basis cannot take
        variable coefficients, so a copy over the full field is built once."""
        if not getattr(self.work_field, "constant", False) or getattr(self.field, "constant", False):
            return self.core, self._in(row)
        if all(self.field.is_constant(a) for a in row.values()):
            return self.core, self._in(row)
        if self._full is None:
            K = self.field
            self._full = JanetBasis(K, self.source.ncols, track=self.core.track, cap=self.cap)
            self._full.insert([dict(r) for r in self.source.rows])
        return self._full, {t: self.field.convert(a) for t, a in row.items()}

    @property
    def order(self):
        return self.core.order

    def matrix(self) -> OperatorMatrix:
        rows = [self._out(e.row) for e in self.core.sorted_elems()]
        return OperatorMatrix(self.field, rows, self.source.ncols, self.source.col_names)

    def leading_terms(self) -> list[tuple]:
        return [e.lt for e in self.core.sorted_elems()]

    def multiplicative_vars(self) -> list[frozenset]:
        return [self.core.multiplicative(e) for e in self.core.sorted_elems()]

    def normal_form(self, row: dict) -> dict:
        core, r = self._query_core(row)
        return self._out(core.normal_form(r))

    def normal_form_tracked(self, row: dict):
        core, r = self._query_core(row)
        rem, cof = core.normal_form_tracked(r)
        return self._out(rem), self._out(cof)

    def contains(self, row: dict) -> bool:
        core, r = self._query_core(row)
        return core.contains(r)

    def syzygies(self) -> list[dict]:
        return [self._out(s) for s in self.core.syzygy_rows()]

    def classes(self) -> dict[int, int]:
        return self.core.classes()

    def is_involutive(self) -> bool:
        return self.core.is_involutive()

    def __len__(self):
        return len(self.core.elems)

    def __repr__(self):
        return f"InvolutiveBasis({len(self)} rows, order {self.order})"


def complete(D: OperatorMatrix, cap: int | None = None, track: bool = False) -> InvolutiveBasis:
    """Janet completion of the row module of ``D``."""
    return InvolutiveBasis(D, track=track, cap=cap)


def involutive_normal_form(row: dict, B: InvolutiveBasis):
    """(remainder, cofactors) of ``row`` modulo ``B``; cofactors need tracking."""
    if B.core.track:
        rem, cof = B.normal_form_tracked(row)
        return rem, _split_cofactors(B.field, cof, B.source.nrows)
    return B.normal_form(row), None


def _split_cofactors(K, rep: dict, p: int) -> list[ScalarOperator]:
    out = [dict() for _ in range(p)]
    for (j, mu), a in rep.items():
        out[j][mu] = a
    return [ScalarOperator(K, t) for t in out]


def syzygies(D: OperatorMatrix, cap: int | None = None) -> list[dict]:
    return complete(D, cap=cap, track=True).syzygies()


def _minimize(K, rows: list[dict], ncols: int) -> list[dict]:
    """Drop generators lying in the module of the previously kept ones."""
    rows = [r for r in rows if r]
    if not rows:
        return []
    S = OperatorMatrix(K, rows, ncols)
    W = working_field(S)
    SB = JanetBasis(W, ncols)
    SB.insert([{t: W.convert(a) for t, a in r.items()} for r in rows])
    kept = JanetBasis(W, ncols)
    out = []
    for e in SB.sorted_elems():
        if kept.normal_form(e.row):
            kept.insert([e.row])
            out.append({t: K.convert(a) for t, a in e.row.items()})
    return out


def compatibility_conditions(D: OperatorMatrix, cap: int | None = None) -> OperatorMatrix:
    """Generating compatibility conditions ``D1`` with ``D1 o D = 0``.

    The result acts on the equations of ``D`` (its columns are named after
    ``D.row_names`` when present).
    """
    p = D.nrows
    names = D.row_names or [f"v{i + 1}" for i in range(p)]
    if p == 0:
        return OperatorMatrix(D.field, [], 0, [])
    B = complete(D, cap=cap, track=True)
    gens = _minimize(D.field, B.syzygies(), p)
    return OperatorMatrix(D.field, gens, p, names)


@dataclass
class Resolution:
    maps: list[OperatorMatrix] = dc_field(default_factory=list)

    def certificates(self) -> list[bool]:
        """``D_{r+1} o D_r == 0`` for consecutive maps."""
        out = []
        for a, b in zip(self.maps, self.maps[1:]):
            out.append(b.compose(a).is_zero() if b.nrows else True)
        return out

    def shape(self) -> list[tuple[int, int]]:
        return [M.shape for M in self.maps]


def free_resolution(D: OperatorMatrix, max_length: int = 4, cap: int | None = None) -> Resolution:
    if max_length < 1:
        raise ValueError("max_length must be at least 1")
    res = Resolution([D])
    cur = D
    for _ in range(max_length):
        nxt = compatibility_conditions(cur, cap=cap)
        if nxt.nrows == 0:
            break
        res.maps.append(nxt)
        cur = nxt
    return res


@dataclass
class Membership:
    member: bool
    cofactors: list | None
    remainder: dict

    def __bool__(self):
        return self.member


def row_module_membership(f: dict, D: OperatorMatrix, basis: InvolutiveBasis | None = None) -> Membership:
    B = basis or complete(D, track=True)
    if B.core.track:
        rem, cof = B.normal_form_tracked(f)
        if rem:
            return Membership(False, None, rem)
        return Membership(True, _split_cofactors(D.field, cof, D.nrows), rem)
    rem = B.normal_form(f)
    return Membership(not rem, None, rem)


@dataclass
class Equality:
    equal: bool
    witness: dict | None = None
    side: str | None = None  # "right_not_in_left" or "left_not_in_right"

    def __bool__(self):
        return self.equal


def row_module_equal(D: OperatorMatrix, E: OperatorMatrix) -> Equality:
    if D.ncols != E.ncols:
        raise ValueError("row modules live in different free modules")
    BD = complete(D)
    for r in E.rows:
        if not BD.contains(r):
            return Equality(False, BD.normal_form(r) and r, "right_not_in_left")
    BE = complete(E)
    for r in D.rows:
        if not BE.contains(r):
            return Equality(False, r, "left_not_in_right")
    return Equality(True)
