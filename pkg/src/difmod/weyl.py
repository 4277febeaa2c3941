"""Linear differential operators with coefficients in a differential field.

An operator ``P = sum a_mu d_mu`` is stored with its coefficients on the
left, as a mapping ``mu -> a_mu`` over multi-indices (tuples of length n).
Operator matrices act on the left on column vectors of unknowns; row ``i`` is
kept as a mapping ``(k, mu) -> a`` meaning ``sum a d_mu u_k``.  The module
of the system is the cokernel of the right action on row vectors, so a row
of a matrix is literally an element of the free module ``D^m``.
"""

from __future__ import annotations

from math import comb
from typing import Iterable, Mapping, Sequence

__all__ = [
    "mi_add",
    "mi_sub",
    "mi_unit",
    "mi_zero",
    "mi_class",
    "mi_le",
    "mi_all",
    "term_key",
    "ScalarOperator",
    "OperatorMatrix",
    "JetSection",
    "compose",
    "compose_row",
    "prolong_row",
    "adjoint",
    "op_apply",
    "green_divergence",
    "divergence_of",
    "format_row",
]


# -- multi-indices ----------------------------------------------------------
def mi_zero(n: int) -> tuple:
    return (0,) * n


def mi_unit(n: int, i: int) -> tuple:
    return tuple(1 if j == i else 0 for j in range(n))


def mi_add(a: tuple, b: tuple) -> tuple:
    return tuple(x + y for x, y in zip(a, b))


def mi_sub(a: tuple, b: tuple) -> tuple:
    return tuple(x - y for x, y in zip(a, b))


def mi_le(a: tuple, b: tuple) -> bool:
    return all(x <= y for x, y in zip(a, b))


def mi_class(mu: tuple) -> int:
    """Smallest i (0-based) with mu_i != 0; -1 for the zero index."""
    for i, e in enumerate(mu):
        if e:
            return i
    return -1


def mi_all(n: int, q: int) -> list[tuple]:
    """All multi-indices of length exactly ``q``, in ascending term order."""
    if n == 0:
        return [()] if q == 0 else []
    out = []

    def rec(prefix, left, slots):
        if slots == 1:
            out.append(prefix + (left,))
            return
        for e in range(left, -1, -1):
            rec(prefix + (e,), left - e, slots - 1)

    rec((), q, n)
    out.sort(key=lambda mu: tuple(-e for e in mu))
    return out


def _binom(mu, nu) -> int:
    r = 1
    for a, b in zip(mu, nu):
        r *= comb(a, b)
    return r


def _sub_indices(mu):
    """All nu <= mu."""
    out = [()]
    for e in mu:
        out = [p + (j,) for p in out for j in range(e + 1)]
    return out


def term_key(k: int, mu: tuple) -> tuple:
    """Sort key of the term ``d_mu u_k``; larger means leading.

    Total order first, then lower unknown index, then graded reverse
    lexicographic with ``x_n`` largest (so derivatives of highest class lead).
    """
    return (sum(mu), -k) + tuple(-e for e in mu)


# -- core composition --------------------------------------------------------
def _add_to(acc: dict, key, val, zero):
    old = acc.get(key)
    new = val if old is None else old + val
    if new:
        acc[key] = new
    elif old is not None:
        del acc[key]


def _compose_terms(K, P: Mapping, Q: Mapping, keyfn=None) -> dict:
    """Compose ``P`` (mu -> a) with ``Q`` (key -> b).

    ``keyfn`` splits a key of Q into (tag, mu) and rebuilds it; by default
    keys are plain multi-indices.
    """
    out: dict = {}
    zero = K.zero
    for lam, a in P.items():
        subs = _sub_indices(lam)
        for key, b in Q.items():
            if keyfn is None:
                tag, mu = None, key
            else:
                tag, mu = key
            for nu in subs:
                db = K.derive_multi(b, nu)
                if not db:
                    continue
                c = _binom(lam, nu)
                nm = mi_add(mi_sub(lam, nu), mu)
                val = a * db if c == 1 else a * db * c
                _add_to(out, nm if keyfn is None else (tag, nm), val, zero)
    return out


def prolong_row(K, row: Mapping, i: int) -> dict:
    """``d_i`` composed with a row (fast path of :func:`compose_row`)."""
    out: dict = {}
    zero = K.zero
    for (k, mu), b in row.items():
        nm = mu[:i] + (mu[i] + 1,) + mu[i + 1 :]
        _add_to(out, (k, nm), b, zero)
        db = K.derive(b, i)
        if db:
            _add_to(out, (k, mu), db, zero)
    return out


def compose_row(K, P: Mapping, row: Mapping) -> dict:
    """Left multiplication of a row of ``D^m`` by the operator ``P``."""
    return _compose_terms(K, P, row, keyfn=True)


def _adjoint_terms(K, P: Mapping) -> dict:
    out: dict = {}
    zero = K.zero
    for mu, a in P.items():
        sign = -1 if sum(mu) % 2 else 1
        for nu in _sub_indices(mu):
            da = K.derive_multi(a, nu)
            if not da:
                continue
            c = sign * _binom(mu, nu)
            _add_to(out, mi_sub(mu, nu), da * c, zero)
    return out


# -- scalar operators -------------------------------------------------------
class ScalarOperator:
    """Element ``sum a_mu d_mu`` of ``D = K[d_1..d_n]``."""

    __slots__ = ("field", "terms")

    def __init__(self, field, terms: Mapping | None = None):
        self.field = field
        self.terms = {mu: field.convert(a) for mu, a in (terms or {}).items() if a}

    @classmethod
    def d(cls, field, *idx: int) -> "ScalarOperator":
        """``d_{i1 i2 ...}`` with 1-based variable indices."""
        mu = [0] * field.n
        for i in idx:
            if not 1 <= i <= field.n:
                raise ValueError(f"derivative index {i} out of range 1..{field.n}")
            mu[i - 1] += 1
        return cls(field, {tuple(mu): field.one})

    @classmethod
    def scalar(cls, field, a) -> "ScalarOperator":
        return cls(field, {mi_zero(field.n): field.convert(a)})

    @property
    def order(self) -> float | int:
        if not self.terms:
            return float("-inf")
        return max(sum(mu) for mu in self.terms)

    def _wrap(self, other):
        if isinstance(other, ScalarOperator):
            return other
        return ScalarOperator.scalar(self.field, other)

    def __add__(self, other):
        o = self._wrap(other)
        out = dict(self.terms)
        for mu, a in o.terms.items():
            _add_to(out, mu, a, self.field.zero)
        return ScalarOperator(self.field, out)

    __radd__ = __add__

    def __neg__(self):
        return ScalarOperator(self.field, {mu: -a for mu, a in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._wrap(other))

    def __rsub__(self, other):
        return self._wrap(other) - self

    def __mul__(self, other):
        """Composition ``self o other``."""
        o = self._wrap(other)
        return ScalarOperator(self.field, _compose_terms(self.field, self.terms, o.terms))

    def __rmul__(self, other):
        return self._wrap(other) * self

    def __eq__(self, other):
        if not isinstance(other, ScalarOperator):
            other = self._wrap(other)
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def adjoint(self) -> "ScalarOperator":
        return ScalarOperator(self.field, _adjoint_terms(self.field, self.terms))

    def apply(self, f):
        """Apply to a field element (a function of the variables)."""
        K = self.field
        acc = K.zero
        for mu, a in self.terms.items():
            acc = acc + a * K.derive_multi(K.convert(f), mu)
        return acc

    def fmt(self, unknown: str = "") -> str:
        row = {(0, mu): a for mu, a in self.terms.items()}
        return format_row(self.field, row, [unknown] if unknown else None)

    def __str__(self):
        return self.fmt()

    def __repr__(self):
        return f"ScalarOperator({self})"


def compose(P, Q):
    """Composition of scalar operators or of operator matrices."""
    if isinstance(P, OperatorMatrix):
        return P.compose(Q)
    return P * Q


# -- operator matrices ------------------------------------------------------
class OperatorMatrix:
    """``p x m`` matrix over D; rows are elements of ``D^m``."""

    def __init__(
        self,
        field,
        rows: Iterable[Mapping],
        ncols: int,
        col_names: Sequence[str] | None = None,
        row_names: Sequence[str] | None = None,
    ):
        self.field = field
        self.ncols = ncols
        self.rows = []
        for r in rows:
            clean = {}
            for (k, mu), a in r.items():
                if not 0 <= k < ncols:
                    raise ValueError(f"column {k} out of range for {ncols} unknowns")
                if len(mu) != field.n:
                    raise ValueError("multi-index length does not match the field")
                a = field.convert(a)
                if a:
                    clean[(k, tuple(mu))] = a
            self.rows.append(clean)
        self.col_names = list(col_names) if col_names else [f"u{k + 1}" for k in range(ncols)]
        self.row_names = list(row_names) if row_names else None
        if len(self.col_names) != ncols:
            raise ValueError("col_names length mismatch")

    # construction helpers
    @classmethod
    def from_entries(cls, field, entries: Sequence[Sequence], col_names=None, row_names=None):
        """Build from a grid of :class:`ScalarOperator` (or field elements)."""
        ncols = len(entries[0]) if entries else 0
        rows = []
        for line in entries:
            if len(line) != ncols:
                raise ValueError("ragged operator matrix")
            row = {}
            for k, e in enumerate(line):
                if not isinstance(e, ScalarOperator):
                    e = ScalarOperator.scalar(field, e)
                for mu, a in e.terms.items():
                    row[(k, mu)] = a
            rows.append(row)
        return cls(field, rows, ncols, col_names, row_names)

    @classmethod
    def identity(cls, field, m: int, col_names=None):
        z = mi_zero(field.n)
        return cls(field, [{(k, z): field.one} for k in range(m)], m, col_names)

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.rows), self.ncols)

    @property
    def order(self):
        o = [sum(mu) for r in self.rows for (_, mu) in r]
        return max(o) if o else float("-inf")

    def entry(self, i: int, k: int) -> ScalarOperator:
        return ScalarOperator(self.field, {mu: a for (c, mu), a in self.rows[i].items() if c == k})

    def entries(self) -> list[list[ScalarOperator]]:
        return [[self.entry(i, k) for k in range(self.ncols)] for i in range(self.nrows)]

    def with_rows(self, rows, row_names=None) -> "OperatorMatrix":
        return OperatorMatrix(self.field, rows, self.ncols, self.col_names, row_names)

    def stack(self, other: "OperatorMatrix") -> "OperatorMatrix":
        if other.ncols != self.ncols:
            raise ValueError("column count mismatch")
        return self.with_rows(self.rows + other.rows)

    def compose(self, other: "OperatorMatrix") -> "OperatorMatrix":
        """``self o other``: (p x m) o (m x r) -> p x r."""
        if self.ncols != other.nrows:
            raise ValueError(f"cannot compose {self.shape} with {other.shape}")
        K = self.field
        rows = []
        for r in self.rows:
            acc: dict = {}
            by_col: dict = {}
            for (k, mu), a in r.items():
                by_col.setdefault(k, {})[mu] = a
            for k, P in by_col.items():
                for key, val in compose_row(K, P, other.rows[k]).items():
                    _add_to(acc, key, val, K.zero)
            rows.append(acc)
        return OperatorMatrix(K, rows, other.ncols, other.col_names, self.row_names)

    def adjoint(self, col_names=None) -> "OperatorMatrix":
        """Formal adjoint: entrywise adjoint, transposed (shape m x p)."""
        K = self.field
        out = [dict() for _ in range(self.ncols)]
        for i, r in enumerate(self.rows):
            by_col: dict = {}
            for (k, mu), a in r.items():
                by_col.setdefault(k, {})[mu] = a
            for k, P in by_col.items():
                for mu, a in _adjoint_terms(K, P).items():
                    _add_to(out[k], (i, mu), a, K.zero)
        names = col_names or (self.row_names if self.row_names else [f"l{i + 1}" for i in range(self.nrows)])
        return OperatorMatrix(K, out, self.nrows, names)

    def is_zero(self) -> bool:
        return all(not r for r in self.rows)

    def is_constant(self) -> bool:
        if self.field.constant:
            return True
        return all(a.is_constant() for r in self.rows for a in r.values())

    def change_field(self, field) -> "OperatorMatrix":
        rows = [{key: field.convert(a) for key, a in r.items()} for r in self.rows]
        return OperatorMatrix(field, rows, self.ncols, self.col_names, self.row_names)

    def __eq__(self, other):
        if not isinstance(other, OperatorMatrix):
            return NotImplemented
        return self.ncols == other.ncols and self.rows == other.rows

    def equations(self) -> list[str]:
        return [format_row(self.field, r, self.col_names) for r in self.rows]

    def __str__(self):
        return "\n".join(f"{e} = 0" for e in self.equations()) or "(no equations)"

    def __repr__(self):
        return f"OperatorMatrix({self.nrows}x{self.ncols}, order {self.order})"


# -- formatting -------------------------------------------------------------
def _fmt_coeff(a) -> tuple[str, bool]:
    """Return (text, is_negative_simple)."""
    s = str(a)
    return s, s.startswith("-")


def format_row(K, row: Mapping, names: Sequence[str] | None = None) -> str:
    """Human-readable ``d[i,j](u)`` form; terms in descending term order."""
    if not row:
        return "0"
    parts = []
    for (k, mu) in sorted(row, key=lambda t: term_key(*t), reverse=True):
        a = row[(k, mu)]
        u = names[k] if names else "u"
        idx = [str(i + 1) for i, e in enumerate(mu) for _ in range(e)]
        head = f"d[{','.join(idx)}]({u})" if idx else u
        s = str(a)
        neg = False
        if s.startswith("-") and not any(ch in s[1:] for ch in "+-"):
            neg, s = True, s[1:]
        elif any(ch in s[1:] for ch in "+-") or "/" in s and " " in s:
            s = f"({s})"
        body = head if s == "1" else f"{s}*{head}"
        parts.append(("-" if neg else "+", body))
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


# -- sections ---------------------------------------------------------------
class JetSection:
    """Formal jet ``xi^k_mu`` (|mu| <= q) with field-valued components."""

    def __init__(self, field, m: int, q: int, values: Mapping | None = None):
        self.field = field
        self.m = m
        self.q = q
        self.values = {}
        for key, v in (values or {}).items():
            k, mu = key
            if sum(mu) > q:
                raise ValueError("jet component beyond declared order")
            self.values[(k, tuple(mu))] = field.convert(v)

    def __getitem__(self, key):
        k, mu = key
        if sum(mu) > self.q:
            raise ValueError(f"section of order {self.q} has no component of order {sum(mu)}")
        return self.values.get((k, tuple(mu)), self.field.zero)

    @classmethod
    def holonomic(cls, field, fs: Sequence, q: int) -> "JetSection":
        """``j_q(f)`` for field elements ``f_k``."""
        vals = {}
        for k, f in enumerate(fs):
            f = field.convert(f)
            for r in range(q + 1):
                for mu in mi_all(field.n, r):
                    vals[(k, mu)] = field.derive_multi(f, mu)
        return cls(field, len(fs), q, vals)


def op_apply(D: OperatorMatrix, section) -> list:
    """Evaluate ``D`` on a jet section or on a list of field elements."""
    K = D.field
    if not isinstance(section, JetSection):
        fs = list(section)
        if len(fs) != D.ncols:
            raise ValueError("section length does not match the unknowns")
        fs = [K.convert(f) for f in fs]
        out = []
        for r in D.rows:
            acc = K.zero
            for (k, mu), a in r.items():
                acc = acc + a * K.derive_multi(fs[k], mu)
            out.append(acc)
        return out
    if D.order > section.q:
        raise ValueError(f"section order {section.q} below operator order {D.order}")
    out = []
    for r in D.rows:
        acc = K.zero
        for (k, mu), a in r.items():
            acc = acc + a * section[(k, mu)]
        out.append(acc)
    return out


def adjoint(D):
    """Formal adjoint of a scalar operator or an operator matrix."""
    return D.adjoint()


# -- integration by parts ----------------------------------------------------
def green_divergence(P: ScalarOperator) -> list[dict]:
    """Bilinear fluxes ``B_i`` with ``l*(P x) - (ad(P) l)*x = sum_i d_i B_i``.

    Each ``B_i`` maps ``(alpha, beta)`` to the coefficient of
    ``l_alpha * x_beta`` (jets of the dual variable l and of x).
    """
    K = P.field
    n = K.n
    B = [dict() for _ in range(n)]
    z = mi_zero(n)
    for mu, a in P.terms.items():
        # current term: L(l) * d^nu x with L an operator acting on l
        L = {z: a}
        nu = mu
        while any(nu):
            i = mi_class(nu)
            nu = mi_sub(nu, mi_unit(n, i))
            for alpha, c in L.items():
                _add_to(B[i], (alpha, nu), c, K.zero)
            # d_i(L(l) d^nu x) = d_i(L)(l) d^nu x + L(l) d^{nu+1_i} x
            L = {al: -c for al, c in _compose_terms(K, {mi_unit(n, i): K.one}, L).items()}
    return B


def divergence_of(K, B: Sequence[Mapping]) -> dict:
    """Formal ``sum_i d_i B_i`` of bilinear expressions in jet symbols."""
    out: dict = {}
    n = K.n
    for i, Bi in enumerate(B):
        e = mi_unit(n, i)
        for (al, be), c in Bi.items():
            dc = K.derive(c, i)
            if dc:
                _add_to(out, (al, be), dc, K.zero)
            _add_to(out, (mi_add(al, e), be), c, K.zero)
            _add_to(out, (al, mi_add(be, e)), c, K.zero)
    return out
