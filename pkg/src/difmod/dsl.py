"""A small text format for linear systems of PDEs.

::

    system ex37
    vars x1 x2
    unknowns y
    eq d[2,2](y) = 0
    eq d[1,2](y) - y = 0

Optional clauses, in this order after ``vars``: ``params a: order 6 by t``
(a function of one variable with jets ``a, a_1, ...``), ``consts l1 l2``
(arbitrary constants), then after ``unknowns`` any number of
``option NAME INT``.  Coefficients are rational functions in the declared
symbols; ``d[i,j,...](u)`` is a derivative of the unknown ``u`` (indices
from 1, repetition allowed).  ``#`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field as dc_field

from .field import DiffField, ParameterSpec
from .weyl import OperatorMatrix, format_row

__all__ = ["DSLError", "SystemDecl", "parse", "render_decl", "decl_from_operator"]

KEYWORDS = {"system", "vars", "params", "consts", "unknowns", "eq", "option", "order", "by"}

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>#[^\n]*)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<int>[0-9]+)"
    r"|(?P<op>\*\*|[\[\](),:+\-*/^=])"
)


class DSLError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"line {line}, col {col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(src: str) -> list[Token]:
    out = []
    line, col, pos = 1, 1, 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if not m:
            raise DSLError(f"unexpected character {src[pos]!r}", line, col)
        kind = m.lastgroup
        text = m.group()
        if kind == "nl":
            line, col = line + 1, 1
        else:
            if kind in ("name", "int", "op"):
                if kind == "name" and text in KEYWORDS:
                    kind = "kw"
                out.append(Token(kind, text, line, col))
            col += len(text)
        pos = m.end()
    out.append(Token("eof", "", line, col))
    return out


@dataclass
class SystemDecl:
    name: str
    vars: list
    unknowns: list
    equations: list = dc_field(default_factory=list)
    params: list = dc_field(default_factory=list)
    consts: list = dc_field(default_factory=list)
    options: dict = dc_field(default_factory=dict)
    _field: object = dc_field(default=None, repr=False, compare=False)

    def field(self) -> DiffField:
        if self._field is None:
            self._field = DiffField(self.vars, self.params, self.consts)
        return self._field

    def operator(self) -> OperatorMatrix:
        return OperatorMatrix(self.field(), self.equations, len(self.unknowns), list(self.unknowns))

    def __eq__(self, other):
        if not isinstance(other, SystemDecl):
            return NotImplemented
        head = lambda s: (s.name, list(s.vars), list(s.unknowns), list(s.params), list(s.consts), dict(s.options))
        if head(self) != head(other) or len(self.equations) != len(other.equations):
            return False
        return all(_row_key(a) == _row_key(b) for a, b in zip(self.equations, other.equations))


def _row_key(row):
    return sorted((t, str(a)) for t, a in row.items())


class _Lin:
    """Linear form in the unknown jets plus a field-valued constant part."""

    __slots__ = ("terms", "const")

    def __init__(self, terms, const):
        self.terms = terms
        self.const = const


class _Parser:
    def __init__(self, src: str):
        self.toks = tokenize(src)
        self.i = 0

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        raise DSLError(msg, tok.line, tok.col)

    def next(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def accept(self, kind, text=None):
        t = self.tok
        if t.kind == kind and (text is None or t.text == text):
            self.i += 1
            return t
        return None

    def expect(self, kind, text=None, what=None):
        t = self.accept(kind, text)
        if t is None:
            found = self.tok.text or "end of input"
            self.error(f"expected {what or text or kind}, found {found!r}")
        return t

    def names(self, what) -> list[Token]:
        out = []
        while self.tok.kind == "name":
            out.append(self.next())
        if not out:
            self.error(f"expected at least one {what}")
        return out

    # -- declaration
    def decl(self) -> SystemDecl:
        self.expect("kw", "system")
        name = self.expect("name", what="system name").text
        self.expect("kw", "vars")
        vtoks = self.names("variable name")
        params = []
        consts = []
        if self.accept("kw", "params"):
            while self.tok.kind == "name":
                pt = self.next()
                self.expect("op", ":")
                self.expect("kw", "order")
                order = int(self.expect("int", what="truncation order").text)
                self.expect("kw", "by")
                bt = self.expect("name", what="variable name")
                if bt.text not in [v.text for v in vtoks]:
                    self.error(f"undeclared variable {bt.text!r}", bt)
                params.append(ParameterSpec(pt.text, order, [v.text for v in vtoks].index(bt.text)))
            if not params:
                self.error("expected a parameter declaration")
        if self.accept("kw", "consts"):
            consts = [t.text for t in self.names("constant name")]
        self.expect("kw", "unknowns")
        utoks = self.names("unknown name")
        options = {}
        while self.accept("kw", "option"):
            on = self.expect("name", what="option name").text
            options[on] = int(self.expect("int", what="integer").text)
        decl_names = [t.text for t in vtoks] + [p.name for p in params] + consts + [t.text for t in utoks]
        seen = set()
        for nm in decl_names:
            if nm in seen:
                self.error(f"identifier {nm!r} declared twice")
            seen.add(nm)
        if any(p.jet_name(k) in seen for p in params for k in range(1, p.order + 1)):
            self.error("a declared name collides with a parameter jet name")
        decl = SystemDecl(name, [t.text for t in vtoks], [t.text for t in utoks], [], params, consts, options)
        try:
            self.K = decl.field()
        except ValueError as e:
            self.error(str(e))
        self.unknowns = decl.unknowns
        self.n = len(decl.vars)
        if self.tok.kind != "kw" or self.tok.text != "eq":
            self.error("expected at least one 'eq'")
        while self.accept("kw", "eq"):
            start = self.tok
            lhs = self.expr()
            self.expect("op", "=")
            rhs = self.expr()
            row = dict(lhs.terms)
            for t, a in rhs.terms.items():
                v = row.get(t, self.K.zero) - a
                if v:
                    row[t] = v
                else:
                    row.pop(t, None)
            if lhs.const - rhs.const:
                self.error("equation has a term without unknowns (only homogeneous systems)", start)
            decl.equations.append(row)
        if self.tok.kind != "eof":
            self.error(f"expected 'eq' or end of input, found {self.tok.text!r}")
        return decl

    # -- expressions
    def expr(self) -> _Lin:
        v = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.next().text
            w = self.term()
            v = self._add(v, w, 1 if op == "+" else -1)
        return v

    def _add(self, a: _Lin, b: _Lin, s: int) -> _Lin:
        K = self.K
        terms = dict(a.terms)
        for t, c in b.terms.items():
            v = terms.get(t, K.zero) + (c if s > 0 else -c)
            if v:
                terms[t] = v
            else:
                terms.pop(t, None)
        return _Lin(terms, a.const + b.const if s > 0 else a.const - b.const)

    def term(self) -> _Lin:
        v = self.unary()
        while self.tok.kind == "op" and self.tok.text in ("*", "/"):
            optok = self.next()
            w = self.unary()
            if optok.text == "*":
                if v.terms and w.terms:
                    self.error("product of two unknown terms (the system must be linear)", optok)
                if v.terms:
                    v, w = w, v
                # v is a pure coefficient
                v = _Lin({t: v.const * c for t, c in w.terms.items() if v.const * c}, v.const * w.const)
            else:
                if w.terms:
                    self.error("division by an expression containing unknowns", optok)
                if not w.const:
                    self.error("division by zero", optok)
                inv = self.K.one / w.const
                v = _Lin({t: c * inv for t, c in v.terms.items()}, v.const * inv)
        return v

    def unary(self) -> _Lin:
        if self.accept("op", "-"):
            v = self.unary()
            return _Lin({t: -c for t, c in v.terms.items()}, -v.const)
        if self.accept("op", "+"):
            return self.unary()
        return self.power()

    def power(self) -> _Lin:
        v = self.atom()
        if self.tok.kind == "op" and self.tok.text in ("^", "**"):
            optok = self.next()
            e = int(self.expect("int", what="integer exponent").text)
            if v.terms:
                self.error("power of an unknown term", optok)
            v = _Lin({}, v.const ** e)
        return v

    def atom(self) -> _Lin:
        K = self.K
        t = self.tok
        if t.kind == "int":
            self.next()
            return _Lin({}, K.convert(int(t.text)))
        if t.kind == "op" and t.text == "(":
            self.next()
            v = self.expr()
            self.expect("op", ")")
            return v
        if t.kind == "name":
            self.next()
            if t.text == "d" and self.tok.kind == "op" and self.tok.text == "[":
                return self.derivative(t)
            if t.text in self.unknowns:
                return _Lin({(self.unknowns.index(t.text), (0,) * self.n): K.one}, K.zero)
            if t.text in K.names:
                return _Lin({}, K.symbol(t.text))
            self.error(f"undeclared identifier {t.text!r}", t)
        self.error(f"expected an expression, found {t.text or 'end of input'!r}")

    def derivative(self, head: Token) -> _Lin:
        self.expect("op", "[")
        idx = []
        while True:
            it = self.expect("int", what="derivative index")
            i = int(it.text)
            if not 1 <= i <= self.n:
                self.error(f"derivative index out of range 1..{self.n}", it)
            idx.append(i - 1)
            if not self.accept("op", ","):
                break
        self.expect("op", "]")
        self.expect("op", "(")
        ut = self.expect("name", what="unknown name")
        if ut.text not in self.unknowns:
            self.error(f"undeclared unknown {ut.text!r}", ut)
        self.expect("op", ")")
        mu = [0] * self.n
        for i in idx:
            mu[i] += 1
        return _Lin({(self.unknowns.index(ut.text), tuple(mu)): self.K.one}, self.K.zero)


def parse(src: str) -> SystemDecl:
    return _Parser(src).decl()


def render_decl(decl: SystemDecl) -> str:
    """Source text that parses back to an equal declaration."""
    lines = [f"system {decl.name}", "vars " + " ".join(decl.vars)]
    if decl.params:
        lines.append("params " + " ".join(f"{p.name}: order {p.order} by {decl.vars[p.base]}" for p in decl.params))
    if decl.consts:
        lines.append("consts " + " ".join(decl.consts))
    lines.append("unknowns " + " ".join(decl.unknowns))
    for k, v in decl.options.items():
        lines.append(f"option {k} {v}")
    K = decl.field()
    for row in decl.equations:
        lines.append(f"eq {format_row(K, row, decl.unknowns)} = 0")
    return "\n".join(lines) + "\n"


def decl_from_operator(name: str, D: OperatorMatrix) -> SystemDecl:
    K = D.field
    decl = SystemDecl(
        re.sub(r"\W", "_", name),
        list(getattr(K, "var_names", ())),
        list(D.col_names),
        [dict(r) for r in D.rows],
        list(getattr(K, "params", ())),
        list(getattr(K, "consts", ())),
    )
    decl._field = K
    return decl
