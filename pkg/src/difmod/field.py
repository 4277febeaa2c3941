"""Exact differential coefficient fields.

Two flavours share one small interface (``zero``, ``one``, ``convert``,
``derive``, ``evaluate``, ``fmt``, ``is_constant``):

* :class:`DiffField` -- rational functions over Q in the independent
  variables, the jets of declared parameter functions and symbolic
  constants.  Elements are :class:`Scalar`.
* :class:`RationalField` -- plain Q with all derivations zero.  Elements are
  ``flint.fmpq``.  Constant-coefficient computations are moved here because
  it is two orders of magnitude faster.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import flint

__all__ = [
    "DiffField",
    "RationalField",
    "ParameterSpec",
    "Scalar",
    "PoleError",
    "TruncationError",
    "QQ",
]


class PoleError(ArithmeticError):
    """Denominator vanishes at an evaluation point (caller should resample)."""


class TruncationError(ArithmeticError):
    """A parameter jet was differentiated past its declared truncation order."""


def _q(value) -> flint.fmpq:
    if isinstance(value, flint.fmpq):
        return value
    if isinstance(value, int):
        return flint.fmpq(value)
    if isinstance(value, Fraction):
        return flint.fmpq(value.numerator, value.denominator)
    if isinstance(value, str):
        return _q(Fraction(value))
    if isinstance(value, flint.fmpz):
        return flint.fmpq(value)
    # gmpy2.mpq, sympy Rational and friends
    num = getattr(value, "numerator", None)
    den = getattr(value, "denominator", None)
    if num is not None and den is not None:
        return flint.fmpq(int(num), int(den))
    raise TypeError(f"cannot convert {value!r} to a rational")


_NUMBERS = (int, Fraction, flint.fmpq, flint.fmpz)


class _Defer(TypeError):
    pass


def _deferring(method):
    def wrapper(self, other):
        try:
            return method(self, other)
        except _Defer:
            return NotImplemented

    wrapper.__name__ = method.__name__
    return wrapper


class Scalar:
    """Reduced fraction ``num/den`` of multivariate polynomials over Q.

    The denominator is monic for the graded reverse lexicographic order of
    the owning context, so equality is a comparison of representations.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, _reduced=False):
        if den is None:
            self.num = num
            self.den = num.context().constant(1)
            return
        if den.is_zero():
            raise ZeroDivisionError("Scalar division by zero")
        if not _reduced:
            if num.is_zero():
                den = den.context().constant(1)
            elif not den.is_constant():
                g = num.gcd(den)
                if not g.is_one():
                    num = num / g
                    den = den / g
            lc = den.leading_coefficient()
            if lc != 1:
                num = num / lc
                den = den / lc
        self.num = num
        self.den = den

    def _normalize(self) -> "Scalar":
        """Make the denominator monic (num/den is already coprime)."""
        lc = self.den.leading_coefficient()
        if lc != 1:
            self.num = self.num / lc
            self.den = self.den / lc
        return self

    # -- arithmetic -----------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Scalar):
            return other
        if not isinstance(other, _NUMBERS):
            raise _Defer
        ctx = self.num.context()
        return Scalar(ctx.constant(_q(other)))

    @_deferring
    def __add__(self, other):
        o = self._coerce(other)
        if self.den == o.den:
            if self.den.is_one():
                return Scalar(self.num + o.num, self.den, True)
            return Scalar(self.num + o.num, self.den)
        if self.den.is_one():
            return Scalar(self.num * o.den + o.num, o.den, True)
        if o.den.is_one():
            return Scalar(self.num + o.num * self.den, self.den, True)
        # Henrici: only the common part of the denominators can cancel
        g = self.den.gcd(o.den)
        if g.is_one():
            return Scalar(self.num * o.den + o.num * self.den, self.den * o.den, True)
        b, d = self.den / g, o.den / g
        t = self.num * d + o.num * b
        if t.is_zero():
            return Scalar(t)
        h = t.gcd(g)
        if not h.is_one():
            t = t / h
            g = g / h
        return Scalar(t, b * d * g, True)._normalize()

    __radd__ = __add__

    def __neg__(self):
        return Scalar(-self.num, self.den, True)

    @_deferring
    def __sub__(self, other):
        return self + (-self._coerce(other))

    @_deferring
    def __rsub__(self, other):
        return self._coerce(other) - self

    @_deferring
    def __mul__(self, other):
        o = self._coerce(other)
        if self.den.is_one() and o.den.is_one():
            return Scalar(self.num * o.num, self.den, True)
        a, b, c, d = self.num, self.den, o.num, o.den
        if a.is_zero() or c.is_zero():
            return Scalar(a.context().constant(0))
        if not d.is_one():
            g = a.gcd(d)
            if not g.is_one():
                a, d = a / g, d / g
        if not b.is_one():
            g = c.gcd(b)
            if not g.is_one():
                c, b = c / g, b / g
        return Scalar(a * c, b * d, True)._normalize()

    __rmul__ = __mul__

    def inverse(self) -> "Scalar":
        if self.num.is_zero():
            raise ZeroDivisionError("Scalar division by zero")
        return Scalar(self.den, self.num)

    @_deferring
    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    @_deferring
    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        return Scalar(self.num**k, self.den**k, True)

    # -- comparisons ----------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, Scalar):
            return self.num == other.num and self.den == other.den
        if not isinstance(other, _NUMBERS):
            return NotImplemented
        o = self._coerce(other)
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        return hash((str(self.num), str(self.den)))

    def __bool__(self):
        return not self.num.is_zero()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def to_rational(self) -> flint.fmpq:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return _q(self.num.leading_coefficient() if not self.num.is_zero() else 0)

    def __str__(self):
        if self.den.is_one():
            return str(self.num)
        n = str(self.num)
        if len(self.num) > 1:
            n = f"({n})"
        d = str(self.den)
        if len(self.den) > 1 or (self.den.total_degree() > 0 and "*" in d):
            d = f"({d})"
        return f"{n}/{d}"

    def __repr__(self):
        return f"Scalar({self})"


@dataclass(frozen=True)
class ParameterSpec:
    """A parameter function of one base variable, truncated at jet ``order``."""

    name: str
    order: int = 8
    base: int = 0  # 0-based index of the driving derivation

    def jet_name(self, k: int) -> str:
        return self.name if k == 0 else f"{self.name}_{k}"


class RationalField:
    """Q with ``n`` zero derivations."""

    constant = True

    def __init__(self, var_names: Sequence[str]):
        self.var_names = tuple(var_names)
        self.n = len(self.var_names)
        self.zero = flint.fmpq(0)
        self.one = flint.fmpq(1)

    def convert(self, value):
        if isinstance(value, Scalar):
            return value.to_rational()
        return _q(value)

    def derive(self, a, i):
        return self.zero

    def derive_multi(self, a, mu):
        return a if not any(mu) else self.zero

    def evaluate(self, a, point=None):
        return a

    def is_constant(self, a) -> bool:
        return True

    def fmt(self, a) -> str:
        return str(a)

    def __repr__(self):
        return f"RationalField({', '.join(self.var_names)})"


class DiffField:
    """Differential field Q(x_1..x_n; parameter jets; constants).

    ``derive(a, i)`` is the total derivative along ``x_i`` (0-based): the
    jets of a parameter whose base is ``i`` are chained, constants and jets
    of other parameters are killed.
    """

    constant = False

    def __init__(
        self,
        var_names: Sequence[str],
        params: Sequence[ParameterSpec] = (),
        consts: Sequence[str] = (),
    ):
        self.var_names = tuple(var_names)
        self.n = len(self.var_names)
        self.params = tuple(params)
        self.consts = tuple(consts)
        names = list(self.var_names)
        # name -> (kind, data) where kind in {"var", "jet", "const"}
        self._kinds: dict[str, tuple] = {v: ("var", i) for i, v in enumerate(self.var_names)}
        for p in self.params:
            if not 0 <= p.base < self.n:
                raise ValueError(f"parameter {p.name!r}: base derivation out of range")
            for k in range(p.order + 1):
                names.append(p.jet_name(k))
                self._kinds[p.jet_name(k)] = ("jet", (p, k))
        for c in self.consts:
            names.append(c)
            self._kinds[c] = ("const", None)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate symbol names in {names}")
        self.names = tuple(names)
        self.ctx = flint.fmpq_mpoly_ctx.get(self.names, "degrevlex")
        one = self.ctx.constant(1)
        self.zero = Scalar(self.ctx.constant(0), one, True)
        self.one = Scalar(one, one, True)
        self._gens = {nm: Scalar(g, one, True) for nm, g in zip(self.names, self.ctx.gens())}
        self._dcache: dict = {}

    # -- construction ---------------------------------------------------
    def symbol(self, name: str) -> Scalar:
        return self._gens[name]

    @property
    def x(self) -> list[Scalar]:
        return [self._gens[v] for v in self.var_names]

    def jet(self, name: str, k: int = 0) -> Scalar:
        for p in self.params:
            if p.name == name:
                if k > p.order:
                    raise TruncationError(f"{name}: jet {k} beyond truncation order {p.order}")
                return self._gens[p.jet_name(k)]
        raise KeyError(name)

    def convert(self, value) -> Scalar:
        if isinstance(value, Scalar):
            return value
        return Scalar(self.ctx.constant(_q(value)), self.ctx.constant(1), True)

    def constant_field(self) -> RationalField:
        return RationalField(self.var_names)

    # -- derivation -----------------------------------------------------
    def _dpoly(self, p, i):
        """Total derivative of a polynomial along x_i."""
        out = self.ctx.constant(0)
        if p.is_constant():
            return out
        degs = p.degrees()
        for idx, nm in enumerate(self.names):
            if degs[idx] == 0:
                continue
            kind, data = self._kinds[nm]
            if kind == "var":
                if data == i:
                    out += p.derivative(idx)
            elif kind == "jet":
                spec, k = data
                if spec.base != i:
                    continue
                if k == spec.order:
                    raise TruncationError(
                        f"derivative of {nm} exceeds truncation order {spec.order} of {spec.name!r}"
                    )
                out += p.derivative(idx) * self.ctx.gens()[self.names.index(spec.jet_name(k + 1))]
        return out

    def derive(self, a: Scalar, i: int) -> Scalar:
        if a.num.is_constant() and a.den.is_constant():
            return self.zero
        dn = self._dpoly(a.num, i)
        if a.den.is_one():
            return Scalar(dn, a.den, True)
        dd = self._dpoly(a.den, i)
        return Scalar(dn * a.den - a.num * dd, a.den * a.den)

    def derive_multi(self, a: Scalar, mu) -> Scalar:
        if not any(mu):
            return a
        key = (a, mu)
        hit = self._dcache.get(key)
        if hit is not None:
            return hit
        i = next(j for j, e in enumerate(mu) if e)
        rest = mu[:i] + (mu[i] - 1,) + mu[i + 1 :]
        out = self.derive(self.derive_multi(a, rest), i)
        if len(self._dcache) < 200000:
            self._dcache[key] = out
        return out

    def is_constant(self, a: Scalar) -> bool:
        return all(not self.derive(a, i) for i in range(self.n))

    # -- evaluation -----------------------------------------------------
    def evaluate(self, a: Scalar, point: Mapping[str, object]) -> flint.fmpq:
        vals = [_q(point.get(nm, 0)) for nm in self.names]
        den = a.den(*vals)
        if den == 0:
            raise PoleError(f"denominator of {a} vanishes at the evaluation point")
        return a.num(*vals) / den

    def substitute(self, a: Scalar, values: Mapping[str, object]) -> Scalar:
        """Replace symbols by rationals (exact specialization)."""
        vals = {nm: _q(v) for nm, v in values.items()}
        num = a.num.subs(vals) if vals else a.num
        den = a.den.subs(vals) if vals else a.den
        return Scalar(num, den)

    def fmt(self, a) -> str:
        return str(a)

    def __repr__(self):
        extra = ""
        if self.params:
            extra += "; params " + ", ".join(f"{p.name}<={p.order}" for p in self.params)
        if self.consts:
            extra += "; consts " + ", ".join(self.consts)
        return f"DiffField({', '.join(self.var_names)}{extra})"


QQ = _q
