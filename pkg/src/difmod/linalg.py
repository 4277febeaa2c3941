"""Exact linear algebra over Q and over the coefficient field.

Rows are sparse mappings ``column -> value``.  Numeric work over Q goes
through ``flint.fmpq_mat``; elimination over a :class:`~difmod.field.DiffField`
is a plain sparse Gauss-Jordan on Scalars.
"""

from __future__ import annotations

import random
from typing import Callable, Hashable, Iterable, Mapping, Sequence

import flint

from .field import PoleError

__all__ = [
    "GenericPoint",
    "to_matrix",
    "rank_q",
    "kernel_q",
    "rref_sparse",
    "rank_generic",
    "evaluate_rows",
]


class GenericPoint:
    """Reproducible source of random rational evaluation points."""

    def __init__(self, field, seed: int = 0, bound: int = 97):
        self.field = field
        self.rng = random.Random(seed)
        self.bound = bound

    def sample(self) -> dict:
        names = getattr(self.field, "names", ())
        out = {}
        for nm in names:
            v = 0
            while v == 0:
                v = self.rng.randint(-self.bound, self.bound)
            out[nm] = flint.fmpq(v, self.rng.randint(1, 7))
        return out


def evaluate_rows(field, rows: Iterable[Mapping], point: Mapping | None) -> list[dict]:
    """Evaluate sparse rows of field elements at ``point`` (raises PoleError)."""
    out = []
    for r in rows:
        if field.constant:
            out.append({c: flint.fmpq(v) if not isinstance(v, flint.fmpq) else v for c, v in r.items()})
        else:
            e = {}
            for c, v in r.items():
                x = field.evaluate(v, point)
                if x != 0:
                    e[c] = x
            out.append(e)
    return out


def to_matrix(rows: Sequence[Mapping], cols: Sequence[Hashable]) -> flint.fmpq_mat:
    index = {c: j for j, c in enumerate(cols)}
    M = flint.fmpq_mat(len(rows), len(cols))
    for i, r in enumerate(rows):
        for c, v in r.items():
            M[i, index[c]] = v
    return M


def rank_q(rows: Sequence[Mapping], cols: Sequence[Hashable]) -> int:
    if not rows or not cols:
        return 0
    return to_matrix(rows, cols).rank()


def kernel_q(rows: Sequence[Mapping], cols: Sequence[Hashable]) -> list[dict]:
    """Basis of ``{v : sum_c r[c] v[c] = 0 for all rows}`` as sparse dicts."""
    ncols = len(cols)
    if not rows:
        return [{c: flint.fmpq(1)} for c in cols]
    R, rk = to_matrix(rows, cols).rref()
    pivots = []
    for i in range(rk):
        for j in range(ncols):
            if R[i, j] != 0:
                pivots.append(j)
                break
    pset = set(pivots)
    basis = []
    for f in range(ncols):
        if f in pset:
            continue
        v = {cols[f]: flint.fmpq(1)}
        for i, p in enumerate(pivots):
            x = R[i, f]
            if x != 0:
                v[cols[p]] = -x
        basis.append(v)
    return basis


def rref_sparse(
    field,
    rows: Iterable[Mapping],
    key: Callable[[Hashable], tuple],
) -> list[tuple[Hashable, dict]]:
    """Reduced echelon form over ``field``.

    Pivots are chosen as the column with the largest ``key``; returns
    ``(pivot, row)`` pairs with monic pivots, sorted by decreasing pivot.
    """
    basis: dict = {}  # pivot -> row
    order: list = []
    for r in rows:
        r = {c: v for c, v in r.items() if v}
        # reduce by existing pivots (largest first)
        changed = True
        while r and changed:
            changed = False
            for p in sorted((c for c in r if c in basis), key=key, reverse=True):
                if p not in r:
                    continue
                c = r[p]
                for col, v in basis[p].items():
                    nv = r.get(col, field.zero) - c * v
                    if nv:
                        r[col] = nv
                    else:
                        r.pop(col, None)
                changed = True
        if not r:
            continue
        piv = max(r, key=key)
        inv = field.one / r[piv]
        r = {c: v * inv for c, v in r.items()}
        # back-substitute into older rows
        for p, b in basis.items():
            if piv in b:
                c = b[piv]
                for col, v in r.items():
                    nv = b.get(col, field.zero) - c * v
                    if nv:
                        b[col] = nv
                    else:
                        b.pop(col, None)
        basis[piv] = r
        order.append(piv)
    return sorted(basis.items(), key=lambda pr: key(pr[0]), reverse=True)


def rank_generic(field, rows: Sequence[Mapping], cols: Sequence[Hashable], sampler: GenericPoint, tries: int = 5) -> int:
    """Rank over the field, by two agreeing random evaluations.

    Disagreement falls back to symbolic elimination.
    """
    if field.constant or not rows:
        return rank_q(evaluate_rows(field, rows, None), cols)
    ranks = []
    attempts = 0
    while len(ranks) < 2:
        attempts += 1
        if attempts > tries + 2:
            raise PoleError("no admissible generic point found")
        try:
            ranks.append(rank_q(evaluate_rows(field, rows, sampler.sample()), cols))
        except PoleError:
            continue
    if ranks[0] == ranks[1]:
        return ranks[0]
    return len(rref_sparse(field, rows, key=lambda c: cols.index(c)))
