"""Standard data for the geometric structure kinds (used by the CLI and demos)."""

from __future__ import annotations

from .builtins import unimodular_data
from .field import DiffField
from .geometry import Metric, euclidean

__all__ = ["KINDS", "structure_data"]

KINDS = ("affine", "principal", "riemann", "contact", "unimodular")


def structure_data(kind: str, variant: int = 0):
    """``(field, data, label)`` for a displayed choice of structure."""
    if kind == "affine":
        K = DiffField(["x"])
        x = K.x[0]
        choices = [((1, 0), "alpha = 1, gamma = 0"), ((1 / x, 0), "alpha = 1/x, gamma = 0")]
    elif kind == "principal":
        K = DiffField(["x1", "x2"])
        x2 = K.x[1]
        choices = [
            ([[1, 0], [0, 1]], "w = (dx1, dx2)"),
            ([[1 / x2, 0], [0, 1 / x2]], "w = (dx1/x2, dx2/x2)"),
        ]
    elif kind == "riemann":
        K = DiffField(["x1", "x2"])
        x1, x2 = K.x
        c = 4 / (1 + x1 * x1 + x2 * x2) ** 2
        choices = [(euclidean(K), "euclidean plane"), (Metric(K, [[c, 0], [0, c]]), "unit sphere, stereographic")]
    elif kind == "contact":
        K = DiffField(["x1", "x2", "x3"])
        x3 = K.x[2]
        choices = [([1, -x3, 0], "w = (1, -x3, 0)"), ([1, 0, 0], "w = (1, 0, 0)")]
    elif kind == "unimodular":
        K = DiffField(["x1", "x2", "x3"])
        labels = [
            "alpha = dx1 - x3 dx2, beta = dx2^dx3",
            "alpha = dx1, beta = dx2^dx3",
            "alpha = dx1/x1, beta = x1 dx2^dx3",
        ]
        choices = [(unimodular_data(K, v), labels[v]) for v in range(3)]
    else:
        raise ValueError(f"unknown structure kind {kind!r}; choose from {', '.join(KINDS)}")
    if not 0 <= variant < len(choices):
        raise ValueError(f"{kind} has variants 0..{len(choices) - 1}")
    data, label = choices[variant]
    return K, data, label


def n_variants(kind: str) -> int:
    return {"affine": 2, "principal": 2, "riemann": 2, "contact": 2, "unimodular": 3}[kind]
