"""Dense float64 parameters, AdaGrad, similarity functions, rank correlation.

Everything trains in 64-bit: the finite-difference gradient checks this
package leans on are meaningless in single precision.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError

NORM_GUARD = 1e-12


class Param:
    """A named dense tensor with its gradient and AdaGrad accumulator.

    ``value``, ``grad`` and ``accum`` always share one shape; ``accum`` holds
    the running sum of squared gradients and never decreases.
    """

    __slots__ = ("name", "value", "grad", "accum")

    def __init__(self, name: str, value: np.ndarray):
        self.name = name
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = np.zeros_like(self.value)
        self.accum = np.zeros_like(self.value)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    def zero_grad(self) -> None:
        self.grad.fill(0.0)

    def __repr__(self) -> str:
        return f"Param({self.name!r}, shape={self.value.shape})"


def uniform_param(name: str, shape: tuple[int, ...], rng: np.random.Generator,
                  scale: float = 0.08) -> Param:
    """Cell-matrix initialization: uniform in [-scale, scale]."""
    return Param(name, rng.uniform(-scale, scale, size=shape))


def embedding_param(name: str, rows: int, dim: int, rng: np.random.Generator) -> Param:
    """Embedding table init: uniform in [-6/sqrt(d), 6/sqrt(d)], then one
    L2 row normalization (rows are never re-normalized during training)."""
    bound = 6.0 / np.sqrt(dim)
    table = rng.uniform(-bound, bound, size=(rows, dim))
    norms = np.linalg.norm(table, axis=1, keepdims=True)
    norms[norms < NORM_GUARD] = 1.0
    return Param(name, table / norms)


def adagrad_update(param: Param, lr: float, eps: float = 1e-8,
                   rows: np.ndarray | None = None) -> None:
    """One AdaGrad step: accum += g^2; value -= lr * g / (sqrt(accum) + eps).

    The gradient is zeroed afterwards. ``rows`` optionally restricts the
    update to the given first-axis indices (an exact shortcut for embedding
    tables: untouched rows have zero gradient, so the dense update would be a
    bitwise no-op for them anyway).
    """
    if rows is None:
        g = param.grad
        param.accum += g * g
        param.value -= lr * g / (np.sqrt(param.accum) + eps)
        param.grad.fill(0.0)
    else:
        g = param.grad[rows]
        param.accum[rows] += g * g
        param.value[rows] -= lr * g / (np.sqrt(param.accum[rows]) + eps)
        param.grad[rows] = 0.0


def sigmoid(x: np.ndarray) -> np.ndarray:
    # stable in both tails
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """a.b / (|a||b|), defined as 0 when either norm is below 1e-12."""
    if a.shape != b.shape:
        raise DimensionError(f"cosine: shapes {a.shape} vs {b.shape}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na < NORM_GUARD or nb < NORM_GUARD:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def cosine_with_grad(a: np.ndarray, b: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    """Cosine similarity plus d s/d a and d s/d b.

    In the guarded near-zero-norm region the similarity is the constant 0,
    so both gradients are zero there.
    """
    if a.shape != b.shape:
        raise DimensionError(f"cosine: shapes {a.shape} vs {b.shape}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na < NORM_GUARD or nb < NORM_GUARD:
        return 0.0, np.zeros_like(a), np.zeros_like(b)
    dot = float(np.dot(a, b))
    s = dot / (na * nb)
    da = b / (na * nb) - (s / (na * na)) * a
    db = a / (na * nb) - (s / (nb * nb)) * b
    return s, da, db


def margin_loss(pos_sim: float, neg_sim: float, margin: float) -> float:
    """Hinge max(0, margin + neg_sim - pos_sim); subgradient 0 at the kink."""
    return max(0.0, margin + neg_sim - pos_sim)


def spearman(x: list[float], y: list[float]) -> float:
    """Spearman rank correlation with average-rank tie handling.

    Raises ValueError for unequal lengths, fewer than two points, or a
    constant sequence (the coefficient is undefined there).
    """
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise ValueError("need at least two points")
    rx = _average_ranks(np.asarray(x, dtype=np.float64))
    ry = _average_ranks(np.asarray(y, dtype=np.float64))
    sx = rx - rx.mean()
    sy = ry - ry.mean()
    denom = np.sqrt(np.sum(sx * sx) * np.sum(sy * sy))
    if denom < NORM_GUARD:
        raise ValueError("rank correlation undefined for constant input")
    return float(np.sum(sx * sy) / denom)


def _average_ranks(v: np.ndarray) -> np.ndarray:
    order = np.argsort(v, kind="stable")
    ranks = np.empty(len(v), dtype=np.float64)
    i = 0
    while i < len(v):
        j = i
        while j + 1 < len(v) and v[order[j + 1]] == v[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks
