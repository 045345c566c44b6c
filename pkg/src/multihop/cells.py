"""Recurrent cells with hand-derived exact backward passes.

Both cells follow the row-vector convention (state @ matrix) and carry no
bias terms. Forward steps return a cache of the activations the backward
pass needs; backward accumulates parameter gradients in place and returns
the gradients with respect to the step inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .numerics import Param, sigmoid, uniform_param


@dataclass
class GruCache:
    h_prev: np.ndarray
    x: np.ndarray
    g_z: np.ndarray
    g_r: np.ndarray
    h_cand: np.ndarray


class GruCell:
    """Standard update/reset-gated cell.

        g_z    = sigmoid(x U_z + h_prev W_z)
        g_r    = sigmoid(x U_r + h_prev W_r)
        h_cand = tanh(x U_q + (h_prev * g_r) W_q)
        h      = (1 - g_z) * h_cand + g_z * h_prev

    U_* are (d_in, d_h), W_* are (d_h, d_h).
    """

    def __init__(self, name: str, d_in: int, d_h: int, rng: np.random.Generator):
        self.name = name
        self.d_in = d_in
        self.d_h = d_h
        self.U_z = uniform_param(f"{name}.U_z", (d_in, d_h), rng)
        self.U_r = uniform_param(f"{name}.U_r", (d_in, d_h), rng)
        self.U_q = uniform_param(f"{name}.U_q", (d_in, d_h), rng)
        self.W_z = uniform_param(f"{name}.W_z", (d_h, d_h), rng)
        self.W_r = uniform_param(f"{name}.W_r", (d_h, d_h), rng)
        self.W_q = uniform_param(f"{name}.W_q", (d_h, d_h), rng)

    def params(self) -> list[Param]:
        return [self.U_z, self.U_r, self.U_q, self.W_z, self.W_r, self.W_q]

    def step(self, h_prev: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, GruCache]:
        if h_prev.shape != (self.d_h,):
            raise DimensionError(f"{self.name}: h_prev {h_prev.shape}, want ({self.d_h},)")
        if x.shape != (self.d_in,):
            raise DimensionError(f"{self.name}: x {x.shape}, want ({self.d_in},)")
        g_z = sigmoid(x @ self.U_z.value + h_prev @ self.W_z.value)
        g_r = sigmoid(x @ self.U_r.value + h_prev @ self.W_r.value)
        h_cand = np.tanh(x @ self.U_q.value + (h_prev * g_r) @ self.W_q.value)
        h = (1.0 - g_z) * h_cand + g_z * h_prev
        return h, GruCache(h_prev, x, g_z, g_r, h_cand)

    def backward(self, cache: GruCache, d_h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Accumulate parameter grads; return (d_h_prev, d_x)."""
        h_prev, x, g_z, g_r, h_cand = (
            cache.h_prev, cache.x, cache.g_z, cache.g_r, cache.h_cand,
        )
        d_cand = d_h * (1.0 - g_z)
        d_gz = d_h * (h_prev - h_cand)
        d_hprev = d_h * g_z

        d_aq = d_cand * (1.0 - h_cand * h_cand)
        self.U_q.grad += np.outer(x, d_aq)
        self.W_q.grad += np.outer(h_prev * g_r, d_aq)
        d_x = d_aq @ self.U_q.value.T
        d_gated = d_aq @ self.W_q.value.T
        d_hprev += d_gated * g_r
        d_gr = d_gated * h_prev

        d_az = d_gz * g_z * (1.0 - g_z)
        d_ar = d_gr * g_r * (1.0 - g_r)
        self.U_z.grad += np.outer(x, d_az)
        self.W_z.grad += np.outer(h_prev, d_az)
        self.U_r.grad += np.outer(x, d_ar)
        self.W_r.grad += np.outer(h_prev, d_ar)
        d_x += d_az @ self.U_z.value.T + d_ar @ self.U_r.value.T
        d_hprev += d_az @ self.W_z.value.T + d_ar @ self.W_r.value.T
        return d_hprev, d_x


@dataclass
class EntityGruCache:
    e_head: np.ndarray
    e_prev: np.ndarray
    h: np.ndarray
    g_zh: np.ndarray
    g_rh: np.ndarray
    g_zp: np.ndarray
    g_rp: np.ndarray
    h_cand: np.ndarray


class EntityGruCell:
    """Gated three-way composition of a hidden state with two entity states.

    One gate pair (zh, rh) attends the head entity, a second pair (zp, rp)
    the previous predicted entity:

        g_zh   = sigmoid(h U_zh + e_head W_zh)
        g_rh   = sigmoid(h U_rh + e_head W_rh)
        g_zp   = sigmoid(h U_zp + e_prev W_zp)
        g_rp   = sigmoid(h U_rp + e_prev W_rp)
        h_cand = tanh(h U_q + (e_head * g_rh) W_qh + (e_prev * g_rp) W_qp)
        e      = (1 - g_zh - g_zp) * h_cand + g_zh * e_head + g_zp * e_prev

    The mixing coefficient (1 - g_zh - g_zp) may be negative; that is
    intentional. U_* are (d_h, d_e), W_* are (d_e, d_e).
    """

    def __init__(self, name: str, d_h: int, d_e: int, rng: np.random.Generator):
        self.name = name
        self.d_h = d_h
        self.d_e = d_e
        self.U_zh = uniform_param(f"{name}.U_zh", (d_h, d_e), rng)
        self.U_rh = uniform_param(f"{name}.U_rh", (d_h, d_e), rng)
        self.U_zp = uniform_param(f"{name}.U_zp", (d_h, d_e), rng)
        self.U_rp = uniform_param(f"{name}.U_rp", (d_h, d_e), rng)
        self.U_q = uniform_param(f"{name}.U_q", (d_h, d_e), rng)
        self.W_zh = uniform_param(f"{name}.W_zh", (d_e, d_e), rng)
        self.W_rh = uniform_param(f"{name}.W_rh", (d_e, d_e), rng)
        self.W_zp = uniform_param(f"{name}.W_zp", (d_e, d_e), rng)
        self.W_rp = uniform_param(f"{name}.W_rp", (d_e, d_e), rng)
        self.W_qh = uniform_param(f"{name}.W_qh", (d_e, d_e), rng)
        self.W_qp = uniform_param(f"{name}.W_qp", (d_e, d_e), rng)

    def params(self) -> list[Param]:
        return [
            self.U_zh, self.U_rh, self.U_zp, self.U_rp, self.U_q,
            self.W_zh, self.W_rh, self.W_zp, self.W_rp, self.W_qh, self.W_qp,
        ]

    def step(
        self, e_head: np.ndarray, e_prev: np.ndarray, h: np.ndarray
    ) -> tuple[np.ndarray, EntityGruCache]:
        if e_head.shape != (self.d_e,) or e_prev.shape != (self.d_e,):
            raise DimensionError(
                f"{self.name}: entity inputs {e_head.shape}/{e_prev.shape}, want ({self.d_e},)"
            )
        if h.shape != (self.d_h,):
            raise DimensionError(f"{self.name}: h {h.shape}, want ({self.d_h},)")
        g_zh = sigmoid(h @ self.U_zh.value + e_head @ self.W_zh.value)
        g_rh = sigmoid(h @ self.U_rh.value + e_head @ self.W_rh.value)
        g_zp = sigmoid(h @ self.U_zp.value + e_prev @ self.W_zp.value)
        g_rp = sigmoid(h @ self.U_rp.value + e_prev @ self.W_rp.value)
        h_cand = np.tanh(
            h @ self.U_q.value
            + (e_head * g_rh) @ self.W_qh.value
            + (e_prev * g_rp) @ self.W_qp.value
        )
        e = (1.0 - g_zh - g_zp) * h_cand + g_zh * e_head + g_zp * e_prev
        return e, EntityGruCache(e_head, e_prev, h, g_zh, g_rh, g_zp, g_rp, h_cand)

    def backward(
        self, cache: EntityGruCache, d_e: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Accumulate parameter grads; return (d_e_head, d_e_prev, d_h)."""
        c = cache
        d_cand = d_e * (1.0 - c.g_zh - c.g_zp)
        d_gzh = d_e * (c.e_head - c.h_cand)
        d_gzp = d_e * (c.e_prev - c.h_cand)
        d_ehead = d_e * c.g_zh
        d_eprev = d_e * c.g_zp

        d_aq = d_cand * (1.0 - c.h_cand * c.h_cand)
        self.U_q.grad += np.outer(c.h, d_aq)
        d_h = d_aq @ self.U_q.value.T
        self.W_qh.grad += np.outer(c.e_head * c.g_rh, d_aq)
        d_gated_h = d_aq @ self.W_qh.value.T
        d_ehead += d_gated_h * c.g_rh
        d_grh = d_gated_h * c.e_head
        self.W_qp.grad += np.outer(c.e_prev * c.g_rp, d_aq)
        d_gated_p = d_aq @ self.W_qp.value.T
        d_eprev += d_gated_p * c.g_rp
        d_grp = d_gated_p * c.e_prev

        for d_g, gate, u, w, ent, d_ent in (
            (d_gzh, c.g_zh, self.U_zh, self.W_zh, c.e_head, "head"),
            (d_grh, c.g_rh, self.U_rh, self.W_rh, c.e_head, "head"),
            (d_gzp, c.g_zp, self.U_zp, self.W_zp, c.e_prev, "prev"),
            (d_grp, c.g_rp, self.U_rp, self.W_rp, c.e_prev, "prev"),
        ):
            d_a = d_g * gate * (1.0 - gate)
            u.grad += np.outer(c.h, d_a)
            w.grad += np.outer(ent, d_a)
            d_h += d_a @ u.value.T
            if d_ent == "head":
                d_ehead += d_a @ w.value.T
            else:
                d_eprev += d_a @ w.value.T
        return d_ehead, d_eprev, d_h


def zero_cell(cell) -> None:
    """Zero all parameter values of a cell (closed-form test helper)."""
    for p in cell.params():
        p.value.fill(0.0)
