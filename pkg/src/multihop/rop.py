"""Recurrent hop-by-hop entity predictors.

Three architectures map a (head entity, relation sequence) pair to one
predicted entity embedding per hop:

* ``seeded``   -- a single GRU whose hidden state is initialized with the
  head entity embedding; each hidden state is the prediction.
* ``composed`` -- a zero-initialized GRU encodes the relation prefix into
  h_i, then a composition of (head, h_i) predicts hop i. Composition is
  ``add`` or a dedicated ``gru`` cell (head as state, h_i as input).
* ``chained``  -- like ``composed`` but the composition also consumes the
  previous predicted entity: ``add`` (three-way sum) or the gated ``egru``
  cell.

Training minimizes a per-hop margin ranking loss between the predicted
embedding's similarity to the gold entity and to sampled negatives;
gradients flow through the full unrolled recurrence.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .cells import EntityGruCell, GruCell
from .errors import ConfigError, NumericError
from .numerics import (
    NORM_GUARD,
    Param,
    adagrad_update,
    cosine_with_grad,
    embedding_param,
)
from .paths import PathInstance
from .vocab import Vocab

ARCHITECTURES = ("seeded", "composed", "chained")
COMPOSITIONS = {"seeded": (None,), "composed": ("add", "gru"), "chained": ("add", "egru")}


@dataclass
class RopConfig:
    """Architecture/composition choice plus the knobs of the ranking loss."""

    arch: str = "chained"
    comp: str | None = "egru"
    d_e: int = 64
    d_r: int = 64
    d_h: int = 64
    margin: float = 0.3
    negatives: int = 10
    similarity: str = "cosine"

    def validate(self) -> "RopConfig":
        if self.arch not in ARCHITECTURES:
            raise ConfigError(f"unknown arch {self.arch!r}; choose from {ARCHITECTURES}")
        if self.comp not in COMPOSITIONS[self.arch]:
            raise ConfigError(
                f"comp {self.comp!r} not valid for arch {self.arch!r} "
                f"(allowed: {COMPOSITIONS[self.arch]})"
            )
        if min(self.d_e, self.d_r, self.d_h) < 1:
            raise ConfigError("embedding/hidden dims must be >= 1")
        if self.margin <= 0:
            raise ConfigError("margin must be positive")
        if self.negatives < 1:
            raise ConfigError("need at least one negative per gold entity")
        if self.similarity != "cosine":
            raise ConfigError(f"unsupported similarity {self.similarity!r}")
        needs_same = self.arch in ("seeded", "chained") or self.comp == "add"
        if needs_same and self.d_e != self.d_h:
            raise ConfigError(
                f"arch {self.arch!r}/comp {self.comp!r} requires d_e == d_h "
                f"(got {self.d_e} vs {self.d_h})"
            )
        return self


@dataclass
class ForwardTrace:
    """Per-hop activations cached by a forward pass for backprop."""

    head: int
    rel_ids: tuple[int, ...]
    preds: list[np.ndarray]
    enc_caches: list
    hidden: list[np.ndarray] | None = None
    comp_caches: list | None = None

    @property
    def length(self) -> int:
        return len(self.rel_ids)


class RopModel:
    """Embedding tables plus the recurrent cells of one configuration."""

    def __init__(self, config: RopConfig, entities: Vocab, relations: Vocab,
                 rng: np.random.Generator):
        config.validate()
        self.config = config
        self.entities = entities
        self.relations = relations
        self.entity_emb = embedding_param("entity_emb", len(entities), config.d_e, rng)
        self.relation_emb = embedding_param("relation_emb", len(relations), config.d_r, rng)
        enc_hidden = config.d_e if config.arch == "seeded" else config.d_h
        self.encoder = GruCell("encoder", config.d_r, enc_hidden, rng)
        if config.comp == "gru":
            self.composer: GruCell | EntityGruCell | None = GruCell(
                "composer", config.d_h, config.d_e, rng
            )
        elif config.comp == "egru":
            self.composer = EntityGruCell("composer", config.d_h, config.d_e, rng)
        else:
            self.composer = None

    def params(self) -> list[Param]:
        out = [self.entity_emb, self.relation_emb] + self.encoder.params()
        if self.composer is not None:
            out += self.composer.params()
        return out

    def cell_params(self) -> list[Param]:
        out = list(self.encoder.params())
        if self.composer is not None:
            out += self.composer.params()
        return out

    def forward(self, head: int, rel_ids: Iterable[int]) -> ForwardTrace:
        """Predict one entity embedding per hop; caches enable backward()."""
        rel_ids = tuple(rel_ids)
        if not rel_ids:
            raise ValueError("empty relation sequence")
        cfg = self.config
        e_head = self.entity_emb.value[head]
        if cfg.arch == "seeded":
            state = e_head
            preds, caches = [], []
            for r in rel_ids:
                state, c = self.encoder.step(state, self.relation_emb.value[r])
                preds.append(state)
                caches.append(c)
            return ForwardTrace(head, rel_ids, preds, caches)

        h = np.zeros(cfg.d_h)
        hidden, enc_caches, comp_caches, preds = [], [], [], []
        e_prev = e_head
        for r in rel_ids:
            h, c = self.encoder.step(h, self.relation_emb.value[r])
            hidden.append(h)
            enc_caches.append(c)
            if cfg.arch == "composed":
                if cfg.comp == "add":
                    pred, cc = e_head + h, None
                else:
                    pred, cc = self.composer.step(e_head, h)
            else:  # chained
                if cfg.comp == "add":
                    pred, cc = e_head + e_prev + h, None
                else:
                    pred, cc = self.composer.step(e_head, e_prev, h)
                e_prev = pred
            preds.append(pred)
            comp_caches.append(cc)
        return ForwardTrace(head, rel_ids, preds, enc_caches, hidden, comp_caches)

    def backward(self, trace: ForwardTrace, d_preds: list[np.ndarray]) -> None:
        """Backprop through the full unrolled recurrence.

        ``d_preds[i]`` is the loss gradient w.r.t. the hop-(i+1) prediction.
        Parameter and embedding-row gradients accumulate in place.
        """
        cfg = self.config
        t = trace.length
        if cfg.arch == "seeded":
            carry = np.zeros(cfg.d_e)
            for i in range(t - 1, -1, -1):
                carry, d_x = self.encoder.backward(trace.enc_caches[i], d_preds[i] + carry)
                self.relation_emb.grad[trace.rel_ids[i]] += d_x
            self.entity_emb.grad[trace.head] += carry
            return

        d_hidden = [np.zeros(cfg.d_h) for _ in range(t)]
        d_ehead = np.zeros(cfg.d_e)
        if cfg.arch == "composed":
            for i in range(t):
                if cfg.comp == "add":
                    d_ehead += d_preds[i]
                    d_hidden[i] += d_preds[i]
                else:
                    d_prev, d_x = self.composer.backward(trace.comp_caches[i], d_preds[i])
                    d_ehead += d_prev
                    d_hidden[i] += d_x
        else:  # chained: gradient flows through the prediction chain
            carry_e = np.zeros(cfg.d_e)
            for i in range(t - 1, -1, -1):
                d_e_i = d_preds[i] + carry_e
                if cfg.comp == "add":
                    d_ehead += d_e_i
                    d_hidden[i] += d_e_i
                    carry_e = d_e_i
                else:
                    d_eh, carry_e, d_h = self.composer.backward(trace.comp_caches[i], d_e_i)
                    d_ehead += d_eh
                    d_hidden[i] += d_h
            d_ehead += carry_e  # chain starts at the head embedding

        carry = np.zeros(cfg.d_h)
        for i in range(t - 1, -1, -1):
            carry, d_x = self.encoder.backward(trace.enc_caches[i], d_hidden[i] + carry)
            self.relation_emb.grad[trace.rel_ids[i]] += d_x
        # carry now holds d/d h_0; h_0 is the constant zero vector.
        self.entity_emb.grad[trace.head] += d_ehead


def supervised_positions(path: PathInstance) -> list[tuple[int, int]]:
    """(1-based hop, gold entity id) pairs a path supervises.

    Enhanced paths supervise every hop; relations-only paths just the tail.
    A severed tail (None) yields no supervision at its hop.
    """
    out = []
    if path.enhanced:
        out.extend((i, e) for i, e in enumerate(path.intermediates, start=1))
    if path.tail is not None:
        out.append((path.length, path.tail))
    return out


def sample_negatives(rng: np.random.Generator, n_entities: int, k: int,
                     exclude: int) -> np.ndarray:
    """k entity ids uniform over the vocabulary excluding the gold entity."""
    if n_entities < 2:
        raise ValueError("need at least two entities to sample a negative")
    out = rng.integers(0, n_entities, size=k)
    while True:
        clash = out == exclude
        if not clash.any():
            return out
        out[clash] = rng.integers(0, n_entities, size=int(clash.sum()))


def ranking_loss(
    model: RopModel,
    trace: ForwardTrace,
    supervision: list[tuple[int, int, np.ndarray]],
    margin: float,
    compute_grad: bool = True,
) -> tuple[float, list[np.ndarray]]:
    """Per-hop hinge loss summed over positions and their negatives.

    ``supervision`` holds (hop, gold entity id, negative entity ids). When
    ``compute_grad`` is set, embedding-row gradients accumulate on the model
    and the returned list carries d loss / d prediction per hop (zeros for
    unsupervised hops); the caller feeds it to ``model.backward``.
    """
    emb = model.entity_emb
    loss = 0.0
    d_preds = [np.zeros_like(p) for p in trace.preds] if compute_grad else []
    for hop, gold, negs in supervision:
        pred = trace.preds[hop - 1]
        norm_pred = float(np.linalg.norm(pred))
        neg_rows = emb.value[negs]
        neg_norms = np.linalg.norm(neg_rows, axis=1)
        if norm_pred < NORM_GUARD:
            # guarded region: every similarity is the constant 0
            loss += margin * len(negs)
            continue
        s_pos, d_gold, d_pred_pos = cosine_with_grad(emb.value[gold], pred)
        valid = neg_norms >= NORM_GUARD
        s_neg = np.zeros(len(negs))
        np.divide(neg_rows @ pred, neg_norms * norm_pred, out=s_neg, where=valid)
        violated = margin + s_neg - s_pos > 0.0
        n_viol = int(violated.sum())
        if n_viol == 0:
            continue
        loss += float(np.sum(margin + s_neg[violated] - s_pos))
        if not compute_grad:
            continue
        d_pred = d_preds[hop - 1]
        act = violated & valid
        if act.any():
            rows = neg_rows[act]
            norms = neg_norms[act]
            sims = s_neg[act]
            coef = 1.0 / (norms * norm_pred)
            d_pred += rows.T @ coef - (np.sum(sims) / norm_pred**2) * pred
            contrib = np.outer(coef, pred) - (sims / norms**2)[:, None] * rows
            np.add.at(emb.grad, negs[act], contrib)
        d_pred -= n_viol * d_pred_pos
        emb.grad[gold] -= n_viol * d_gold
    return loss, d_preds


@dataclass
class TrainSettings:
    lr: float = 0.01
    batch_size: int = 50
    eps: float = 1e-8


@dataclass
class EpochStats:
    loss: float
    n_paths: int
    wallclock_s: float
    touched_entities: int = 0
    touched_relations: int = 0


def train_epoch(
    model: RopModel,
    paths: list[PathInstance],
    rng: np.random.Generator,
    settings: TrainSettings,
) -> EpochStats:
    """One pass over the corpus: shuffled minibatches, fresh negatives per
    visit, AdaGrad step per batch. Deterministic for a given rng state."""
    cfg = model.config
    n_ent = len(model.entities)
    t0 = time.perf_counter()
    order = rng.permutation(len(paths))
    total = 0.0
    all_touched_e: set[int] = set()
    all_touched_r: set[int] = set()
    for start in range(0, len(order), settings.batch_size):
        batch = order[start : start + settings.batch_size]
        touched_e: set[int] = set()
        touched_r: set[int] = set()
        for idx in batch:
            path = paths[idx]
            supervision = [
                (hop, gold, sample_negatives(rng, n_ent, cfg.negatives, gold))
                for hop, gold in supervised_positions(path)
            ]
            if not supervision:
                continue
            trace = model.forward(path.head, path.relations)
            loss, d_preds = ranking_loss(model, trace, supervision, cfg.margin)
            total += loss
            model.backward(trace, d_preds)
            touched_e.add(path.head)
            touched_e.update(gold for _, gold, _ in supervision)
            for _, _, negs in supervision:
                touched_e.update(int(n) for n in negs)
            touched_r.update(path.relations)
        if not np.isfinite(total):
            raise NumericError(
                f"non-finite loss in batch starting at path {start} "
                f"(arch={cfg.arch}, comp={cfg.comp}, lr={settings.lr})"
            )
        for p in model.cell_params():
            adagrad_update(p, settings.lr, settings.eps)
        if touched_e:
            adagrad_update(model.entity_emb, settings.lr, settings.eps,
                           rows=np.fromiter(sorted(touched_e), dtype=np.intp))
        if touched_r:
            adagrad_update(model.relation_emb, settings.lr, settings.eps,
                           rows=np.fromiter(sorted(touched_r), dtype=np.intp))
        all_touched_e |= touched_e
        all_touched_r |= touched_r
    return EpochStats(
        loss=total / max(1, len(paths)),
        n_paths=len(paths),
        wallclock_s=time.perf_counter() - t0,
        touched_entities=len(all_touched_e),
        touched_relations=len(all_touched_r),
    )


def evaluate_loss(
    model: RopModel,
    paths: list[PathInstance],
    rng: np.random.Generator,
) -> float:
    """Mean per-path ranking loss with the same traversal and sampling
    order as ``train_epoch`` (so a zero-lr epoch reports the same value)."""
    cfg = model.config
    n_ent = len(model.entities)
    order = rng.permutation(len(paths))
    total = 0.0
    for idx in order:
        path = paths[idx]
        supervision = [
            (hop, gold, sample_negatives(rng, n_ent, cfg.negatives, gold))
            for hop, gold in supervised_positions(path)
        ]
        if not supervision:
            continue
        trace = model.forward(path.head, path.relations)
        loss, _ = ranking_loss(model, trace, supervision, cfg.margin, compute_grad=False)
        total += loss
    return total / max(1, len(paths))
