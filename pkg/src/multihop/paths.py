"""Multi-hop path records and the two on-disk path formats.

Base format (one path per line)::

    head<TAB>r1,r2,...,rt<TAB>tail

Enhanced format fills in the entity visited after every hop but the last::

    head<TAB>r1,e1,r2,e2,...,rt<TAB>tail

so the middle field of an enhanced line alternates relation/entity tokens
and has 2t-1 of them.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .errors import ParseError
from .triples import TripleStore
from .vocab import Vocab


@dataclass(frozen=True)
class PathInstance:
    """One head entity, t >= 1 relations, optional t-1 intermediates, tail.

    ``intermediates`` is None for base paths and a (possibly empty) tuple for
    enhanced ones. ``tail`` is None only for relations-only paths whose tail
    was severed by hop truncation.
    """

    head: int
    relations: tuple[int, ...]
    intermediates: tuple[int, ...] | None
    tail: int | None

    def __post_init__(self):
        if len(self.relations) < 1:
            raise ValueError("path needs at least one relation")
        if self.intermediates is not None and len(self.intermediates) != len(self.relations) - 1:
            raise ValueError(
                f"{len(self.relations)}-hop path needs {len(self.relations) - 1} "
                f"intermediates, got {len(self.intermediates)}"
            )

    @property
    def length(self) -> int:
        return len(self.relations)

    @property
    def enhanced(self) -> bool:
        return self.intermediates is not None

    def entity_sequence(self) -> tuple[int | None, ...]:
        """Entities visited after each hop: (e_1, ..., e_t) with e_t = tail."""
        inner = self.intermediates if self.intermediates is not None else ()
        return tuple(inner) + (self.tail,)


def parse_paths(
    text: str,
    enhanced: bool,
    entities: Vocab,
    relations: Vocab,
    frozen: bool = False,
) -> list[PathInstance]:
    """Parse one path per line, extending (or looking up against) the vocabs.

    With ``frozen=True`` unknown tokens map to the reserved unknown id instead
    of growing the vocab; the vocabs must already carry it (``ensure_unk``).
    Duplicate paths are kept. Raises ParseError on field-count or alternation
    violations.
    """

    def intern_entity(tok: str) -> int:
        return entities.lookup(tok)[0] if frozen else entities.add(tok)

    def intern_relation(tok: str) -> int:
        return relations.lookup(tok)[0] if frozen else relations.add(tok)

    out: list[PathInstance] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.rstrip("\r")
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ParseError(f"expected 3 tab-separated fields, got {len(fields)}", line_no)
        head_tok, middle, tail_tok = fields
        tokens = middle.split(",") if middle else []
        if not tokens:
            raise ParseError("empty relation sequence", line_no)
        if enhanced:
            if len(tokens) % 2 == 0:
                raise ParseError(
                    f"enhanced middle field must hold 2t-1 tokens, got {len(tokens)}", line_no
                )
            rels = tuple(intern_relation(tok) for tok in tokens[0::2])
            inter = tuple(intern_entity(tok) for tok in tokens[1::2])
        else:
            rels = tuple(intern_relation(tok) for tok in tokens)
            inter = None
        out.append(
            PathInstance(intern_entity(head_tok), rels, inter, intern_entity(tail_tok))
        )
    return out


def serialize_path(path: PathInstance, entities: Vocab, relations: Vocab) -> str:
    """One TSV line (without trailing newline) in the path's own format."""
    if path.tail is None:
        raise ValueError("cannot serialize a path with a severed tail")
    if path.enhanced:
        parts = []
        for i, r in enumerate(path.relations):
            parts.append(relations.token(r))
            if i < len(path.relations) - 1:
                parts.append(entities.token(path.intermediates[i]))
        middle = ",".join(parts)
    else:
        middle = ",".join(relations.token(r) for r in path.relations)
    return f"{entities.token(path.head)}\t{middle}\t{entities.token(path.tail)}"


def serialize_paths(paths: list[PathInstance], entities: Vocab, relations: Vocab) -> str:
    return "".join(serialize_path(p, entities, relations) + "\n" for p in paths)


def path_is_valid(store: TripleStore, path: PathInstance) -> bool:
    """Hop-by-hop membership check of an enhanced path against the store."""
    if not path.enhanced or path.tail is None:
        return False
    nodes = (path.head,) + path.entity_sequence()
    return all(
        store.has(nodes[i], r, nodes[i + 1]) for i, r in enumerate(path.relations)
    )


def enhance_path(
    store: TripleStore, path: PathInstance, rng: random.Random
) -> PathInstance | None:
    """Fill in intermediate entities by traversing the store, or None.

    Randomized depth-first search with backtracking: at each hop the
    successors are visited in a uniformly shuffled order, so the chosen
    completable successor is uniform among those admitting a completion.
    Deterministic for a given ``rng`` state. Returns None when no entity
    sequence connects head to tail along the relation sequence.
    """
    if path.enhanced:
        raise ValueError("path already has intermediates")
    if path.tail is None:
        raise ValueError("cannot enhance a path without a tail")
    rels = path.relations
    last = len(rels) - 1
    chosen: list[int] = []

    def search(node: int, hop: int) -> bool:
        if hop == last:
            return store.has(node, rels[hop], path.tail)
        cands = list(store.successors(node, rels[hop]))
        rng.shuffle(cands)
        for cand in cands:
            chosen.append(cand)
            if search(cand, hop + 1):
                return True
            chosen.pop()
        return False

    if not search(path.head, 0):
        return None
    return PathInstance(path.head, rels, tuple(chosen), path.tail)
