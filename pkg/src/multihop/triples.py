"""Fact-triple storage with a (head, relation) -> tails successor index."""

from __future__ import annotations

from .errors import ParseError
from .vocab import Vocab, inverse_token


class TripleStore:
    """Deduplicated set of (head, relation, tail) id triples.

    Triples are kept both as a set (membership) and in first-seen order
    (serialization round-trips). The successor index maps (head, relation)
    to the sorted tail ids reachable in one hop. The store is treated as
    immutable once built; concurrent reads are safe.
    """

    def __init__(self, entities: Vocab | None = None, relations: Vocab | None = None):
        self.entities = entities if entities is not None else Vocab("entity")
        self.relations = relations if relations is not None else Vocab("relation")
        self._triples: set[tuple[int, int, int]] = set()
        self._ordered: list[tuple[int, int, int]] = []
        self._succ: dict[tuple[int, int], list[int]] = {}

    def __len__(self) -> int:
        return len(self._triples)

    def __contains__(self, triple: tuple[int, int, int]) -> bool:
        return triple in self._triples

    @property
    def triples(self) -> list[tuple[int, int, int]]:
        return list(self._ordered)

    def add(self, head: int, relation: int, tail: int) -> bool:
        """Insert one id triple; returns False for duplicates."""
        t = (head, relation, tail)
        if t in self._triples:
            return False
        self._triples.add(t)
        self._ordered.append(t)
        key = (head, relation)
        tails = self._succ.setdefault(key, [])
        # keep tails sorted; triple counts are desk-scale, insertion is fine
        lo, hi = 0, len(tails)
        while lo < hi:
            mid = (lo + hi) // 2
            if tails[mid] < tail:
                lo = mid + 1
            else:
                hi = mid
        tails.insert(lo, tail)
        return True

    def add_tokens(self, head: str, relation: str, tail: str) -> bool:
        return self.add(
            self.entities.add(head), self.relations.add(relation), self.entities.add(tail)
        )

    def has(self, head: int, relation: int, tail: int) -> bool:
        return (head, relation, tail) in self._triples

    def successors(self, head: int, relation: int) -> list[int]:
        """Sorted tail ids for one hop; empty list when none."""
        return self._succ.get((head, relation), [])


def parse_triples(text: str, store: TripleStore | None = None) -> TripleStore:
    """Build a TripleStore from ``head<TAB>relation<TAB>tail`` lines.

    Vocabularies extend in first-seen order; duplicate triples are dropped.
    Blank lines are ignored. Raises ParseError with the offending line number
    on a wrong field count.
    """
    if store is None:
        store = TripleStore()
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.rstrip("\r")
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ParseError(f"expected 3 tab-separated fields, got {len(fields)}", line_no)
        store.add_tokens(*fields)
    return store


def serialize_triples(store: TripleStore) -> str:
    """Triples in first-seen order, one TSV line each, LF-terminated."""
    ent, rel = store.entities, store.relations
    lines = [
        f"{ent.token(h)}\t{rel.token(r)}\t{ent.token(t)}\n" for h, r, t in store.triples
    ]
    return "".join(lines)


def add_inverses(store: TripleStore) -> TripleStore:
    """Return a new store closed under inversion: (h,r,t) <-> (t,*r,h).

    Existing ids are preserved; inverse relation tokens are appended in the
    order their base relations first appeared. Idempotent.
    """
    out = TripleStore(store.entities.copy(), store.relations.copy())
    for h, r, t in store.triples:
        out.add(h, r, t)
    for h, r, t in store.triples:
        inv = out.relations.add(inverse_token(store.relations.token(r)))
        out.add(t, inv, h)
    return out


def ingest_stats(store: TripleStore) -> dict:
    return {
        "n_triples": len(store),
        "n_entities": len(store.entities),
        "n_relations": len(store.relations),
    }
